from moxicheck.cli import main

main()
