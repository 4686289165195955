from moxicheck.engines.bmc import bmc_check
from moxicheck.engines.kinduction import kind_check, kind_check_incremental
from moxicheck.engines.oracle import OracleLimitExceeded, enumerate_check
from moxicheck.engines.pdr import certify_invariant, pdr_check

__all__ = ["bmc_check", "kind_check", "kind_check_incremental", "pdr_check",
           "certify_invariant", "enumerate_check", "OracleLimitExceeded"]
