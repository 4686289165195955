"""Regenerate the JSON task files in this directory.

The nine theory tasks are re-creations: each safe one is k-inductive over
its unbounded domain, and several go wrong once integers are squeezed into
32-bit words (Fibonacci and the product overflow into negative values).
"""

import sys
from pathlib import Path

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE.parent / "tests"))

from moxi_json import document, dumps  # noqa: E402

THEORY_TASKS = {
    # name: (logic, expected verdict, document)
    "FibonacciSequence": ("QF_LIA", "safe", document(
        "QF_LIA", outputs=[("a", "Int"), ("b", "Int")],
        init="(and (= a 0) (= b 1))",
        trans="(and (= a' b) (= b' (+ a b)))",
        reach="(< a 0)")),
    "IntIncrement": ("QF_LIA", "unsafe", document(
        "QF_LIA", inputs=[("d", "Int")], outputs=[("x", "Int")],
        init="(= x 0)",
        trans="(and (<= 1 d) (<= d 3) (= x' (+ x d)))",
        reach="(>= x 25)")),
    "IntCounter": ("QF_LIA", "safe", document(
        "QF_LIA", outputs=[("x", "Int")],
        init="(= x 0)",
        trans="(= x' (ite (< x 10) (+ x 1) 0))",
        reach="(or (< x 0) (> x 10))")),
    "IntMultiply": ("QF_NIA", "safe", document(
        "QF_NIA", outputs=[("x", "Int"), ("y", "Int")],
        init="(and (= x 1) (= y 3))",
        trans="(and (= x' (* x y)) (= y' y))",
        reach="(or (<= x 0) (<= y 0))")),
    "BoundedLinearGrowth": ("QF_LRA", "safe", document(
        "QF_LRA", outputs=[("x", "Real")],
        init="(= x 0.0)",
        trans="(= x' (+ (/ x 2.0) 1.0))",
        reach="(> x 2.0)")),
    "DoubleDelay2": ("QF_LRA", "unsafe", document(
        "QF_LRA", outputs=[("x", "Real"), ("y", "Real"), ("z", "Real")],
        init="(and (= x 0.0) (= y 0.0) (= z 0.0))",
        trans="(and (= x' y) (= y' z) (= z' (+ z 0.5)))",
        reach="(>= x 1.0)")),
    "OscillatingRatio": ("QF_NRA", "safe", document(
        "QF_NRA", outputs=[("x", "Real"), ("r", "Real")],
        init="(and (= x 1.0) (= r (/ 1 2)))",
        trans="(and (= x' (- (* r x))) (= r' r))",
        inv="(and (< 0.0 r) (< r 1.0))",
        reach="(> (* x x) 1.0)")),
    "SafeNonlinearGrowth": ("QF_NRA", "safe", document(
        "QF_NRA", outputs=[("x", "Real")],
        init="(= x 0.5)",
        trans="(= x' (* x x))",
        reach="(or (< x 0.0) (> x 1.0))")),
    "NonlinearGrowth": ("QF_NRA", "unsafe", document(
        "QF_NRA", outputs=[("x", "Real")],
        init="(= x 1.5)",
        trans="(= x' (* x x))",
        reach="(> x 5.0)")),
}

COUNTER = document(
    "QF_BV", outputs=[("s", "(_ BitVec 3)")],
    init="(= s #b000)",
    trans="(= s' (bvadd s #b010))",
    reach="(= (bvurem s #b010) #b001)")


def main():
    for name, (logic, verdict, doc) in THEORY_TASKS.items():
        (HERE / "theories" / f"{name}.json").write_text(dumps(doc) + "\n")
    (HERE / "counter.json").write_text(dumps(COUNTER) + "\n")


if __name__ == "__main__":
    main()
