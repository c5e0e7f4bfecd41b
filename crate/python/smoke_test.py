"""Smoke test of the fracvexp Python extension.

Build and install first:  pip install --no-build-isolation ./crates/py
"""

import math
import sys
import tempfile
from pathlib import Path

import fracvexp


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip())
    return ok


def main():
    results = []

    e = fracvexp.Exponent(dimension=2, order=0.3, m=0.5, q_kind="example_ii")
    v = e.validate()
    results.append(check("example (ii) validates in 2D", v["passed"], f"p+ = {e.p_plus:.4f}"))

    e1 = fracvexp.Exponent(dimension=2, order=0.3, q_kind="example_i")
    checks = {c["name"]: c["passed"] for c in e1.validate()["p2"]["checks"]}
    results.append(check("example (i) is not monotone at t = 1", not checks["q_nondecreasing"]))

    p = e.p([0.0, 0.0], [3.0, 4.0])
    expected = 1.0 / (1.0 + math.exp(-5.0)) + 0.5 - 1.0 / math.log(0.5)
    results.append(check("p(x, y) = Q(|x - y|)", abs(p - expected) < 1e-14, f"{p:.15f}"))
    results.append(check("kernel is symmetric", e.kernel([0.1, 0.2], [0.5, -0.3]) == e.kernel([0.5, -0.3], [0.1, 0.2])))

    one_d = fracvexp.Exponent()
    n, h = 101, 1.5
    xs = [-h + 2 * h * i / (n - 1) for i in range(n)]
    const = one_d.eval_plap([2.0] * n, h, [[0.0], [0.7]], exterior="constant:2")
    results.append(check("constants are annihilated", all(c == 0.0 for c in const), str(const)))

    bump = [max(1 - x * x, 0.0) ** 3 for x in xs]
    neg = [-b for b in bump]
    a = one_d.eval_plap(bump, h, [[0.2]])[0]
    b = one_d.eval_plap(neg, h, [[0.2]])[0]
    results.append(check("operator is odd", a == -b and a > 0, f"{a:.6e}"))

    try:
        fracvexp.Exponent(q_kind="nonsense")
        results.append(check("bad q_kind raises ValueError", False))
    except ValueError:
        results.append(check("bad q_kind raises ValueError", True))

    solve = fracvexp.manufactured_solve("[solver]\nnodes = 81\n")
    results.append(check("manufactured solve converges", solve["passed"], f"sup error {solve['final_error']:.2e}"))

    h1 = fracvexp.config_hash("seed = 1\noutput_dir = 'a'\n")
    h2 = fracvexp.config_hash("seed = 1\noutput_dir = 'b'\n")
    results.append(check("config hash ignores output_dir", h1 == h2 and h1 != fracvexp.config_hash()))

    with tempfile.TemporaryDirectory() as d:
        summary = fracvexp.reproduce_all(d, "[checks]\nnodes_2d = 61\n")
        statuses = {c["id"]: c["status"] for c in summary["criteria"]}
        failed = [k for k, s in statuses.items() if s == "fail"]
        results.append(check("reproduce_all passes", not failed, str(statuses)))
        u = fracvexp.read_sampled_csv(Path(d) / "solution.csv")
        results.append(check("solution.csv reads back", len(u["values"]) == u["nodes_per_axis"] ** u["dimension"]))

    print(f"fracvexp {fracvexp.__version__}: {sum(results)}/{len(results)} checks passed")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
