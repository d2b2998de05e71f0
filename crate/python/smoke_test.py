"""Smoke test for the casp_forge extension module.

Build with `cargo build -p casp-forge-py --release`, copy
target/release/libcasp_forge_py.so to python/casp_forge.so, then run
`python3 python/smoke_test.py`.
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import casp_forge as cf


def main():
    csp = cf.Csp()
    for name in ("x", "y", "z"):
        csp.add_variable(name, [1, 2, 3])
    csp.add_alldiff("all", ["x", "y", "z"])
    csp.add_allowed("c", ["x", "y"], [[1, 2], [2, 1]])
    assert csp.constraint_count() == 2
    assert "alldiff" in csp.to_text()

    for enc in ("direct", "support", "bound", "range"):
        sol = cf.solve(csp, encoding=enc)
        assert sol.status == "sat", (enc, sol)
        assert csp.is_solution(sol.assignment)

    # x, y take {1,2}, so z is forced to 3
    out = cf.propagate(csp, encoding="range")
    assert out["z"] == [3], out
    assert cf.enforce(csp, "domain")["z"] == [3]

    again = cf.Csp.parse(csp.to_json())
    assert again.variables() == csp.variables()

    assert "violate" in cf.encode(csp, "support")

    assert cf.solve(cf.pigeonhole(5), encoding="bound").status == "unsat"
    sol = cf.solve(cf.pigeonhole(9), encoding="support", budget_conflicts=10)
    assert sol.status == "unknown" and sol.conflicts == 10
    assert cf.solve(cf.qcp(5, 30.0, seed=2)).status in ("sat", "unsat")

    agreed, total = cf.verify("ac", 50, 3)
    assert agreed == total == 50

    try:
        csp.add_neq("bad", "x", "nope")
    except ValueError as e:
        assert "unknown variable" in str(e)
    else:
        raise AssertionError("expected ValueError")

    print("python smoke test ok")


if __name__ == "__main__":
    main()
