"""Smoke test for the Python extension.

Build and run from the workspace root:

    cargo build -p quasispin-py --features extension-module
    cp target/debug/libquasispin_py.so python/quasispin.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import quasispin as qs


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b)


basis = qs.Basis(1, 3)
assert basis.dim == 10 and len(basis) == 10
assert basis.occupation(1) == [1, 0]
assert basis.index_of([2, 0]) == 3

s = qs.State.from_spec("max(p=1/2,theta=0)", m=1, n_max=3)
assert s.is_pure
amps = s.amplitudes()
close(abs(amps[1]), 1.0, 1e-15)
p0, p1, p2, n = s.polarization_means()
close(p0, 0.5, 1e-14)
close(n, 1.0, 1e-14)

again = qs.State.from_json(s.to_json())
close(again.fidelity(s), 1.0, 1e-14)

thermal = qs.State.from_spec("thermal(beta=ln2)", m=1, n_max=50)
assert not thermal.is_pure
report = thermal.squeeze_report()
assert report["unpolarized_class"] == "thermal_like", report["unpolarized_class"]
close(report["mean_n"], 2.0, 1e-10)

q = thermal.q_function("1/2", theta_nodes=6, phi_nodes=8)
for row in q["values"]:
    for v in row:
        close(v, 0.125, 1e-12)

try:
    qs.State.from_spec("semi(p=1/2,mu=1/2,theta=7)")
except ValueError as e:
    assert "theta" in str(e)
else:
    raise AssertionError("bad theta accepted")

r = qs.geometric_phase("semi(p=1/2,mu=1/2)", "circle:theta=1.5707963", n_max=1)
assert r["converged"]
close(r["gamma_total"], -math.pi, 1e-5)

v = qs.verify(m=1, n_max=8, seed=3)
assert v["passed"], json.dumps([c for c in v["checks"] if not c["passed"]])

print(f"smoke test OK ({len(v['checks'])} verify checks passed)")
