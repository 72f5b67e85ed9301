"""One-shot oracle runs whose printed values get frozen into the test suite.

Run from the repo root:  python scripts/freeze_kinematics_fixtures.py
The library FK/IK is *not* consulted for expected values; comparisons against
the implementation printed here are informational only.
"""

import sys

sys.path.insert(0, "tests")

import numpy as np
from oracles import fk_oracle

from polydelta.kinematics import (
    DeltaGeometry,
    forward_kinematics,
    numeric_jacobian,
    sample_workspace,
    workspace_metrics,
)

np.set_printoptions(precision=12, suppress=False)

geom = DeltaGeometry()  # 20 / 6 / 45 / 20

print("== symmetric FK a=(10,10,10) ==")
p, res = fk_oracle(20, 6, 45, (10, 10, 10))
print("oracle point:", p, "residual:", res)
print("analytic z  :", 10 - np.sqrt(45**2 - 14**2))

print("\n== off-axis FK a=(0,0,20) ==")
p, res = fk_oracle(20, 6, 45, (0, 0, 20))
print("oracle point:", p, "residual:", res)
impl = forward_kinematics(geom, (0, 0, 20))
print("impl point  :", impl, "delta:", np.linalg.norm(impl - p))

print("\n== jacobian determinant at home (10,10,10) ==")
# independent: finite differences on the oracle FK
h = 1e-4
cols = []
for i in range(3):
    ap = np.array([10.0, 10.0, 10.0]); ap[i] += h
    am = np.array([10.0, 10.0, 10.0]); am[i] -= h
    pp, _ = fk_oracle(20, 6, 45, ap)
    pm, _ = fk_oracle(20, 6, 45, am)
    cols.append((pp - pm) / (2 * h))
J_oracle = np.stack(cols, axis=-1)
print("oracle J:\n", J_oracle)
print("oracle det:", np.linalg.det(J_oracle))
print("impl  det:", np.linalg.det(numeric_jacobian(geom, (10, 10, 10))))

print("\n== default 5x5x5 lattice reachability and metrics ==")
grid = sample_workspace(geom, (5, 5, 5))
m = workspace_metrics(grid)
print("reachable:", grid.reachable_count, "/", 125)
print("bbox min:", m.bbox_min)
print("bbox max:", m.bbox_max)
print("extents:", m.extents)
print("hull volume:", m.hull_volume)

# oracle cross-check of extreme corners via fk_oracle
for corner in [(0, 0, 0), (20, 20, 20), (0, 20, 20), (20, 0, 0), (0, 0, 20)]:
    p, res = fk_oracle(20, 6, 45, corner)
    print("corner", corner, "->", p, "res", res)

print("\n== degenerate geometry reachability ==")
# link barely longer than R: most asymmetric lattice nodes miss
degen = DeltaGeometry(base_radius=20, ee_radius=6, link_length=14.2, stroke=20)
grid_d = sample_workspace(degen, (5, 5, 5))
print("link 14.2 reachable:", grid_d.reachable_count, "/ 125")
# oracle count: sphere intersection exists iff pairwise distances <= 2L and
# the three-sphere system solves; reuse fk_oracle per node
cnt = 0
axes = np.linspace(0, 20, 5)
for a1 in axes:
    for a2 in axes:
        for a3 in axes:
            p, res = fk_oracle(20, 6, 14.2, (a1, a2, a3))
            if p is not None and res < 1e-7:
                cnt += 1
print("oracle reachable count:", cnt)

print("\n== 3x3 sweep of base radius x link length (hull volumes) ==")
from polydelta.kinematics import workspace_sweep

rec = workspace_sweep((15, 20, 25), (35, 45, 55))
for r in rec:
    print(r["base_radius"], r["link_length"], round(r["hull_volume"], 3), r["reachable_count"])
