"""One linear-delta finger, end to end.

Three vertical rails on a circle of radius ``base_radius``; each carriage
connects through a rigid link of length ``link_length`` to a platform of
radius ``ee_radius``.  Sliding the carriages up and down moves the platform.
This demo walks the closed-form kinematics, the round-trip guarantee, the
Jacobian, and the reachable workspace of a single finger.
"""

import numpy as np

from polydelta import (
    DeltaGeometry,
    UnreachableError,
    forward_kinematics,
    inverse_kinematics,
    numeric_jacobian,
    sample_workspace,
    workspace_metrics,
    workspace_sweep,
)

geom = DeltaGeometry()  # 20 mm base, 6 mm platform, 45 mm links, 20 mm stroke
print("geometry:", geom.to_dict())

# --- forward kinematics -------------------------------------------------
# Equal actuation is the easy case to reason about: by symmetry the platform
# sits on the rail axis, a link-length-limited distance below the carriages.
tip = forward_kinematics(geom, (10.0, 10.0, 10.0))
print(f"\nFK(10,10,10)      = {np.round(tip, 3)}  (on-axis, analytic z = a - sqrt(L^2 - R^2))")

tilted = forward_kinematics(geom, (0.0, 10.0, 20.0))
print(f"FK(0,10,20)       = {np.round(tilted, 3)}  (unequal actuation tilts the tip off-axis)")

# --- inverse kinematics and the round trip ------------------------------
a, in_bounds = inverse_kinematics(geom, tilted)
print(f"IK of that point  = {np.round(a, 12)}, in_bounds={in_bounds}")

rng = np.random.default_rng(0)
acts = rng.uniform(0.0, geom.stroke, size=(5000, 3))
back, _ = inverse_kinematics(geom, forward_kinematics(geom, acts))
print(f"round trip over 5000 random actuations: max error {np.abs(back - acts).max():.3e} mm")

# Points outside the reachable set raise a typed error instead of lying.
try:
    inverse_kinematics(geom, (200.0, 0.0, 0.0))
except UnreachableError as exc:
    print(f"IK(200,0,0) correctly refuses: {exc}")

# --- Jacobian ------------------------------------------------------------
# Equal actuation moves the platform straight down/up: the Jacobian rows sum
# to the vertical unit vector.
J = numeric_jacobian(geom, (10.0, 10.0, 10.0))
print(f"\nJ @ (1,1,1) = {np.round(J @ np.ones(3), 9)}  (common-mode motion is pure z)")
print(f"det J at home = {np.linalg.det(J):.6f}")

# --- workspace -----------------------------------------------------------
grid = sample_workspace(geom, (9, 9, 9))
metrics = workspace_metrics(grid)
print(f"\n9x9x9 lattice: {grid.reachable_count}/{grid.actuations.shape[0]} reachable")
print(f"bbox extents  = {np.round(metrics.extents, 3)} mm")
print(f"hull volume   = {metrics.hull_volume:.0f} mm^3")

# --- how geometry trades workspace --------------------------------------
# Longer links grow the workspace; a wider base shrinks it.  The sweep
# below prints hull volume across a small design grid.
print("\nhull volume (mm^3) across the design sweep:")
rows = workspace_sweep((15.0, 20.0, 25.0), (35.0, 45.0, 55.0), grid_shape=(6, 6, 6))
header = "base\\link " + "".join(f"{dl:>10.0f}" for dl in (35.0, 45.0, 55.0))
print(header)
for db in (15.0, 20.0, 25.0):
    vols = [r["hull_volume"] for r in rows if r["base_radius"] == db]
    print(f"{db:>9.0f} " + "".join(f"{v:>10.0f}" for v in vols))
