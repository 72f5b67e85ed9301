"""Assembling fingers into a hand and coupling rails into synergies.

A hand is N delta fingers on a ring.  A coupling topology gangs selected
rails together so one motor drives several of them; the expansion matrix C
maps reduced actuation to all 3N rails and the projection P = (C^T C)^-1 C^T
averages full actuation back into the reduced space.  Fewer actuators cost
dexterity but buy weight, price, and — as demo 03 shows — denser sampling
of useful grasps.
"""

import numpy as np

from polydelta import (
    InvalidTopologyError,
    CouplingTopology,
    build_synergy,
    hand_fk,
    hand_ik,
    hand_workspace,
    identity_topology,
    preset_topology,
    standard_hand,
    validate_topology,
)

params = standard_hand(4)
print(f"hand: {params.n_fingers} fingers at {np.degrees(params.fingertip_angle):.0f} deg spacing, "
      f"coupling radius {params.coupling_link_length} mm")

# --- the three stock couplings -------------------------------------------
for name in ("12", "9", "5"):
    topo = preset_topology(params, name)
    syn = build_synergy(params, topo)
    ok = np.allclose(syn.projection @ syn.expansion, np.eye(syn.n_reduced), atol=1e-12)
    print(f"preset {name:>2}: {syn.n_reduced:>2} actuators drive 12 rails, P·C = I: {ok}")

# --- what coupling means physically ---------------------------------------
# In the 9-actuator hand the four inner rails share actuator 0.  Pushing only
# that actuator moves every finger, identically.
topo9 = preset_topology(params, "9")
syn9 = build_synergy(params, topo9)
home = np.full(9, 10.0)
poked = home.copy()
poked[0] += 5.0
tips_home = hand_fk(params, topo9, home)
tips_poked = hand_fk(params, topo9, poked)
motion = np.linalg.norm(tips_poked - tips_home, axis=1)
print(f"\n+5 mm on the shared ring actuator moves all four tips: {np.round(motion, 3)} mm each")

expanded = syn9.expansion @ poked
print(f"expanded rail actuation (note rails 0,3,6,9 move together): {expanded}")

# --- reduced-space IK ------------------------------------------------------
# Feasible targets (generated by FK of a reduced vector) are recovered
# exactly; infeasible ones (demanding unequal values on coupled rails) get a
# least-squares compromise with an honest residual.
targets = hand_fk(params, topo9, home)
sol = hand_ik(params, topo9, targets)
print(f"\nIK on feasible targets: residual {np.max(sol.residuals):.2e} mm (exact)")

one_in = targets.copy()
one_in[0, :2] *= 0.85  # pull finger 0 inward; its inner rail is shared
sol = hand_ik(params, topo9, one_in)
print(f"IK on conflicting targets: residual per finger {np.round(sol.residuals, 3)} mm")

# --- custom topologies are validated, not trusted --------------------------
try:
    validate_topology(params, CouplingTopology(n_reduced=11, link_to_actuator=(0, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10)))
except InvalidTopologyError as exc:
    print(f"\nasymmetric coupling rejected: {exc}")

# --- hand workspace ---------------------------------------------------------
ws = hand_workspace(params, identity_topology(4), grid_per_axis=7, compute_overlap=False)
print(f"\nhand workspace bbox extents: {np.round(ws.extents, 1)} mm")

# Straight-down fingertips at 90 deg spacing never meet; bend each tip 5 mm
# inward (the physical fingertips are pre-bent) and neighbouring fingertip
# workspaces share a small region.
bent = standard_hand(4, fingertip_offset=tuple((5.0, 0.0, -15.0) for _ in range(4)))
ws_bent = hand_workspace(bent, preset_topology(bent, "9"), grid_per_axis=5, compute_overlap=True)
pairs = {k: round(v, 1) for k, v in ws_bent.overlap.items() if v > 0}
print(f"with 5 mm pre-bent tips, neighbour overlaps (mm^3): {pairs if pairs else 'none'}")
