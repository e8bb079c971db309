"""Walk through the four worked examples of the refined uncertainty relation.

For each example state we measure Pauli X or Z on system A, evaluate both
sides of the original bipartite relation

    H(Z|B) + H(X|B) >= -log2(c) + H(A|B)

and of its refinement, which adds -log2(f) on the right with
f = F(rho_AB, R(sigma_XB)) the fidelity achieved by the recovery channel R
that tries to undo the X measurement.
"""

import numpy as np

from eurqsi import check_bipartite
from eurqsi.gallery import CASE_IDS, build

for case_id in CASE_IDS:
    case = build(case_id)
    report = check_bipartite(case.rho_ab, case.x_pvm, case.z_pvm)

    print("=" * 64)
    print(f"example: {case_id}")
    print("=" * 64)
    print(report.table())

    # what the refinement buys: distance from saturation before and after
    print(f"\noriginal relation slack : {report.slack_original:+.6f} bits")
    print(f"refined relation slack  : {report.slack_refined:+.6f} bits")
    if report.slack_original > 1e-6 and abs(report.slack_refined) < 1e-6:
        print("-> the reversibility term accounts for the entire gap:")
        print(f"   -log2(f) = {-np.log2(report.f):.6f} bits of measurement disturbance")
    elif abs(report.slack_original) < 1e-6:
        print("-> the original relation is already tight; recovery is perfect (f = 1)")
    print()

print("The maximum-uncertainty example is the interesting one: measuring a")
print("sigma_Y eigenstate with either X or Z gives a full bit of uncertainty,")
print("yet the state is pure. The refined relation attributes that extra bit")
print("to the irreversibility of the X measurement: f = 1/2.")
