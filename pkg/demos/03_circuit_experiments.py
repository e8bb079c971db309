"""Simulate the six measurement-reversal circuit experiments.

Experiments 1-4 prepare a single qubit (|+> or |+_Y>), optionally measure
Pauli Z, always measure Pauli X, then run the recovery operation and do
Bloch tomography on the recovered qubit.  Experiments 5-6 do the same on
half of a Bell pair and finish with two-qubit correlation measurements.
Every measurement setting is sampled 8192 times.
"""

from eurqsi import NoiseSpec, run_experiment
from eurqsi.linalg import fidelity

SHOTS = 8192

descriptions = {
    1: "prepare |+>, measure X, recover          -> ideal |+>",
    2: "prepare |+>, measure Z then X, recover   -> ideal maximally mixed",
    3: "prepare |+_Y>, measure X, recover        -> ideal maximally mixed",
    4: "prepare |+_Y>, measure Z then X, recover -> ideal maximally mixed",
    5: "Bell pair, measure X on A, recover       -> ideal Bell pair",
    6: "Bell pair, measure Z then X, recover     -> ideal classically correlated",
}

for exp_id in range(1, 7):
    res = run_experiment(exp_id, shots=SHOTS, seed=exp_id)
    print(f"experiment {exp_id}: {descriptions[exp_id]}")
    if res.bloch_estimate is not None:
        x, y, z = res.bloch_estimate
        print(f"  Bloch estimate ({x:+.4f}, {y:+.4f}, {z:+.4f}), "
              f"ideal {tuple(round(v, 1) for v in res.bloch_ideal)}")
    else:
        for name, table in res.tables.items():
            freqs = {o: f"{table.frequency(o):.3f}" for o in ("00", "01", "10", "11")}
            print(f"  {name:3s} frequencies {freqs} "
                  f"(stderr ~ {table.stderr('00'):.4f})")
    print()

# The hardware runs behind these protocols are noisy in ways that depend on
# unpublished calibration data, so exact noisy bars cannot be reproduced.
# The simulator instead exposes a tunable model: depolarizing after every
# gate plus classical readout flips.
print("noise sweep on experiment 1 (gate depolarizing strength):")
print(f"  {'p':>5s}  {'fidelity of recovered qubit to |+>':>36s}")
for p in (0.0, 0.02, 0.05, 0.1, 0.2):
    res = run_experiment(1, shots=SHOTS, noise=NoiseSpec(depolarizing_p=p), seed=41)
    f = fidelity(res.final_state.matrix, res.ideal_state.matrix)
    bar = "#" * int(round(40 * f))
    print(f"  {p:5.2f}  {f:8.4f}  {bar}")

print("\nreadout flips smear the sharp Bell correlations of experiment 5:")
for q in (0.0, 0.05, 0.15):
    res = run_experiment(5, shots=SHOTS, noise=NoiseSpec(readout_flip=q), seed=42)
    zz = res.tables["ZZ"]
    print(f"  readout_flip={q:.2f}  ZZ table "
          f"{{00: {zz.frequency('00'):.3f}, 01: {zz.frequency('01'):.3f}, "
          f"10: {zz.frequency('10'):.3f}, 11: {zz.frequency('11'):.3f}}}")
