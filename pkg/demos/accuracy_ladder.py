"""Grid-refinement ladder: L1 errors of c and b b against a fine direct run.

A small version of the accuracy study (Wi = 2, t = 4, reference N = 128),
which takes a couple of minutes on one core.

    python3 demos/accuracy_ladder.py
"""

from vefs import harness

spec = harness.ExperimentSpec("accuracy", Wi=(2.0,), Ns=(16, 32, 64), N_ref=128, t_end=4.0)
rows = harness.run_accuracy(spec)

print(f"{'N':>4} {'formulation':>12} {'L1 rel error':>14} {'improvement':>12}")
for r in rows:
    print(f"{r.N:4d} {r.formulation:>12} {r.l1_rel_error:14.4e} {r.improvement:12.3f}")

print()
print(harness.summary_markdown("accuracy", rows))
