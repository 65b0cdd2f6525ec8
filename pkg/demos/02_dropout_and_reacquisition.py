"""Exact filtering through a detection gap.

A single target is missed for two steps.  The filter's belief that it
still exists decays, the estimate drops it, and the next detection brings
it back under the same label.  Its l-trajectory therefore has a hole, and
splits into two track segments.

Run with ``python demos/02_dropout_and_reacquisition.py``.
"""
from lrfs.scenario import canonical_scenario, run

config = canonical_scenario("dropout")
report = run(config, keep_posteriors=True)

print(f"{'step':>4} {'Z':<8} {'P(label alive)':>15} {'estimate':<12}")
for step, post in zip(report.steps, report.posteriors):
    alive = sum(w for X, w in post.support.items() if X)
    est = ", ".join(f"{s.label}@{s.x}" for s in step.estimate) or "-"
    print(f"{step.time:>4} {str(list(step.measurements)):<8} {alive:>15.3f} {est:<12}")

(traj,) = report.trajectories
print("\nl-trajectory of", traj.label, ":", ["-" if x is None else x for x in traj.per_time])
for seg in report.segments:
    print(f"  segment from step {seg.start_time}: cells {list(seg.states)}")
