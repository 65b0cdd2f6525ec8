"""What is lost when labels are stripped from trajectories.

Run with ``python demos/03_trajectory_sets.py``.
"""
from lrfs import fixtures
from lrfs.trajectory_repr import (
    count_interpretations,
    enumerate_interpretations,
    is_physically_consistent,
    physical_support,
    strip_labels,
)

print("CE1  two labeled segments with the same kinematics")
print("     labeled:", len(fixtures.L_SHARED), "segments -> unlabeled:", len(strip_labels(fixtures.L_SHARED)), "trajectory")

print("\nCE2  one path written whole, and as three one-step pieces")
print("     equal as sets of trajectories:", fixtures.T0 == fixtures.T1)
print("     equal physical support:       ", physical_support(fixtures.T0) == physical_support(fixtures.T1))

print("\nCE3  one state at one time with two different futures")
check = is_physically_consistent(fixtures.T2)
for code, detail in check.diagnostics:
    print(f"     {code}: {detail}")

print("\nCE4  two five-step tracks with a five-step gap between them")
print("     readings:", count_interpretations(fixtures.T3))
for reading in enumerate_interpretations(fixtures.T3):
    labels = sorted({str(s.label) for s in reading})
    kind = "one target, dropped and reacquired" if len(labels) == 1 else "two targets in succession"
    print(f"     {kind}: labels {labels}")

print("\nBoth pieces of the whole-plus-sliced set at once:")
for code, detail in is_physically_consistent(fixtures.T01).diagnostics:
    print(f"     {code}: {detail}")
