"""Ordering a population does not change it; tuple distance disagrees.

Run with ``python demos/05_tuples_versus_sets.py``.
"""
import itertools

from lrfs.metrics import tuple_representation_demo
from lrfs.state_model import Label, LabeledState

pop = [LabeledState((float(x), float(y)), Label(0, j + 1), 0) for j, (x, y) in enumerate([(0, 0), (3, 1), (1, 4)])]
print(f"{'ordering':<12} {'tuple distance':>15} {'set distance':>13}")
for perm in itertools.permutations(range(3)):
    r = tuple_representation_demo(pop, perm)
    print(f"{str(perm):<12} {r.tuple_distance:>15.3f} {r.set_distance:>13.3f}")
