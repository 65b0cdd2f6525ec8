"""Units of trajectory intensities, and where peak picking breaks.

Run with ``python demos/04_trajectory_intensity_units.py``.
"""
import numpy as np

from lrfs import fixtures
from lrfs.errors import IncommensurableError
from lrfs.tphd_lab import (
    GmTphdComponent,
    UnitTaggedValue,
    compare_densities,
    gm_tphd_build,
    gm_tphd_estimate,
    poisson_sot_density,
    trajectory_integral,
)
from lrfs.trajectory_repr import is_physically_consistent

pts = np.arange(-7.0, 9.0, 0.25)
same = [
    GmTphdComponent(0.6, 0, [[0.0], [1.0]], np.eye(2)),
    GmTphdComponent(0.4, 1, [[2.0], [2.5]], np.eye(2)),
]
D = gm_tphd_build(same, pts, n_bar=2.0)
print("Two length-2 components, N = 2: integral =", round(trajectory_integral(D), 6))
print("Estimate:", sorted((t.start_time, t.states) for t in gm_tphd_estimate(same, 2.0)))

mixed = same + [GmTphdComponent(0.9, 0, [[0.0], [1.0], [2.0]], np.eye(3))]
print("\nAdd a length-3 component:")
print(" ", gm_tphd_build(mixed, pts))
try:
    gm_tphd_estimate(mixed, 2.0)
except IncommensurableError as exc:
    print("  estimate refused:", exc)

print("\nA value in iota^-2 and a value in iota^-3:")
try:
    compare_densities(UnitTaggedValue(0.6, 2), UnitTaggedValue(0.9, 3))
except IncommensurableError as exc:
    print(" ", exc)

value = poisson_sot_density(fixtures.poisson_sot_model(), fixtures.T01)
print("\nA Poisson process on trajectories gives the impossible set T01 density", f"{value:.3e}")
print("while the consistency check says:", is_physically_consistent(fixtures.T01).codes)
