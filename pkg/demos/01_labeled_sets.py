"""Labeled sets, LMB densities, and a Poisson process that is not labeled.

Run with ``python demos/01_labeled_sets.py``.
"""
import numpy as np

from lrfs.distributions import (
    IntensityFunction,
    LmbParams,
    cardinality_pmf,
    labeled_poisson_density,
    lmb_density,
    lmb_normalization,
    lmb_sample,
)
from lrfs.state_model import Label, is_labeled

a, b = Label(0, 1), Label(0, 2)

print("Two targets may share a position as long as their labels differ:")
print("  is_labeled({(x, 0:1), (x, 0:2)}) =", is_labeled([((1.0,), a), ((1.0,), b)]))
print("One label may not sit in two places at once:")
print("  is_labeled({(x, 0:1), (y, 0:1)}) =", is_labeled([((1.0,), a), ((2.0,), a)]))

params = LmbParams({a: 0.6, b: 0.3}, {a: [0.7, 0.2, 0.1], b: [0.0, 0.5, 0.5]})
print("\nAn LMB density with two labels on three cells")
print("  f({})               =", round(lmb_density(params, set()), 6))
print("  f({(0, 0:1)})       =", round(lmb_density(params, {(0, a)}), 6))
print("  f({(0,0:1),(1,0:1)})=", lmb_density(params, {(0, a), (1, a)}), "(repeated label)")
print("  total mass          =", lmb_normalization(params))
print("  cardinality PMF     =", np.round(cardinality_pmf(params).p, 6))

rng = np.random.default_rng(0)
print("\nFive draws:")
for _ in range(5):
    print("  ", lmb_sample(params, rng))

D = IntensityFunction({(0, a): 0.4, (2, a): 0.4})
Y = {(0, a), (2, a)}
print("\nA Poisson process on (cell, label) pairs puts mass on sets like", sorted((c, str(l)) for c, l in Y))
print("  density =", round(labeled_poisson_density(D, Y), 6), "  labeled:", is_labeled(Y))
print("so its realizations are not always labeled sets.")
