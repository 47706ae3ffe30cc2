"""
How tight are the rewriting bounds?
===================================

Every structural model consistent with the data is a distribution over
(response type, natural treatment). Optimizing the benefit over that set
gives the tightest possible interval. This script compares it with the
rewriting search on a handful of random populations.
"""

import numpy as np

from unitselect import BenefitFunction, Oracle, bound_benefit
from unitselect.sim import real_benefit, sample_consistent

rng = np.random.default_rng(0)
vector = (0, 1, 1, -1, 0, 1, -1, -1, 0)
f = BenefitFunction.from_vector(2, 3, vector)

# sample_consistent draws the joint over (type, treatment) first, so the
# tables it returns are always compatible with the true fractions.
for k in range(5):
    fractions, exp, obs = sample_consistent(rng, 2, 3, grid=2**16)
    search = bound_benefit(f, exp, obs).interval
    lp = Oracle(exp, obs).benefit(f)
    truth = real_benefit(fractions, vector)
    print(f"population {k}: search {search.format()}  LP {lp.format()}  "
          f"tight={search == lp}  truth {float(truth):+.3f} inside={search.contains(truth)}")

###############################################################################
# Larger arities work the same way. With three treatments and two outcomes
# there are eight response types and 24 LP variables.

fractions, exp, obs = sample_consistent(rng, 3, 2, grid=2**16)
g = BenefitFunction.from_vector(3, 2, (1, 0, 0, -1, 2, 0, 0, 1))
print("m=3 search", bound_benefit(g, exp, obs).interval.format(), "LP", Oracle(exp, obs).benefit(g).format())
