# %% [markdown]
# # Prime sums and moments over H_k

# %%
import math
from fractions import Fraction

from cuspdecay.hecke import hecke_basis
from cuspdecay.moments import (
    D_coeff,
    TripleContext,
    dist_report,
    gaussian_identity_check,
    hecke_relation_residual,
    lambda_power_expand_check,
    moment_2r_check,
    moment_sum,
)

# %% [markdown]
# lambda(p)^k expands in the lambda(p^l) with coefficients D_{k,l}; the
# identity is exact over the rationals.

# %%
print([D_coeff(6, l) for l in (0, 2, 4, 6)])
print(lambda_power_expand_check(12, Fraction(3, 7)))

# %% [markdown]
# The Satake triple product at p^2 factors through lambda_sym2(p).

# %%
f, g = hecke_basis(12, 1000)[0], hecke_basis(16, 1000)[0]
h = hecke_basis(28, 1000)[0]
print(hecke_relation_residual(f, g, h))

# %% [markdown]
# Distribution of P(h; x, x) over H_300 with f = Delta and g of weight 288.
# The unweighted variance sits well below sum a_p^2/p; small primes carry
# most of the gap.

# %%
k = 300
x = math.sqrt(k)
ctx = TripleContext(hecke_basis(12, 20)[0], hecke_basis(k - 12, 20)[0], hecke_basis(k, 20), x)
rep = dist_report(ctx)
print(rep.variance, rep.predicted_variance, rep.predicted_variance_smoothed)
print(rep.tail_counts)

# %% [markdown]
# Watson-surrogate moments and the upper-tail counts B(V + mu).

# %%
for row in moment_sum(1.0, [24, 36, 48], P=1000):
    print(row.k, row.dim, row.moment, row.B[:4], row.ibp_residual)

# %% [markdown]
# The even-moment check is empty at desk scale: k^(1/(10r)) < 2.

# %%
out = moment_2r_check(1, 200, 200 ** 0.1, lambda p: float(f.lam[p] * g.lam[p]))
print(out["primes"], out["ratio"])
print(gaussian_identity_check(1.0))
