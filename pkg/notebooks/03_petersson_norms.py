# %% [markdown]
# # Petersson norms and symmetric-square L-values
#
# Two independent routes: direct quadrature over the fundamental domain, and
# L(1, sym^2 h) through a truncated Euler product.

# %%
from cuspdecay.analytic import (
    gamma_factor_constant,
    petersson_delta_check,
    petersson_norm_quadrature,
    petersson_norm_sym2,
    sym2_L_at_1,
)
from cuspdecay.exactq import delta
from cuspdecay.hecke import hecke_basis

res = petersson_norm_quadrature(delta(60))
print(res.value, res.method, res.est_error)

# %% [markdown]
# The Euler product converges slowly; the error shrinks roughly like 1/P.

# %%
h = hecke_basis(12, 10000)[0]
exact = res.value / gamma_factor_constant(12)
for P in (1000, 10000):
    L = sym2_L_at_1(h, P)
    print(P, float(L.value), float(abs(L.value - exact) / exact))

# %% [markdown]
# Both routes agree at moderate weight.

# %%
for g in hecke_basis(36, 2000):
    q = petersson_norm_quadrature(g.series(), eigen=True).value
    print(g.index, float(petersson_norm_sym2(g, 2000).value / q))

# %% [markdown]
# The harmonic average of lambda(m) lambda(n) over H_k approximates delta_{m=n}.

# %%
B = hecke_basis(200, 2000)
for m, n in [(1, 1), (1, 2), (2, 2)]:
    print(m, n, petersson_delta_check(200, m, n, basis=B, P=2000, strict=False))
