# %% [markdown]
# # Cusp spaces and Hecke eigenbases

# %%
from cuspdecay.hecke import hecke_basis, hecke_matrix
from cuspdecay.space import cusp_space, dim_cusp, miller_basis

print([(k, dim_cusp(k)) for k in range(12, 61, 2)])

# %% [markdown]
# The Miller basis is in echelon form: row i starts q^(i+1) + O(q^dim+1).

# %%
s = miller_basis(48, 8)
for row in s.rows:
    print(row)

# %% [markdown]
# Hecke matrices act on Miller coordinates with exact integer entries.
# They commute, and T6 = T2 T3.

# %%
space = cusp_space(48, 40)
T2, T3, T6 = (hecke_matrix(space, n) for n in (2, 3, 6))
print((T2 @ T3 - T3 @ T2).is_zero(), (T2 @ T3 - T6).is_zero())

# %% [markdown]
# Eigenforms come from the exact characteristic polynomial of T2, with
# certified root isolation and high-precision eigenvectors.  At weight 24
# the eigenvalues are 540 +- 12 sqrt(144169).

# %%
for h in hecke_basis(24, 40):
    print(h.index, h.a[2], h.residual)

# %% [markdown]
# Normalized eigenvalues respect Deligne's bound.

# %%
H = hecke_basis(96, 300)
print(max(abs(h.lam[p]) for h in H for p in H[0].primes(293)))
print([h.deligne_violations(293) for h in H])
