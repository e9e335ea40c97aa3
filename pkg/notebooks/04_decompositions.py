# %% [markdown]
# # Quadratic forms in the Hecke basis
#
# A quadratic form Q = sum a_ij phi_i phi_j of eigenform combinations is
# expanded in H_k, and the l^p norms of its unit-normalized coefficients are
# tracked across weights.

# %%
from cuspdecay.decomp import (
    QuadraticFormSpec,
    decompose_spec,
    lp_scan,
    second_coeff_and_bounds,
    sparsity_certificate,
)

spec = QuadraticFormSpec.from_dict({"a": [[1]], "weights": [12], "combos": [[[0, 1]]], "target_weight": 24})
dec = decompose_spec(spec, [1.0, 2.0])
print([complex(c) for c in dec.c])
print(dec.lp)

# %% [markdown]
# Delta^2 begins at q^2, so the coefficients sum to zero.  Its q^2
# coefficient and bound come straight from the spec.

# %%
print(abs(sum(complex(c) for c in dec.c)), second_coeff_and_bounds(spec))

# %% [markdown]
# The expansion is unique, so it is L-sparse exactly when at most L
# coefficients are nonzero.

# %%
for L in (1, 2):
    rep = sparsity_certificate(dec, L, 0.0)
    print(L, rep["nnz"], rep["sparse_representation_exists"], rep["witness_holds"])

# %% [markdown]
# The largest l^1 norm of a normalized square f^ f^ at each weight, next to
# the (log k)^(-1/4) reference.

# %%
for row in lp_scan(range(24, 121, 12), [1.0], "squares"):
    print(row["k"], round(row["value"], 3), round(row["ref_log4"], 3))
