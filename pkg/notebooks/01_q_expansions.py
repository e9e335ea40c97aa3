# %% [markdown]
# # Exact q-expansions
#
# E4, E6 and Delta as exact integer series, and the products that build
# every other level-one form.

# %%
from fractions import Fraction

from cuspdecay.exactq import QSeries, delta, eisenstein, series_linear

N = 12
E4, E6, D = eisenstein(4, N), eisenstein(6, N), delta(N)
print("E4   ", [int(c) for c in E4.coeffs])
print("E6   ", [int(c) for c in E6.coeffs])
print("Delta", [int(c) for c in D.coeffs])

# %% [markdown]
# Delta is (E4^3 - E6^2)/1728; the identity holds coefficient by coefficient.

# %%
print((E4 ** 3 - E6 ** 2).equals(series_linear([(1728, D)])))

# %% [markdown]
# tau is multiplicative on coprime arguments and obeys the Hecke recurrence
# at prime powers.  Long products go through a Kronecker substitution, so a
# few thousand terms are cheap.

# %%
big = delta(2000)
print(big[6] == big[2] * big[3], big[1999] != 0)
print(big[8] == big[2] * big[4] - 2 ** 11 * big[2])

# %% [markdown]
# Rational combinations stay exact and serialize losslessly.

# %%
s = series_linear([(Fraction(1, 3), D), (Fraction(-2, 7), D * E4 ** 0)])
print(s.coeffs[:4])
print(QSeries.from_json(s.to_json()).equals(s))
