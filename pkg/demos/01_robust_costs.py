"""Robust costs, their surrogates and the weight updates behind GNC.

Run with ``python3 demos/01_robust_costs.py``. Everything prints to stdout.
"""

# %% [markdown]
# Geman-McClure and truncated least squares both flatten out for large
# residuals. GNC replaces each with a family of surrogates indexed by mu:
# one end of the family is convex, the other is the original cost.

# %%
import numpy as np

from gnc_robust.costs import (
    gm_cost,
    penalty_tls,
    surrogate_gm,
    surrogate_tls,
    tls_cost,
    weight_update_gm,
    weight_update_tls,
)

c_bar = 1.0
r = np.linspace(0.0, 3.0, 7)
np.set_printoptions(precision=3, suppress=True)

print("residuals        ", r)
print("GM cost          ", gm_cost(r, c_bar))
print("TLS cost         ", tls_cost(r, c_bar))

# %% [markdown]
# For GM a large mu makes the surrogate nearly quadratic; mu = 1 is GM itself.

# %%
for mu in (100.0, 10.0, 1.0):
    print(f"GM surrogate mu={mu:>5}:", surrogate_gm(r, mu, c_bar))

# %% [markdown]
# For TLS the direction is reversed: small mu is close to convex and large
# mu approaches the truncated quadratic.

# %%
for mu in (0.01, 1.0, 100.0):
    print(f"TLS surrogate mu={mu:>6}:", surrogate_tls(r, mu, c_bar))

# %% [markdown]
# The weights solve ``min_w w r^2 + penalty(w)`` in closed form. A brute
# force search over w gives the same weight and the same value as the
# surrogate.

# %%
mu, residual = 1.0, 1.1
w_grid = np.linspace(0.0, 1.0, 100_001)
objective = w_grid * residual**2 + penalty_tls(w_grid, mu, c_bar)
k = int(np.argmin(objective))
print("closed-form TLS weight:", weight_update_tls(residual**2, mu, c_bar))
print("grid-search TLS weight:", w_grid[k])
print("surrogate vs grid min :", surrogate_tls(residual, mu, c_bar), objective[k])

# %%
print("GM weights as mu shrinks, r = 2:")
for mu in (8.0, 4.0, 2.0, 1.0):
    print(f"  mu={mu}: w={weight_update_gm(4.0, mu, c_bar):.4f}")
