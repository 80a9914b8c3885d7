# %% [markdown]
# # How often does offline checking have to redo work?
#
# With per-block error probability `gamma0` over `B` blocks, a whole run is
# hit with probability `g = 1 - (1 - gamma0)**B`. Online correction needs one
# run regardless. Offline restarts need `(1 - g) / (1 - 2 g)` on average.

# %%
from ftgemm.costmodel import cost_model, monte_carlo
from ftgemm.errors import GammaTooLarge
from ftgemm.select import DEFAULT_CATALOG, ShapeClass

p = DEFAULT_CATALOG[ShapeClass.HUGE]
for n in (512, 1024, 1536, 2048):
    try:
        r = cost_model(1 / 256, n, n, p)
    except GammaTooLarge as exc:
        print(f"n={n:5d} {exc}")
        continue
    print(f"n={n:5d} blocks={r.blocks:4d} gamma={r.gamma:.4f} offline runs={r.offline_expected_runs:.3f}")

# %% [markdown]
# The closed form against simulation.

# %%
for g in (0.05, 0.2, 0.4):
    mc = monte_carlo(g, 20_000, seed=1)
    print(f"gamma={g}: simulated {mc.empirical_mean:.4f}, closed form {mc.closed_form:.4f}")
