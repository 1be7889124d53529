# %% [markdown]
# # Ranks, lineup points lost and player contributions
#
# In one cell the best shooter should take the most shots.  LPL measures the
# expected points left on the table by the observed allocation.

# %%
import numpy as np

from shotalloc import GRID, lineup_metrics, lpl_cell, plc_cell, rank_vector, reallocate
from shotalloc.surfaces import FgaSurface, FgPctPosterior
from shotalloc.synth import oracle_lpl

xi = np.array([0.40, 0.38, 0.35, 0.30, 0.25])
a = np.array([4.0, 3.0, 9.0, 2.0, 1.0])
a_star = reallocate(xi, a)
lpl = lpl_cell(3, xi, a)
print("ranks by FG%", rank_vector(xi), "ranks by FGA", rank_vector(a))
print("A* =", a_star, " LPL =", round(float(lpl), 12), " oracle =", round(oracle_lpl(3, xi, a), 12))
print("PLC =", plc_cell(lpl, a, a_star).round(12))

# %% [markdown]
# Over a whole lineup, FG% uncertainty enters through posterior draws: each
# draw is re-ranked and re-reallocated, giving a distribution of total LPL.

# %%
rng = np.random.default_rng(3)
m = GRID.n_cells
players = [f"p{j}" for j in range(5)]
d = GRID.hoop_distance()
posts = []
for j, p in enumerate(players):
    base = 1 / (1 + np.exp(-(0.6 - 0.15 * j - 0.045 * d)))
    draws = np.clip(base + rng.normal(0, 0.03, (200, m)), 0.01, 0.99)
    posts.append(FgPctPosterior.from_draws(p, draws))
volume = np.exp(-d / 8)
fga = [FgaSurface("T", tuple(players), p, volume * rng.gamma(2, 0.5, m), 0, 100.0)
       for p in players]
ms = lineup_metrics(posts, fga)
print("total LPL per 36:", round(ms.total_lpl, 3))
print("draw distribution: mean %.3f, 10%%-90%% (%.3f, %.3f)" % (
    ms.lpl_draws.mean(), *np.quantile(ms.lpl_draws, [0.1, 0.9])))
print("rank correspondence range", ms.rank_correspondence.min(), ms.rank_correspondence.max())
print("PLC per player (sum over cells):", ms.plc.sum(axis=1).round(3))
