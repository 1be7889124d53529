# %% [markdown]
# # FG% posteriors and FGA-per-36 surfaces
#
# FG% is region-constant: each region gets a Beta posterior.  The empirical
# backend adds one make and five attempts to every region.

# %%
import numpy as np

from shotalloc import GRID, broad3, empirical12
from shotalloc.ingest import LineupDataset, ShotEvent
from shotalloc.surfaces import (estimate_fga, estimate_fgp_empirical, estimate_fgp_shrunk,
                                league_region_rates)


def shots(player, loc, makes, attempts):
    return [ShotEvent("G", player, "T", 1, 600, loc[0], loc[1], i < makes)
            for i in range(attempts)]


part = empirical12()
rim = shots("love", (0, 0), 8, 26)
post = estimate_fgp_empirical("love", rim, part, draws=500, seed=1)
cell = GRID.cell_of(*GRID.hoop_position)
print("rim estimate", post.mean[cell], "= 9/31 =", 9 / 31)
print("untouched region", post.mean[GRID.cell_of(25.5, 40.5)])
print("draw sd at rim", post.draws[:, cell].std().round(4))

# %% [markdown]
# The shrunk backend pulls each region toward the league rate with a
# pseudo-attempt weight ``concentration``.

# %%
league = shots("x", (0, 0), 60, 100) + shots("x", (0, 280), 35, 100)
rates = league_region_rates(league, broad3())
print(dict(zip(broad3().regions, rates.round(3))))
for kappa in (1, 10, 100):
    p = estimate_fgp_shrunk("love", rim, rates, broad3(), concentration=kappa, draws=1)
    print(f"kappa={kappa:>3}: rim {p.mean[cell]:.4f}")

# %% [markdown]
# FGA surfaces: bin, smooth with a Gaussian kernel that stays on the court,
# rescale to the raw count, then convert to attempts per 36 minutes.

# %%
rng = np.random.default_rng(0)
xs, ys = rng.normal(0, 40, 60).astype(int), rng.normal(60, 40, 60).astype(int)
lineup = LineupDataset("T", ("a", "b", "c", "d", "e"), 240.0,
                       [ShotEvent("G", "a", "T", 1, 600, int(x), int(y), False)
                        for x, y in zip(xs, ys)])
for h in (0, 1, 3, 5):
    f = estimate_fga(lineup, "a", bandwidth=h)
    print(f"h={h}: raw {f.raw_count}, per36 total {f.per36.sum():.6f}, "
          f"peak {f.per36.max():.4f}")
