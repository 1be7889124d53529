# %% [markdown]
# # The court grid and stint reconstruction
#
# Shots live on a 50 x 47 grid of one-foot cells.  Source coordinates are
# tenths of a foot measured from the hoop.

# %%
import io

import numpy as np

from shotalloc import GRID, broad3, empirical12, point_values
from shotalloc.court import from_source_coords
from shotalloc.ingest import build_stints, join_shots, parse_pbp, parse_shots

x, y = from_source_coords(-230, 30)           # a left-corner three
k = GRID.cell_of(x, y)
print("cell", k, "col/row", GRID.col_row(k), "worth", point_values()[k])

# %%
values = point_values().reshape(GRID.shape)
print("three-point cells:", int((values == 3).sum()), "of", GRID.n_cells)
for part in (broad3(), empirical12()):
    sizes = np.bincount(part.region_of_cell, minlength=part.n_regions)
    print(part.name, dict(zip(part.regions, sizes.tolist())))

# %% [markdown]
# A tiny game: the home team swaps H5 for H6 with six minutes left in the
# second quarter.  Nobody else records an event, so every starter is
# inferred from the period-start presence rows.

# %%
rows = ["game_id,event_num,period,clock_seconds,event_type,player1_id,player2_id,team_id,description"]
n = 0
for team, ps in (("HOM", "H1 H2 H3 H4 H5"), ("AWY", "A1 A2 A3 A4 A5")):
    for p in ps.split():
        n += 1
        rows.append(f"G1,{n},1,720,4,{p},,{team},rebound")
rows.append("G1,20,2,360,8,H5,H6,HOM,SUB H6 FOR H5")
built = build_stints(parse_pbp(io.StringIO("\n".join(rows) + "\n")))
for s in built.stints:
    print(s.team_id, s.players, f"{s.minutes:.1f} min")

# %%
shots = parse_shots(io.StringIO(
    "game_id,player_id,player_name,team_id,period,clock_seconds,"
    "loc_x_tenths_ft,loc_y_tenths_ft,shot_made,shot_value\n"
    "G1,H5,,HOM,1,500,0,10,1,2\n"
    "G1,H6,,HOM,2,360,-220,30,0,3\n"     # exactly at the substitution
    "G1,A1,,AWY,4,0,15,250,1,3\n"))      # final buzzer
joined = join_shots(shots, built.stints)
print(joined.diagnostics)
for ds in joined.lineups:
    print(ds.team_id, ds.players, [s.player_id for s in ds.shots])
