import io
import textwrap

import pytest

from shotalloc.ingest import PBP_COLUMNS, SHOT_COLUMNS

HOME = ["H1", "H2", "H3", "H4", "H5"]
AWAY = ["A1", "A2", "A3", "A4", "A5"]


def pbp_csv(rows):
    lines = [",".join(PBP_COLUMNS)]
    for r in rows:
        lines.append(",".join(str(x) for x in r))
    return io.StringIO("\n".join(lines) + "\n")


def presence(game, period, num_start=1, players=None):
    """One event per on-court player at the start of ``period``."""
    rows = []
    plist = players or [(p, "HOM") for p in HOME] + [(p, "AWY") for p in AWAY]
    for i, (p, team) in enumerate(plist):
        rows.append([game, num_start + i, period, 720, 4, p, "", team, "rebound"])
    return rows


@pytest.fixture
def one_sub_game():
    """Play-by-play: H5 -> H6 for HOM at period 2, 6:00 (360 s left)."""
    rows = presence("G1", 1)
    rows.append(["G1", 20, 2, 360, 8, "H5", "H6", "HOM", "SUB H6 FOR H5"])
    rows.append(["G1", 21, 2, 300, 1, "H6", "", "HOM", "made"])
    return pbp_csv(rows)


@pytest.fixture
def no_sub_game():
    return pbp_csv(presence("G1", 1))


def shots_csv(rows):
    buf = io.StringIO()
    buf.write(",".join(SHOT_COLUMNS) + "\n")
    for r in rows:
        buf.write(",".join(str(x) for x in r) + "\n")
    buf.seek(0)
    return buf


@pytest.fixture
def shots_fixture():
    return textwrap.dedent("""\
        game_id,player_id,player_name,team_id,period,clock_seconds,loc_x_tenths_ft,loc_y_tenths_ft,shot_made,shot_value
        G1,H1,Home One,HOM,1,700,0,0,1,2
        G1,H2,Home Two,HOM,2,400.5,-220,30,0,3
        G1,A1,Away One,AWY,4,12,15,250,1,
        """)
