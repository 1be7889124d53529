import json
import re
import subprocess
import sys

import numpy as np
import pytest
from conftest import presence

from shotalloc import io as sio
from shotalloc.cli import main
from shotalloc.court import GRID
from shotalloc.ingest import PBP_COLUMNS, SHOT_COLUMNS

XI = [0.40, 0.38, 0.35, 0.30, 0.25]
A = [4.0, 3.0, 9.0, 2.0, 1.0]
TOY = ("P1", "P2", "P3", "P4", "P5")


def run(*argv):
    return main([str(a) for a in argv])


def write_csv(path, header, rows):
    path.write_text(",".join(header) + "\n" + "".join(
        ",".join(map(str, r)) + "\n" for r in rows))
    return path


def toy_surface_dir(root, xi=XI, fga=A):
    """Hand-made lineup directory with a single active 3-point cell."""
    cell = GRID.cell_of(25.5, 30.5)
    d = root / "toy"
    sio.write_json(d / "lineup.json", {"team_id": "T", "players": list(TOY),
                                       "total_minutes": 36.0})
    for p, x, a in zip(TOY, xi, fga):
        sio.write_surface(d / f"fgp_mean_{p}.json", "fgp_mean", np.full(GRID.n_cells, x), p, TOY)
        per36 = np.zeros(GRID.n_cells)
        per36[cell] = a
        sio.write_surface(d / f"fga_per36_{p}.json", "fga_per36", per36, p, TOY)
    return d


@pytest.fixture(scope="module")
def season(tmp_path_factory):
    """Synthetic season ingested once and shared by the pipeline tests."""
    root = tmp_path_factory.mktemp("season")
    assert run("synth", "--out", root / "raw", "--seed", 3, "--shots", 300,
               "--policy", "random") == 0
    assert run("ingest", "--shots-file", root / "raw/shots.csv",
               "--pbp-file", root / "raw/pbp.csv", "--out", root / "data") == 0
    return root


# --------------------------------------------------------------- usage / IO

def test_usage_error_exits_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_missing_file_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    code = run("ingest", "--shots-file", missing, "--pbp-file", missing, "--out", tmp_path)
    assert code == 1
    assert str(missing) in capsys.readouterr().err


def test_parse_failure_exits_2(tmp_path, capsys):
    shots = write_csv(tmp_path / "s.csv", SHOT_COLUMNS,
                      [["G1", "H1", "", "HOM", 1, 700, 0, 0, 7, ""]])
    pbp = write_csv(tmp_path / "p.csv", PBP_COLUMNS, [])
    assert run("ingest", "--shots-file", shots, "--pbp-file", pbp, "--out", tmp_path / "o") == 2
    assert "shot_made" in capsys.readouterr().err


def test_empty_input_gives_empty_outputs(tmp_path):
    shots = write_csv(tmp_path / "s.csv", SHOT_COLUMNS, [])
    pbp = write_csv(tmp_path / "p.csv", PBP_COLUMNS, [])
    out = tmp_path / "o"
    assert run("ingest", "--shots-file", shots, "--pbp-file", pbp, "--out", out) == 0
    assert (out / "stints.csv").read_text().count("\n") == 1
    assert json.loads((out / "lineups.json").read_text()) == []


def test_ingest_fixture_game(tmp_path):
    rows = presence("G1", 1) + [["G1", 20, 2, 360, 8, "H5", "H6", "HOM", "sub"]]
    pbp = write_csv(tmp_path / "p.csv", PBP_COLUMNS, rows)
    shots = write_csv(tmp_path / "s.csv", SHOT_COLUMNS,
                      [["G1", "H6", "", "HOM", 2, 300, 0, 0, 1, 2]])
    out = tmp_path / "o"
    assert run("ingest", "--shots-file", shots, "--pbp-file", pbp, "--out", out) == 0
    lines = (out / "stints.csv").read_text().splitlines()[1:]
    minutes = sorted(float(l.split(",")[-1]) for l in lines)
    assert minutes == [18.0, 30.0, 48.0]


# ------------------------------------------------------------------ metrics

def test_toy_single_cell_metrics(tmp_path):
    d = toy_surface_dir(tmp_path)
    out = tmp_path / "m"
    assert run("metrics", "--surfaces", d, "--out", out) == 0
    totals = json.loads((out / "toy/totals.json").read_text())
    assert abs(totals["total_lpl"] - 0.84) < 1e-12
    grids = list((out / "toy").glob("*.json"))
    assert len(grids) > 20
    for g in grids:
        if g.name != "totals.json":
            assert len(json.loads(g.read_text())["values"]) == 2350
    plc1 = sio.read_surface(out / "toy/plc36_player1.json")["values"]
    assert plc1.sum() == pytest.approx(0.35)


def test_unknown_lineup_lists_available(season, tmp_path, capsys):
    code = run("metrics", "--data", season / "data", "--lineup", "HOM:X1,X2,X3,X4,X5",
               "--out", tmp_path, "--draws", 20)
    assert code == 2
    err = capsys.readouterr().err
    assert "HOM:" in err and "HOM1" in err


def test_metrics_from_ingested_data(season, tmp_path):
    out = tmp_path / "m"
    assert run("metrics", "--data", season / "data", "--out", out, "--draws", 40) == 0
    dirs = sorted(p.name for p in out.iterdir())
    assert len(dirs) == 2       # top-minutes lineup for each of the two teams
    totals = json.loads((out / dirs[0] / "totals.json").read_text())
    assert len(totals["lpl_draws"]) == 40


def test_rank_matched_truth_reports_zero(tmp_path):
    raw = tmp_path / "raw"
    assert run("synth", "--out", raw, "--seed", 1, "--policy", "rank-matched") == 0
    truth = sorted((raw / "truth").iterdir())[0]
    assert run("metrics", "--surfaces", truth, "--out", tmp_path / "m") == 0
    totals = json.loads((tmp_path / "m" / truth.name / "totals.json").read_text())
    assert totals["total_lpl"] == 0


# ------------------------------------------------------------------ permtest

def test_permtest_variate_count(tmp_path):
    d = toy_surface_dir(tmp_path)
    out = tmp_path / "p"
    assert run("permtest", "--surfaces", d, "-S", 100, "--out", out) == 0
    res = json.loads((out / "toy/permtest.json").read_text())
    assert res["S"] == 100 and len(res["variates"]) == 100
    assert 0 <= res["p_hat"] <= 1


def test_permtest_truth_directories(tmp_path):
    for policy, check in (("rank-matched", lambda p: p == 0), ("inverted", lambda p: p > 0.95)):
        raw = tmp_path / policy
        assert run("synth", "--out", raw, "--seed", 2, "--policy", policy) == 0
        for truth in (raw / "truth").iterdir():
            assert run("permtest", "--surfaces", truth, "--out", tmp_path / "o" / policy) == 0
            res = json.loads((tmp_path / "o" / policy / truth.name / "permtest.json").read_text())
            assert check(res["p_hat"]), (policy, truth.name, res["p_hat"])


# ------------------------------------------------------------------- regress

def test_regress_from_observations(tmp_path):
    from shotalloc.score_model import simulate_scores, write_observations
    obs, _ = simulate_scores(n_teams=6, games_per_team=10, seed=1)
    write_observations(obs, tmp_path / "obs.csv")
    out = tmp_path / "r"
    code = run("regress", "--observations", tmp_path / "obs.csv", "--out", out,
               "--chains", 2, "--iterations", 400, "--warmup", 200)
    assert code in (0, 3)
    post = json.loads((out / "posterior.json").read_text())
    for block in ("mu", "alpha", "beta", "gamma", "theta", "sigma"):
        assert block in post["parameters"]
    assert "rhat_max" in post["diagnostics"]
    assert (out / "points_lost.csv").read_text().startswith("team_id,games,mean")


def test_regress_unconverged_exits_3(tmp_path):
    from shotalloc.score_model import simulate_scores, write_observations
    obs, _ = simulate_scores(n_teams=6, games_per_team=10, seed=1)
    write_observations(obs, tmp_path / "obs.csv")
    code = run("regress", "--observations", tmp_path / "obs.csv", "--out", tmp_path / "r",
               "--chains", 4, "--iterations", 8, "--warmup", 2)
    assert code == 3


def test_regress_from_pipeline(season, tmp_path):
    out = tmp_path / "r"
    code = run("regress", "--data", season / "data", "--games-file", season / "raw/games.csv",
               "--out", out, "--draws", 20, "--chains", 2, "--iterations", 300,
               "--warmup", 150)
    assert code in (0, 3)
    lines = (out / "observations.csv").read_text().splitlines()
    assert len(lines) == 1 + 8


# -------------------------------------------------------------------- render

def _svg_for(tmp_path, kind, values):
    sio.write_surface(tmp_path / f"{kind}.json", kind, values)
    assert run("render", tmp_path / f"{kind}.json", "--out", tmp_path / "svg") == 0
    return (tmp_path / "svg" / f"{kind}.svg").read_text()


def test_render_one_rect_per_cell(tmp_path):
    svg = _svg_for(tmp_path, "lpl36", np.linspace(0, 1, 2350))
    assert svg.count('class="cell"') == 2350


def test_render_all_zero_grid(tmp_path):
    svg = _svg_for(tmp_path, "lpl36", np.zeros(2350))
    fills = set(re.findall(r'class="cell"[^>]*fill="(#[0-9a-f]{6})"', svg))
    assert len(fills) == 1
    assert 'data-lo="0"' in svg and 'data-hi="0"' in svg


def test_render_signed_midpoint(tmp_path):
    vals = np.linspace(-2, 2, 2350)
    svg = _svg_for(tmp_path, "rank_corr", vals)
    assert 'data-mid="0"' in svg
    assert 'data-lo="-2"' in svg and 'data-hi="2"' in svg


def test_render_malformed_grid(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "lpl36", "width": 50, "depth": 47, "values": [1, 2]}))
    assert run("render", bad, "--out", tmp_path / "svg") == 2


# ------------------------------------------------------- config / determinism

def test_config_file_and_flag_precedence(tmp_path):
    d = toy_surface_dir(tmp_path)
    cfg = tmp_path / "run.ini"
    cfg.write_text("[shotalloc]\nS = 37\nseed = 5\n")
    assert run("permtest", "--config", cfg, "--surfaces", d, "--out", tmp_path / "a") == 0
    assert json.loads((tmp_path / "a/toy/permtest.json").read_text())["S"] == 37
    assert run("permtest", "--config", cfg, "--surfaces", d, "-S", 12,
               "--out", tmp_path / "b") == 0
    assert json.loads((tmp_path / "b/toy/permtest.json").read_text())["S"] == 12


def test_missing_config_file(tmp_path):
    d = toy_surface_dir(tmp_path)
    assert run("metrics", "--config", tmp_path / "none.ini", "--surfaces", d,
               "--out", tmp_path) == 1


def test_threads_do_not_change_output(season, tmp_path):
    for t in (1, 4):
        assert run("surfaces", "--data", season / "data", "--out", tmp_path / f"t{t}",
                   "--draws", 30, "--threads", t, "--write-draws") == 0
    a = sorted((tmp_path / "t1").rglob("*.json"))
    b = sorted((tmp_path / "t4").rglob("*.json"))
    assert [p.relative_to(tmp_path / "t1") for p in a] == [p.relative_to(tmp_path / "t4") for p in b]
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "shotalloc.cli", "--help"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("ingest", "surfaces", "metrics", "permtest", "regress", "render", "synth"):
        assert cmd in out.stdout
