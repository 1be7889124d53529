"""Command-line entry point: ``shotalloc <command> [options]``.

Exit codes: 0 success, 1 usage/IO error, 2 validation error,
3 completed with convergence warnings.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as sio
from .ingest import ParseError, write_shots
from .inference import game_records, permutation_test
from .metrics import lineup_metrics
from .pipeline import (LineupNotFound, SurfaceSettings, fit_posteriors, lineup_name,
                       lineup_surfaces, load_ingest, run_ingest, select_lineups)
from .render import surface_svg
from .score_model import (ScoreObservation, fit_score_model, points_lost_summary,
                          read_observations, write_observations)
from .surfaces import FgaSurface, FgPctPosterior

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_WARN = 0, 1, 2, 3

log = logging.getLogger("shotalloc")

DEFAULTS = {
    "seed": 0, "out": "out", "threads": 1,
    "backend": "empirical", "partition": "empirical12", "pseudo_makes": 1.0,
    "pseudo_attempts": 5.0, "concentration": 10.0, "draws": 500, "bandwidth": 3.0,
    "smoothing": "gaussian-kernel", "S": 500, "chains": 4, "iterations": 2000,
    "warmup": 1000, "policy": "rank-matched", "shots": 400, "games": 4, "theta": -0.62,
}
_TYPES = {k: type(v) for k, v in DEFAULTS.items()}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def _add_global(p):
    p.add_argument("--config", help="INI file with a [shotalloc] section; flags win")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", type=int)


def _add_surface_opts(p):
    p.add_argument("--data", help="ingest directory")
    p.add_argument("--lineup", action="append",
                   help="TEAM:p1,p2,p3,p4,p5 (repeatable); default top-minutes lineup per team")
    p.add_argument("--team", action="append", help="restrict default selection to team(s)")
    p.add_argument("--backend", choices=["empirical", "shrunk"])
    p.add_argument("--partition", choices=["empirical12", "broad3"])
    p.add_argument("--pseudo-makes", dest="pseudo_makes", type=float)
    p.add_argument("--pseudo-attempts", dest="pseudo_attempts", type=float)
    p.add_argument("--concentration", type=float)
    p.add_argument("--draws", type=int)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--smoothing", choices=["none", "gaussian-kernel"])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shotalloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic season as CSV files")
    _add_global(p)
    p.add_argument("--policy", choices=["rank-matched", "random", "inverted"])
    p.add_argument("--shots", type=int, help="shots per primary lineup")
    p.add_argument("--games", type=int, help="games per team")
    p.add_argument("--theta", type=float, help="TGLPL effect used for game scores")

    p = sub.add_parser("ingest", help="reconstruct stints and join shots")
    _add_global(p)
    p.add_argument("--shots-file", dest="shots_file", required=True)
    p.add_argument("--pbp-file", dest="pbp_file", required=True)

    p = sub.add_parser("surfaces", help="export FG%% and FGA surfaces for lineups")
    _add_global(p)
    _add_surface_opts(p)
    p.add_argument("--write-draws", action="store_true", help="also write fgp_draws grids")

    for name, helptext in (("metrics", "rank, LPL and PLC surfaces"),
                           ("permtest", "permutation test of allocative optimality")):
        p = sub.add_parser(name, help=helptext)
        _add_global(p)
        _add_surface_opts(p)
        p.add_argument("--surfaces", help="lineup directory written by 'surfaces' "
                                          "(or hand-made) instead of --data")
        if name == "permtest":
            p.add_argument("-S", "--variates", dest="S", type=int)

    p = sub.add_parser("regress", help="Bayesian score regression on TGLPL")
    _add_global(p)
    _add_surface_opts(p)
    p.add_argument("--observations", help="observations CSV")
    p.add_argument("--games-file", dest="games_file",
                   help="game results CSV; with --data builds observations")
    p.add_argument("--chains", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--warmup", type=int)

    p = sub.add_parser("render", help="SVG heatmaps of grid JSON files")
    _add_global(p)
    p.add_argument("grids", nargs="+", help="grid JSON files or directories")
    return parser


def _resolve(args) -> dict:
    """Merge built-in defaults < config file < flags."""
    conf = dict(DEFAULTS)
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(str(path))
        cp = configparser.ConfigParser()
        cp.read(path, encoding="utf-8")
        if cp.has_section("shotalloc"):
            canonical = {k.lower(): k for k in DEFAULTS}
            for k, v in cp.items("shotalloc"):
                k = k.replace("-", "_")
                k = canonical.get(k, k)   # configparser lower-cases keys
                conf[k] = _TYPES[k](v) if k in _TYPES else v
    for k, v in vars(args).items():
        if v is not None and k not in ("config", "command"):
            conf[k] = v
    return conf


def _settings(conf) -> SurfaceSettings:
    return SurfaceSettings(conf["backend"], conf["partition"], conf["pseudo_makes"],
                           conf["pseudo_attempts"], conf["concentration"], conf["draws"],
                           conf["bandwidth"], conf["smoothing"], conf["seed"], conf["threads"])


def _need_path(p, label):
    if not p:
        raise UsageError(f"{label} is required")
    if not Path(p).exists():
        raise FileNotFoundError(str(p))
    return Path(p)


# -------------------------------------------------------------- commands

def cmd_synth(conf) -> int:
    from .synth import GameModel, generate_season, two_team_config, write_games, write_pbp
    cfg = two_team_config(conf["policy"], conf["shots"], conf["games"], conf["seed"],
                          GameModel(theta=conf["theta"]))
    season = generate_season(cfg)
    out = Path(conf["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_shots(season.shots, out / "shots.csv")
    write_pbp(season.pbp, out / "pbp.csv")
    write_games(season, out / "games.csv")
    _write_truth(season, out / "truth")
    print(f"synthetic season: {len(season.shots)} shots, {len(season.stints)} stints -> {out}")
    return EXIT_OK


def _write_truth(season, root: Path) -> None:
    """Noise-free lineup directories: true FG% and unsmoothed FGA per 36."""
    from .ingest import join_shots
    from .metrics import tie_break_priority
    from .surfaces import estimate_fga
    joined = join_shots(season.shots, season.stints)
    for ds in joined.lineups:
        d = root / lineup_name(ds)
        sio.write_json(d / "lineup.json", {
            "team_id": ds.team_id, "players": list(ds.players),
            "total_minutes": ds.total_minutes, "backend": "truth",
            "priority": tie_break_priority(ds.players, joined.season_attempts)})
        for p in ds.players:
            sio.write_surface(d / f"fgp_mean_{p}.json", "fgp_mean", season.true_fgp[p],
                              p, ds.players)
            sio.write_surface(d / f"fga_per36_{p}.json", "fga_per36",
                              estimate_fga(ds, p, 0.0, "none").per36, p, ds.players)


def cmd_ingest(conf) -> int:
    shots = _need_path(conf["shots_file"], "--shots-file")
    pbp = _need_path(conf["pbp_file"], "--pbp-file")
    diag = run_ingest(shots, pbp, conf["out"])
    print(f"stints: {diag['stints']}  lineups: {diag['lineups']}  "
          f"shots assigned: {diag['join']['assigned']}  excluded: {diag['join']['flagged']}  "
          f"in flagged games: {diag['shots_in_flagged_games']}  "
          f"flagged games: {len(diag['flagged_games'])}")
    for game, why in sorted(diag["flagged_games"].items()):
        print(f"  flagged {game}: {why}")
    return EXIT_OK


def _lineup_inputs(conf):
    """Yield (name, lineup key, posteriors, fga surfaces, priority)."""
    if conf.get("surfaces"):
        yield _load_surface_dir(_need_path(conf["surfaces"], "--surfaces"))
        return
    data = load_ingest(_need_path(conf.get("data"), "--data"))
    chosen = select_lineups(data, conf.get("lineup"), conf.get("team"))
    settings = _settings(conf)
    players = sorted({p for ds in chosen for p in ds.players})
    posteriors = fit_posteriors(data, players, settings)
    for ds in chosen:
        post, fga, prio = lineup_surfaces(data, ds, settings, posteriors)
        yield lineup_name(ds), (ds.team_id, *ds.players), post, fga, prio


def _load_surface_dir(d: Path):
    manifest = sio.read_manifest(d / "lineup.json")
    players = manifest["players"]
    post, fga = [], []
    for p in players:
        mean = sio.read_surface(d / f"fgp_mean_{p}.json")["values"]
        draws_path = d / f"fgp_draws_{p}.json"
        if draws_path.exists():
            post.append(FgPctPosterior.from_draws(p, sio.read_surface(draws_path)["values"]))
        else:
            post.append(FgPctPosterior.degenerate(p, mean))
        per36 = sio.read_surface(d / f"fga_per36_{p}.json")["values"]
        minutes = float(manifest.get("total_minutes", 36.0))
        fga.append(FgaSurface(manifest.get("team_id", ""), tuple(players), p, per36,
                              int(round(per36.sum() * minutes / 36.0)), minutes))
    prio = np.asarray(manifest.get("priority", list(range(5))))
    return d.name, (manifest.get("team_id", ""), *players), post, fga, prio


def cmd_surfaces(conf) -> int:
    data = load_ingest(_need_path(conf.get("data"), "--data"))
    chosen = select_lineups(data, conf.get("lineup"), conf.get("team"))
    settings = _settings(conf)
    posteriors = fit_posteriors(data, {p for ds in chosen for p in ds.players}, settings)
    for ds in chosen:
        post, fga, prio = lineup_surfaces(data, ds, settings, posteriors)
        d = Path(conf["out"]) / lineup_name(ds)
        sio.write_json(d / "lineup.json", {"team_id": ds.team_id, "players": list(ds.players),
                                           "total_minutes": ds.total_minutes,
                                           "priority": prio, "backend": settings.backend})
        for p, f in zip(post, fga):
            sio.write_surface(d / f"fgp_mean_{p.player_id}.json", "fgp_mean", p.mean,
                              p.player_id, ds.players)
            sio.write_surface(d / f"fga_per36_{p.player_id}.json", "fga_per36", f.per36,
                              p.player_id, ds.players)
            if conf.get("write_draws"):
                sio.write_surface(d / f"fgp_draws_{p.player_id}.json", "fgp_draws",
                                  p.draws, p.player_id, ds.players)
        print(f"{lineup_name(ds)}: surfaces written to {d}")
    return EXIT_OK


def _histogram(x, bins=30):
    counts, edges = np.histogram(x, bins=bins)
    return {"edges": edges, "counts": counts}


def cmd_metrics(conf) -> int:
    out = Path(conf["out"])
    for name, key, post, fga, prio in _lineup_inputs(conf):
        ms = lineup_metrics(post, fga, priority=prio)
        d = out / name
        lineup = list(key[1:])
        for k, p in enumerate(ms.player_ids, start=1):
            sio.write_surface(d / f"rank_fgp_map_player{k}.json", "rank_fgp_map",
                              ms.rank_fgp_map[:, k - 1], p, lineup)
            for q, arr in ms.rank_fgp_q.items():
                sio.write_surface(d / f"rank_fgp_{q}_player{k}.json", f"rank_fgp_{q}",
                                  arr[:, k - 1], p, lineup)
            sio.write_surface(d / f"rank_fga_player{k}.json", "rank_fga",
                              ms.rank_fga[:, k - 1], p, lineup)
            sio.write_surface(d / f"rank_corr_player{k}.json", "rank_corr",
                              ms.rank_correspondence[:, k - 1], p, lineup)
            sio.write_surface(d / f"plc36_player{k}.json", f"plc36_player{k}",
                              ms.plc[k - 1], p, lineup)
            sio.write_surface(d / f"plc_per_shot_player{k}.json", f"plc_per_shot_player{k}",
                              ms.plc_per_shot[k - 1], p, lineup)
        sio.write_surface(d / "lpl36.json", "lpl36", ms.lpl, None, lineup)
        sio.write_surface(d / "lpl_per_shot.json", "lpl_per_shot", ms.lpl_per_shot, None, lineup)
        sio.write_json(d / "totals.json", {
            "lineup": list(key), "players": list(ms.player_ids),
            "total_lpl": ms.total_lpl, "lpl_draws": ms.lpl_draws,
            "lpl_draws_histogram": _histogram(ms.lpl_draws)})
        print(f"{name}: total LPL per 36 = {ms.total_lpl:.6g}")
    return EXIT_OK


def cmd_permtest(conf) -> int:
    out = Path(conf["out"])
    rows = []
    for name, key, post, fga, prio in _lineup_inputs(conf):
        res = permutation_test(post, fga, S=conf["S"], seed=conf["seed"], lineup=key)
        sio.write_json(out / name / "permtest.json", res.to_dict())
        rows.append((key[0], name, res.p_hat))
        print(f"{name}: p_hat = {res.p_hat:.3f} (S = {res.S})")
    sio.write_json(out / "p_values.json",
                   [{"team_id": t, "lineup": n, "p_hat": p} for t, n, p in rows])
    return EXIT_OK


def _build_observations(conf):
    from .synth import read_games
    data = load_ingest(_need_path(conf.get("data"), "--data"))
    games = read_games(_need_path(conf.get("games_file"), "--games-file"))
    # TGLPL needs only posterior means; a single draw returns them exactly
    settings = replace(_settings(conf), draws=1)
    players = sorted({p for ds in data.lineups for p in ds.players} | set(data.season_weights))
    post = fit_posteriors(data, players, settings)
    means = {p: post[p].mean for p in players}
    results = {k: (home, score) for k, (_, home, score) in games.items()}
    recs = {(r.game_id, r.team_id): r for r in game_records(data.lineups, means,
                                                             data.season_weights,
                                                             results=results)}
    obs = []
    for (game_id, team), (opp, home, score) in sorted(games.items()):
        rec = recs.get((game_id, team))
        obs.append(ScoreObservation(team, opp, game_id, score, home,
                                    rec.tglpl if rec else 0.0))
    return obs


def cmd_regress(conf) -> int:
    out = Path(conf["out"])
    if conf.get("observations"):
        obs = read_observations(_need_path(conf["observations"], "--observations"))
    else:
        obs = _build_observations(conf)
        out.mkdir(parents=True, exist_ok=True)
        write_observations(obs, out / "observations.csv")
    post = fit_score_model(obs, conf["chains"], conf["iterations"], conf["warmup"],
                           conf["seed"])
    sio.write_json(out / "posterior.json", post.to_dict())
    theta_hat = post.theta["mean"]
    by_team = {}
    for o in obs:
        by_team.setdefault(o.team, []).append(o.tglpl)
    table = points_lost_summary(theta_hat, by_team)
    sio.write_json(out / "points_lost.json", table)
    with open(out / "points_lost.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["team_id", "games", "mean", "q10", "q50", "q90"])
        for team, row in table.items():
            w.writerow([team, row["games"], repr(row["mean"]), repr(row["q10"]),
                        repr(row["q50"]), repr(row["q90"])])
    th = post.theta
    print(f"theta: mean {th['mean']:.3f}, 95% HPD ({th['hpd_low']:.3f}, {th['hpd_high']:.3f}), "
          f"max rhat {max(post.rhat.values()):.3f}")
    if not post.converged:
        print("warning: chains did not converge (rhat > 1.05)", file=sys.stderr)
        return EXIT_WARN
    return EXIT_OK


def cmd_render(conf) -> int:
    files = []   # (source, output name relative to --out)
    for g in conf["grids"]:
        p = _need_path(g, "grid")
        if p.is_dir():
            files.extend((f, f.relative_to(p)) for f in sorted(p.rglob("*.json")))
        else:
            files.append((p, Path(p.name)))
    out = Path(conf["out"])
    n = 0
    for f, rel in files:
        if f.name in ("lineup.json", "totals.json", "permtest.json", "p_values.json"):
            continue
        grid = sio.read_surface(f)
        if grid["values"].ndim != 1:
            continue
        title = f"{grid['kind']} {grid.get('player_id') or ''}".strip()
        sio.atomic_write(out / rel.with_suffix(".svg"),
                         surface_svg(grid["values"], grid["kind"], title,
                                     int(grid["width"]), int(grid["depth"])))
        n += 1
    print(f"rendered {n} SVG file(s) to {out}")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "ingest": cmd_ingest, "surfaces": cmd_surfaces,
            "metrics": cmd_metrics, "permtest": cmd_permtest, "regress": cmd_regress,
            "render": cmd_render}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        conf = _resolve(args)
        return COMMANDS[args.command](conf)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc.args[0]}", file=sys.stderr)
        return EXIT_IO
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except LineupNotFound as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ParseError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
