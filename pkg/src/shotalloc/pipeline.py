"""Glue between on-disk pipeline stages.

An *ingest directory* holds ``stints.csv``, ``lineups.json``,
``season_weights.json`` and ``diagnostics.json``.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .court import GRID, get_partition
from .ingest import (LineupDataset, ShotEvent, build_stints, flag_replacement_players,
                     join_shots, parse_shots, write_stints)
from .io import write_json
from .metrics import tie_break_priority
from .surfaces import (estimate_fga, estimate_fgp_empirical, estimate_fgp_shrunk,
                       league_region_rates, task_seed)

_SHOT_FIELDS = ("game_id", "player_id", "team_id", "period", "clock_remaining",
                "loc_x", "loc_y", "made", "shot_value_declared")


def _shot_row(s: ShotEvent):
    return [getattr(s, f) for f in _SHOT_FIELDS]


def _shot_from_row(r) -> ShotEvent:
    return ShotEvent(**dict(zip(_SHOT_FIELDS, r)))


def lineup_name(ds) -> str:
    return f"{ds.team_id}_{'-'.join(ds.players)}"


def run_ingest(shots_path, pbp_path, out_dir) -> dict:
    """Parse, reconstruct, join and write an ingest directory."""
    out = Path(out_dir)
    shots = parse_shots(shots_path)
    built = build_stints(pbp_path)
    flagged_games = set(built.flagged)
    kept = [s for s in shots if s.game_id not in flagged_games]
    joined = join_shots(kept, built.stints)
    out.mkdir(parents=True, exist_ok=True)
    write_stints(built.stints, out / "stints.csv")
    write_json(out / "lineups.json", [
        {"team_id": d.team_id, "players": list(d.players), "total_minutes": d.total_minutes,
         "shots": [_shot_row(s) for s in d.shots]} for d in joined.lineups])
    write_json(out / "season_weights.json",
               {p: v for p, v in joined.season_attempts.items()})
    diag = {"shots_in": len(shots),
            "shots_in_flagged_games": len(shots) - len(kept),
            "join": joined.diagnostics,
            "flagged_games": built.flagged,
            "stints": len(built.stints),
            "lineups": len(joined.lineups),
            "replacement_players": sorted(flag_replacement_players(
                [s for d in joined.lineups for s in d.shots]))}
    write_json(out / "diagnostics.json", diag)
    return diag


@dataclass
class IngestData:
    lineups: list[LineupDataset]
    season_weights: dict

    @property
    def all_shots(self) -> list[ShotEvent]:
        return [s for d in self.lineups for s in d.shots]

    def player_shots(self) -> dict:
        out = {}
        for s in self.all_shots:
            out.setdefault(s.player_id, []).append(s)
        return out


def load_ingest(data_dir) -> IngestData:
    d = Path(data_dir)
    for name in ("lineups.json", "season_weights.json"):
        if not (d / name).exists():
            raise FileNotFoundError(str(d / name))
    lineups = []
    for rec in json.loads((d / "lineups.json").read_text()):
        lineups.append(LineupDataset(rec["team_id"], tuple(rec["players"]),
                                     rec["total_minutes"],
                                     [_shot_from_row(r) for r in rec["shots"]]))
    weights = {p: np.asarray(v, dtype=float)
               for p, v in json.loads((d / "season_weights.json").read_text()).items()}
    return IngestData(lineups, weights)


class LineupNotFound(LookupError):
    def __init__(self, wanted, available):
        self.available = available
        super().__init__(f"unknown lineup {wanted}; available: " + "; ".join(available))


def select_lineups(data: IngestData, selectors=None, teams=None) -> list[LineupDataset]:
    """Explicit ``TEAM:p1,p2,p3,p4,p5`` selectors, else the top-minutes lineup
    of each team (optionally only ``teams``)."""
    avail = {d.key: d for d in data.lineups}
    if selectors:
        out = []
        for sel in selectors:
            team, _, plist = sel.partition(":")
            key = (team, tuple(sorted(p.strip() for p in plist.split(","))))
            if key not in avail:
                raise LineupNotFound(sel, [f"{t}:{','.join(p)}" for t, p in sorted(avail)])
            out.append(avail[key])
        return out
    best = {}
    for d in data.lineups:
        if teams and d.team_id not in teams:
            continue
        cur = best.get(d.team_id)
        if cur is None or (d.total_minutes, d.players) > (cur.total_minutes, cur.players):
            best[d.team_id] = d
    if teams:
        missing = sorted(set(teams) - set(best))
        if missing:
            raise LineupNotFound(f"for teams {missing}",
                                 [f"{t}:{','.join(p)}" for t, p in sorted(avail)])
    return [best[t] for t in sorted(best)]


@dataclass
class SurfaceSettings:
    backend: str = "empirical"
    partition: str = "empirical12"
    pseudo_makes: float = 1.0
    pseudo_attempts: float = 5.0
    concentration: float = 10.0
    draws: int = 500
    bandwidth: float = 3.0
    smoothing: str = "gaussian-kernel"
    seed: int = 0
    threads: int = 1


def fit_posteriors(data: IngestData, players, settings: SurfaceSettings) -> dict:
    """FG% posteriors for ``players`` pooled over all of their lineups.

    Replacement players (fewer than five shots) get the backend prior only.
    """
    part = get_partition(settings.partition)
    by_player = data.player_shots()
    replacement = flag_replacement_players(data.all_shots)
    league = None
    if settings.backend == "shrunk":
        league = league_region_rates(data.all_shots, part)
    elif settings.backend != "empirical":
        raise ValueError(f"unknown backend {settings.backend!r}")

    def one(p):
        shots = [] if p in replacement else by_player.get(p, [])
        seed = task_seed(settings.seed, "fgp", p)
        if settings.backend == "empirical":
            return estimate_fgp_empirical(p, shots, part, settings.pseudo_makes,
                                          settings.pseudo_attempts, settings.draws, seed)
        return estimate_fgp_shrunk(p, shots, league, part, settings.concentration,
                                   settings.draws, seed)

    players = sorted(set(players))
    with ThreadPoolExecutor(max_workers=max(1, settings.threads)) as pool:
        return dict(zip(players, pool.map(one, players)))


def lineup_surfaces(data: IngestData, ds: LineupDataset, settings: SurfaceSettings,
                    posteriors: dict | None = None):
    """(posteriors, fga surfaces, tie-break priority) for one lineup."""
    posteriors = posteriors or fit_posteriors(data, ds.players, settings)
    post = [posteriors[p] for p in ds.players]
    fga = [estimate_fga(ds, p, settings.bandwidth, settings.smoothing) for p in ds.players]
    prio = tie_break_priority(ds.players, data.season_weights)
    return post, fga, prio
