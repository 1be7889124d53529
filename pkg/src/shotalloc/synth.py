"""Synthetic seasons with known FG% surfaces and shot-allocation policies,
plus a brute-force LPL oracle.

A season is emitted as the same shot / play-by-play / game-result records
the ingest module reads, so it can run through the whole pipeline.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .court import GRID, HOOP, CourtGrid, broad3, point_values
from .ingest import (EV_MADE, EV_MISS, EV_REBOUND, EV_SUBSTITUTION, LineupStint,
                     PbpEvent, ShotEvent, elapsed_seconds, period_length)

POLICIES = ("rank-matched", "random", "inverted", "custom")
RANK_WEIGHTS = (0.35, 0.25, 0.18, 0.13, 0.09)
GAME_SECONDS = 48 * 60


def oracle_lpl(value, fgp, fga) -> float:
    """LPL by exhaustive search over all permutations of the attempts."""
    fgp = [float(f) for f in fgp]
    fga = [float(a) for a in fga]
    best = max(sum(f * a for f, a in zip(fgp, perm)) for perm in itertools.permutations(fga))
    return value * best - value * sum(f * a for f, a in zip(fgp, fga))


def logistic(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class LineupSpec:
    team_id: str
    players: tuple[str, ...]
    minutes_per_game: float
    shots: int


@dataclass
class GameModel:
    mu: float = 100.0
    gamma: float = 2.0
    theta: float = -0.62
    sigma: float = 10.0
    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)


@dataclass
class SynthConfig:
    lineups: list[LineupSpec]
    n_games: int = 4
    intercept: float = 0.4
    slope: float = -0.045
    offsets: dict = field(default_factory=dict)
    slopes: dict = field(default_factory=dict)
    policy: str = "rank-matched"
    custom_weights: dict = field(default_factory=dict)
    location_weights: np.ndarray | None = None
    seed: int = 0
    game_model: GameModel | None = None

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if any(l.shots < 0 for l in self.lineups):
            raise ValueError("shots per lineup must be nonnegative")
        per_team = {}
        for l in self.lineups:
            if len(set(l.players)) != 5:
                raise ValueError(f"lineup {l.players} must have 5 distinct players")
            per_team[l.team_id] = per_team.get(l.team_id, 0) + l.minutes_per_game
        for team, mins in per_team.items():
            if abs(mins - 48) > 1e-9:
                raise ValueError(f"team {team} lineups cover {mins} min, need 48")
        if len(per_team) % 2:
            raise ValueError("need an even number of teams")

    @property
    def teams(self) -> list[str]:
        return sorted({l.team_id for l in self.lineups})

    @property
    def players(self) -> list[str]:
        return sorted({p for l in self.lineups for p in l.players})


@dataclass
class SynthSeason:
    config: SynthConfig
    shots: list[ShotEvent]
    pbp: list[PbpEvent]
    stints: list[LineupStint]
    true_fgp: dict              # player -> M-vector
    results: dict = field(default_factory=dict)   # (game, team) -> (home, score)
    opponents: dict = field(default_factory=dict)  # (game, team) -> opponent
    true_tglpl: dict = field(default_factory=dict)


def default_location_weights(grid: CourtGrid = GRID) -> np.ndarray:
    """Shot-location mixture: rim, mid-range, and near the 3-point line."""
    d = grid.hoop_distance()
    v = point_values(grid)
    rim = np.exp(-0.5 * (d / 1.5) ** 2)
    mid = ((v == 2) & (d >= 6) & (d < 21)).astype(float)
    three = ((v == 3) & (d < 26)).astype(float)
    w = 0.4 * rim / rim.sum() + 0.25 * mid / mid.sum() + 0.35 * three / three.sum()
    return w / w.sum()


def true_fgp_surface(config: SynthConfig, player: str, grid: CourtGrid = GRID) -> np.ndarray:
    d = grid.hoop_distance()
    slope = config.slopes.get(player, config.slope)
    return logistic(config.intercept + config.offsets.get(player, 0.0) + slope * d)


def _default_offsets(config: SynthConfig) -> dict:
    out = {}
    for l in config.lineups:
        for j, p in enumerate(sorted(l.players)):
            out.setdefault(p, 0.3 - 0.15 * j)
    out.update(config.offsets)
    return out


def _apportion(n: int, weights) -> np.ndarray:
    """Largest-remainder split of ``n`` sorted descending."""
    w = np.asarray(weights, dtype=float)
    raw = n * w / w.sum()
    base = np.floor(raw).astype(int)
    rest = n - base.sum()
    if rest:
        base[np.argsort(-(raw - base), kind="stable")[:rest]] += 1
    return -np.sort(-base)


def _allocate(cell_counts, xi, policy, rng, custom=None):
    """(M, 5) per-player attempt counts for one lineup."""
    m = len(cell_counts)
    out = np.zeros((m, 5), dtype=np.int64)
    for i in np.flatnonzero(cell_counts):
        n = int(cell_counts[i])
        if policy == "random":
            out[i] = rng.multinomial(n, np.full(5, 0.2))
            continue
        if policy == "custom":
            out[i] = rng.multinomial(n, custom / custom.sum())
            continue
        counts = _apportion(n, RANK_WEIGHTS)
        order = np.argsort(-xi[i], kind="stable")   # best shooter first
        if policy == "inverted":
            order = order[::-1]
        out[i, order] = counts
    return out


def _cell_point(cell, rng, grid):
    """Integer tenths-of-feet source coordinates strictly inside ``cell``."""
    col, row = cell % grid.width_cells, cell // grid.width_cells
    kx = int(rng.integers(1, 10))
    ky = int(rng.integers(0, 10))
    x_ft = col + kx / 10
    y_ft = row + 0.05 + ky / 10
    return int(round((x_ft - HOOP[0]) * 10)), int(round((y_ft - HOOP[1]) * 10))


def _clock(t):
    """(period, clock remaining) of elapsed game second ``t`` (regulation)."""
    period = min(int(t // 720) + 1, 4)
    return period, (720.0 * period) - t


def _schedule(teams, n_games, rng):
    games = []
    for g in range(n_games):
        order = rng.permutation(len(teams))
        for h, a in order.reshape(-1, 2):
            games.append((f"S{g:04d}{teams[h]}", teams[h], teams[a]))
    return games


def generate_season(config: SynthConfig, grid: CourtGrid = GRID) -> SynthSeason:
    """Generate shots, play-by-play and stints for a synthetic season.

    Each team plays ``n_games``; within a game its lineups take the floor in
    the listed order for ``minutes_per_game`` each.  A lineup's season shots
    are placed on cells by ``location_weights``, split among its players per
    cell by ``policy`` on the true FG% ranks, and spread over its games.
    """
    rng = np.random.default_rng(config.seed)
    config = replace(config, offsets=_default_offsets(config))
    true_fgp = {p: true_fgp_surface(config, p, grid) for p in config.players}
    loc = config.location_weights if config.location_weights is not None \
        else default_location_weights(grid)
    games = _schedule(config.teams, config.n_games, rng)
    team_games = {t: [] for t in config.teams}
    for game_id, home, away in games:
        team_games[home].append(game_id)
        team_games[away].append(game_id)

    shots, pbp, stints = [], [], []
    event_num = {}

    def add_event(game_id, period, clock, etype, p1, p2, team, desc):
        event_num[game_id] = event_num.get(game_id, 0) + 1
        pbp.append(PbpEvent(game_id, event_num[game_id], period, clock, etype,
                            p1, p2, team, desc))

    # per team: game timeline of (start_s, end_s, lineup spec)
    timeline = {}
    for team in config.teams:
        t0, segs = 0.0, []
        for spec in (l for l in config.lineups if l.team_id == team):
            t1 = t0 + spec.minutes_per_game * 60
            segs.append((t0, t1, spec))
            t0 = t1
        timeline[team] = segs

    for team in config.teams:
        for game_id in team_games[team]:
            segs = timeline[team]
            for period in range(1, 5):
                ts = (period - 1) * 720.0
                spec = next(s for a, b, s in segs if a <= ts < b)
                for p in spec.players:
                    add_event(game_id, period, 720.0, EV_REBOUND, p, "", team, "presence")
            for (a, b, spec), nxt in zip(segs, segs[1:] + [None]):
                st = LineupStint(game_id, team, spec.players, _clock(a),
                                 (4, 0.0) if b >= GAME_SECONDS else _clock(b))
                stints.append(st)
                if nxt is None or b % 720 == 0:
                    continue
                period, clock = _clock(b)
                outs = sorted(set(spec.players) - set(nxt[2].players))
                ins = sorted(set(nxt[2].players) - set(spec.players))
                for o, i in zip(outs, ins):
                    add_event(game_id, period, clock, EV_SUBSTITUTION, o, i, team, "SUB")

    for spec in config.lineups:
        team_gl = team_games[spec.team_id]
        cell_counts = rng.multinomial(spec.shots, loc)
        xi = np.column_stack([true_fgp[p] for p in spec.players])
        custom = np.array([config.custom_weights.get(p, 1.0) for p in spec.players])
        alloc = _allocate(cell_counts, xi, config.policy, rng, custom)
        cells, shooters = np.nonzero(alloc)
        flat = np.repeat(np.arange(len(cells)), alloc[cells, shooters])
        order = rng.permutation(len(flat))
        a, b = next((a, b) for a, b, s in timeline[spec.team_id] if s is spec)
        for n, k in enumerate(order):
            cell = int(cells[flat[k]])
            player = spec.players[int(shooters[flat[k]])]
            game_id = team_gl[n % len(team_gl)]
            t = float(np.round(rng.uniform(a + 0.5, b - 0.5), 1))
            period, clock = _clock(t)
            made = bool(rng.random() < true_fgp[player][cell])
            lx, ly = _cell_point(cell, rng, grid)
            shots.append(ShotEvent(game_id, player, spec.team_id, period, clock, lx, ly,
                                   made, int(point_values(grid)[cell])))
            add_event(game_id, period, clock, EV_MADE if made else EV_MISS,
                      player, "", spec.team_id, "shot")

    shots.sort(key=lambda s: (s.game_id, s.elapsed, s.team_id, s.player_id))
    pbp.sort(key=lambda e: (e.game_id, e.period, -e.clock, e.event_num))
    # renumber in chronological order
    renum, counter = [], {}
    for e in pbp:
        counter[e.game_id] = counter.get(e.game_id, 0) + 1
        renum.append(PbpEvent(e.game_id, counter[e.game_id], e.period, e.clock,
                              e.event_type, e.player1, e.player2, e.team_id, e.description))
    stints.sort(key=lambda s: (s.game_id, s.team_id, s.start_elapsed))
    season = SynthSeason(config, shots, renum, stints, true_fgp)
    for game_id, home, away in games:
        season.opponents[(game_id, home)] = away
        season.opponents[(game_id, away)] = home
    if config.game_model is not None:
        _simulate_game_scores(season, games, rng, grid)
    return season


def _simulate_game_scores(season, games, rng, grid):
    from .inference import game_records
    from .ingest import join_shots

    gm = season.config.game_model
    joined = join_shots(season.shots, season.stints, grid)
    recs = game_records(joined.lineups, season.true_fgp, joined.season_attempts,
                        broad3(grid), grid=grid)
    tg = {(r.game_id, r.team_id): r.tglpl for r in recs}
    for game_id, home, away in games:
        for team, opp, is_home in ((home, away, True), (away, home, False)):
            t = tg.get((game_id, team), 0.0)
            score = (gm.mu + gm.alpha.get(team, 0.0) + gm.beta.get(opp, 0.0)
                     + gm.gamma * is_home + gm.theta * t + rng.normal(0, gm.sigma))
            season.true_tglpl[(game_id, team)] = t
            season.results[(game_id, team)] = (is_home, max(float(score), 0.0))


def write_pbp(events, path) -> None:
    from .ingest import PBP_COLUMNS, _fmt
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PBP_COLUMNS)
        for e in events:
            w.writerow([e.game_id, e.event_num, e.period, _fmt(e.clock), e.event_type,
                        e.player1, e.player2, e.team_id, e.description])


GAME_COLUMNS = ("game_id", "team_id", "opponent_id", "home", "score")


def write_games(season: SynthSeason, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GAME_COLUMNS)
        for (game_id, team), (home, score) in sorted(season.results.items()):
            w.writerow([game_id, team, season.opponents[(game_id, team)], int(home),
                        repr(round(score, 6))])


def read_games(path) -> dict:
    """(game_id, team_id) -> (opponent, home, score)."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in GAME_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"games file missing columns {missing}")
        for row in reader:
            out[(row["game_id"], row["team_id"])] = (
                row["opponent_id"], row["home"].strip() == "1", float(row["score"]))
    return out


def two_team_config(policy: str = "rank-matched", shots: int = 400, n_games: int = 4,
                    seed: int = 0, game_model: GameModel | None = None) -> SynthConfig:
    """Two teams with two lineups each (36 + 12 minutes), seven players per team."""
    lineups = []
    for t in ("HOM", "AWY"):
        ps = [f"{t}{i}" for i in range(1, 8)]
        lineups.append(LineupSpec(t, tuple(ps[:5]), 36.0, shots))
        lineups.append(LineupSpec(t, tuple(ps[:3] + ps[5:7]), 12.0, shots // 3))
    return SynthConfig(lineups, n_games=n_games, policy=policy, seed=seed,
                       game_model=game_model)
