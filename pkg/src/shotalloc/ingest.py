"""Shot-chart / play-by-play parsing, lineup stint reconstruction and the
shot-to-lineup join.

All inputs are offline CSV files (see README for the column layouts).
"""
from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .court import GRID, CourtGrid, from_source_coords

log = logging.getLogger(__name__)

REGULATION_PERIOD_S = 720.0
OVERTIME_PERIOD_S = 300.0
REPLACEMENT_THRESHOLD = 5

SHOT_COLUMNS = ("game_id", "player_id", "player_name", "team_id", "period",
                "clock_seconds", "loc_x_tenths_ft", "loc_y_tenths_ft",
                "shot_made", "shot_value")
PBP_COLUMNS = ("game_id", "event_num", "period", "clock_seconds", "event_type",
               "player1_id", "player2_id", "team_id", "description")
STINT_COLUMNS = ("game_id", "team_id", "p1", "p2", "p3", "p4", "p5",
                 "start_period", "start_clock", "end_period", "end_clock", "minutes")

# NBA event-message codes used by the reconstruction
EV_MADE, EV_MISS, EV_FREE_THROW, EV_REBOUND = 1, 2, 3, 4
EV_SUBSTITUTION = 8
EV_PERIOD_START, EV_PERIOD_END = 12, 13
_EVENT_ALIASES = {"sub": EV_SUBSTITUTION, "substitution": EV_SUBSTITUTION,
                  "start": EV_PERIOD_START, "period_start": EV_PERIOD_START,
                  "end": EV_PERIOD_END, "period_end": EV_PERIOD_END,
                  "made": EV_MADE, "miss": EV_MISS}


class ParseError(ValueError):
    """Schema violation in an input file; names the row and field."""

    def __init__(self, msg, row=None, field=None):
        self.row, self.field = row, field
        where = []
        if row is not None:
            where.append(f"line {row}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {msg}" if where else msg)


def period_length(period: int) -> float:
    return REGULATION_PERIOD_S if period <= 4 else OVERTIME_PERIOD_S


def elapsed_seconds(period: int, clock: float) -> float:
    """Game seconds elapsed at (period, clock remaining)."""
    before = sum(period_length(p) for p in range(1, period))
    return before + period_length(period) - clock


@dataclass(frozen=True)
class ShotEvent:
    game_id: str
    player_id: str
    team_id: str
    period: int
    clock_remaining: float
    loc_x: float
    loc_y: float
    made: bool
    shot_value_declared: int | None = None
    player_name: str = ""

    @property
    def elapsed(self) -> float:
        return elapsed_seconds(self.period, self.clock_remaining)

    def feet(self) -> tuple[float, float]:
        x, y = from_source_coords(self.loc_x, self.loc_y)
        return float(x), float(y)


@dataclass(frozen=True)
class LineupStint:
    game_id: str
    team_id: str
    players: tuple[str, ...]
    start: tuple[int, float]
    end: tuple[int, float]

    def __post_init__(self):
        if len(set(self.players)) != 5:
            raise ValueError(f"stint needs 5 distinct players, got {self.players}")
        object.__setattr__(self, "players", tuple(sorted(self.players)))

    @property
    def start_elapsed(self) -> float:
        return elapsed_seconds(*self.start)

    @property
    def end_elapsed(self) -> float:
        return elapsed_seconds(*self.end)

    @property
    def minutes(self) -> float:
        return (self.end_elapsed - self.start_elapsed) / 60.0

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return self.team_id, self.players


@dataclass
class LineupDataset:
    team_id: str
    players: tuple[str, ...]
    total_minutes: float = 0.0
    shots: list[ShotEvent] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return self.team_id, self.players

    def player_shots(self, player_id: str) -> list[ShotEvent]:
        return [s for s in self.shots if s.player_id == player_id]


@dataclass
class StintBuild:
    stints: list[LineupStint]
    flagged: dict[str, str] = field(default_factory=dict)


@dataclass
class JoinResult:
    lineups: list[LineupDataset]
    season_attempts: dict[str, np.ndarray]
    flagged_shots: list[tuple[ShotEvent, str]] = field(default_factory=list)

    @property
    def diagnostics(self) -> dict:
        reasons = defaultdict(int)
        for _, why in self.flagged_shots:
            reasons[why] += 1
        return {"assigned": sum(len(l.shots) for l in self.lineups),
                "flagged": len(self.flagged_shots),
                "reasons": dict(sorted(reasons.items()))}


# ---------------------------------------------------------------- parsing

def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    if isinstance(source, io.TextIOBase):
        return source
    return io.StringIO(source.read())


def _read_rows(source, required):
    fh = _open_text(source)
    try:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required if c not in header]
        if missing:
            raise ParseError(f"missing columns {missing}", row=1)
        for lineno, row in enumerate(reader, start=2):
            yield lineno, row
    finally:
        if isinstance(source, (str, Path)):
            fh.close()


def _req(row, name, lineno):
    val = (row.get(name) or "").strip()
    if val == "":
        raise ParseError("required value is empty", lineno, name)
    return val


def _int(row, name, lineno):
    try:
        return int(_req(row, name, lineno))
    except ValueError:
        raise ParseError(f"not an integer: {row[name]!r}", lineno, name) from None


def _float(row, name, lineno):
    try:
        v = float(_req(row, name, lineno))
    except ValueError:
        raise ParseError(f"not a number: {row[name]!r}", lineno, name) from None
    if not math.isfinite(v):
        raise ParseError(f"not finite: {row[name]!r}", lineno, name)
    return v


def parse_shots(source) -> list[ShotEvent]:
    """Read a shots CSV into :class:`ShotEvent` records, one per row."""
    shots = []
    required = [c for c in SHOT_COLUMNS if c not in ("player_name", "shot_value")]
    for lineno, row in _read_rows(source, required):
        period = _int(row, "period", lineno)
        if period < 1:
            raise ParseError("period must be >= 1", lineno, "period")
        clock = _float(row, "clock_seconds", lineno)
        if not 0 <= clock <= period_length(period):
            raise ParseError(f"clock {clock} outside period", lineno, "clock_seconds")
        made = _req(row, "shot_made", lineno)
        if made not in ("0", "1"):
            raise ParseError(f"shot_made must be 0 or 1, got {made!r}", lineno, "shot_made")
        sv = (row.get("shot_value") or "").strip()
        if sv not in ("", "2", "3"):
            raise ParseError(f"shot_value must be 2, 3 or blank, got {sv!r}",
                             lineno, "shot_value")
        shots.append(ShotEvent(
            game_id=_req(row, "game_id", lineno),
            player_id=_req(row, "player_id", lineno),
            team_id=_req(row, "team_id", lineno),
            period=period,
            clock_remaining=clock,
            loc_x=_float(row, "loc_x_tenths_ft", lineno),
            loc_y=_float(row, "loc_y_tenths_ft", lineno),
            made=made == "1",
            shot_value_declared=int(sv) if sv else None,
            player_name=(row.get("player_name") or "").strip(),
        ))
    return shots


def write_shots(shots, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SHOT_COLUMNS)
        for s in shots:
            w.writerow([s.game_id, s.player_id, s.player_name, s.team_id, s.period,
                        _fmt(s.clock_remaining), _fmt(s.loc_x), _fmt(s.loc_y),
                        int(s.made), s.shot_value_declared or ""])


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


@dataclass(frozen=True)
class PbpEvent:
    game_id: str
    event_num: int
    period: int
    clock: float
    event_type: int
    player1: str
    player2: str
    team_id: str
    description: str = ""


def _event_type(raw, lineno):
    raw = raw.strip()
    if raw.lower() in _EVENT_ALIASES:
        return _EVENT_ALIASES[raw.lower()]
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"unknown event_type {raw!r}", lineno, "event_type") from None


def parse_pbp(source) -> list[PbpEvent]:
    events = []
    for lineno, row in _read_rows(source, [c for c in PBP_COLUMNS if c != "description"]):
        period = _int(row, "period", lineno)
        if period < 1:
            raise ParseError("period must be >= 1", lineno, "period")
        clock = _float(row, "clock_seconds", lineno)
        if not 0 <= clock <= period_length(period):
            raise ParseError(f"clock {clock} outside period", lineno, "clock_seconds")
        events.append(PbpEvent(
            game_id=_req(row, "game_id", lineno),
            event_num=_int(row, "event_num", lineno),
            period=period,
            clock=clock,
            event_type=_event_type(_req(row, "event_type", lineno), lineno),
            player1=(row.get("player1_id") or "").strip(),
            player2=(row.get("player2_id") or "").strip(),
            team_id=(row.get("team_id") or "").strip(),
            description=(row.get("description") or "").strip(),
        ))
    return events


# ------------------------------------------------------ stint reconstruction

class _Unresolved(Exception):
    pass


def _player_teams(events):
    teams = {}
    for e in events:
        if e.team_id and e.player1:
            teams.setdefault(e.player1, e.team_id)
        if e.event_type == EV_SUBSTITUTION and e.team_id and e.player2:
            teams.setdefault(e.player2, e.team_id)
    return teams


def _period_starters(events, team, teams, prior_end):
    """Players of ``team`` on court when the period begins."""
    seen, subbed_in = [], set()
    for e in events:
        if e.event_type == EV_SUBSTITUTION:
            if e.team_id != team:
                continue
            if e.player1 and e.player1 not in subbed_in and e.player1 not in seen:
                seen.append(e.player1)
            if e.player2:
                subbed_in.add(e.player2)
            continue
        for p in (e.player1, e.player2):
            if p and teams.get(p) == team and p not in subbed_in and p not in seen:
                seen.append(p)
    if len(seen) == 5:
        return seen
    if len(seen) > 5:
        raise _Unresolved(f"team {team}: {len(seen)} candidate starters {sorted(seen)}")
    if prior_end is not None:
        fill = [p for p in sorted(prior_end) if p not in seen and p not in subbed_in]
        if len(fill) == 5 - len(seen):
            return seen + fill
        raise _Unresolved(f"team {team}: resolved {sorted(seen)}, "
                          f"prior-period candidates {fill}")
    raise _Unresolved(f"team {team}: only {len(seen)} starters resolved {sorted(seen)}")


def _game_stints(game_id, events):
    events = sorted(events, key=lambda e: (e.period, -e.clock, e.event_num))
    teams = _player_teams(events)
    team_ids = sorted({e.team_id for e in events if e.team_id})
    if len(team_ids) != 2:
        raise _Unresolved(f"expected 2 teams, found {team_ids}")
    n_periods = max(4, max(e.period for e in events))
    by_period = defaultdict(list)
    for e in events:
        by_period[e.period].append(e)

    stints = []
    for team in team_ids:
        segments = []  # (start_elapsed, start(period, clock), lineup)
        on_court = None
        for period in range(1, n_periods + 1):
            pev = by_period.get(period, [])
            on_court = set(_period_starters(pev, team, teams, on_court))
            segments.append(((period, period_length(period)), frozenset(on_court)))
            for e in pev:
                if e.event_type != EV_SUBSTITUTION or e.team_id != team:
                    continue
                out_p, in_p = e.player1, e.player2
                if in_p in on_court:
                    raise _Unresolved(f"event {e.event_num}: incoming player {in_p} "
                                      f"already on court {sorted(on_court)}")
                if out_p not in on_court:
                    raise _Unresolved(f"event {e.event_num}: outgoing player {out_p} "
                                      f"not on court {sorted(on_court)}")
                on_court = (on_court - {out_p}) | {in_p}
                segments.append(((period, e.clock), frozenset(on_court)))
        end = (n_periods, 0.0)
        # collapse: drop zero-length segments and merge identical consecutive lineups
        merged = []
        for i, (start, lineup) in enumerate(segments):
            stop = segments[i + 1][0] if i + 1 < len(segments) else end
            if elapsed_seconds(*stop) <= elapsed_seconds(*start):
                continue
            if merged and merged[-1][2] == lineup:
                merged[-1][1] = stop
            else:
                merged.append([start, stop, lineup])
        for start, stop, lineup in merged:
            stints.append(LineupStint(game_id, team, tuple(lineup), start, stop))
    return stints


def build_stints(source) -> StintBuild:
    """Reconstruct five-player stints for every team in every game.

    ``source`` is a play-by-play CSV path/buffer or a list of
    :class:`PbpEvent`.  Games whose on-court lineup cannot be resolved are
    excluded and reported in ``flagged`` with a diagnostic.
    """
    events = source if isinstance(source, list) else parse_pbp(source)
    by_game = defaultdict(list)
    for e in events:
        by_game[e.game_id].append(e)
    result = StintBuild([])
    for game_id in sorted(by_game):
        try:
            result.stints.extend(_game_stints(game_id, by_game[game_id]))
        except _Unresolved as exc:
            log.warning("game %s flagged: %s", game_id, exc)
            result.flagged[game_id] = str(exc)
    return result


def write_stints(stints, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STINT_COLUMNS)
        for s in stints:
            w.writerow([s.game_id, s.team_id, *s.players,
                        s.start[0], _fmt(s.start[1]), s.end[0], _fmt(s.end[1]),
                        repr(round(s.minutes, 10))])


def read_stints(path) -> list[LineupStint]:
    out = []
    for lineno, row in _read_rows(path, STINT_COLUMNS):
        out.append(LineupStint(
            row["game_id"], row["team_id"],
            tuple(row[f"p{i}"] for i in range(1, 6)),
            (_int(row, "start_period", lineno), _float(row, "start_clock", lineno)),
            (_int(row, "end_period", lineno), _float(row, "end_clock", lineno))))
    return out


# --------------------------------------------------------------------- join

def join_shots(shots, stints, grid: CourtGrid = GRID) -> JoinResult:
    """Attach each shot to the stint on the floor when it was taken.

    Intervals are half-open ``[start, end)`` so a shot at the instant of a
    substitution belongs to the incoming lineup; the final buzzer is closed.
    """
    index = defaultdict(list)
    game_end = defaultdict(float)
    for st in stints:
        index[(st.game_id, st.team_id)].append(st)
        game_end[st.game_id] = max(game_end[st.game_id], st.end_elapsed)
    for v in index.values():
        v.sort(key=lambda s: s.start_elapsed)

    datasets: dict[tuple, LineupDataset] = {}
    for st in stints:
        ds = datasets.setdefault(st.key, LineupDataset(st.team_id, st.players))
        ds.total_minutes += st.minutes

    season = {}
    flagged = []
    for shot in shots:
        cands = index.get((shot.game_id, shot.team_id))
        if not cands:
            flagged.append((shot, "no stints for game/team"))
            continue
        t = shot.elapsed
        hit = None
        for st in cands:
            if st.start_elapsed <= t < st.end_elapsed or (
                    t == st.end_elapsed == game_end[shot.game_id]):
                hit = st
                break
        if hit is None:
            flagged.append((shot, "outside all stints"))
            continue
        if shot.player_id not in hit.players:
            flagged.append((shot, "shooter not on court"))
            continue
        datasets[hit.key].shots.append(shot)
        x, y = shot.feet()
        k = grid.cell_of(x, y)
        counts = season.setdefault(shot.player_id, np.zeros(grid.n_cells))
        if k >= 0:
            counts[k] += 1
    lineups = sorted(datasets.values(), key=lambda d: d.key)
    return JoinResult(lineups, dict(sorted(season.items())), flagged)


def flag_replacement_players(shots, threshold: int = REPLACEMENT_THRESHOLD) -> set[str]:
    """Players with fewer than ``threshold`` attempts in ``shots``."""
    counts = defaultdict(int)
    for s in shots:
        counts[s.player_id] += 1
    return {p for p, n in counts.items() if n < threshold}


def shot_arrays(shots, grid: CourtGrid = GRID):
    """(cells, made) arrays for a list of shots; OOB cells are -1."""
    if not shots:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    x, y = from_source_coords([s.loc_x for s in shots], [s.loc_y for s in shots])
    return grid.cells_of(x, y), np.array([s.made for s in shots], dtype=bool)
