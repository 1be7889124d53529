"""Permutation test for allocative optimality and game-level lineup points
lost (GLPL / TGLPL) aggregation."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .court import GRID, CourtGrid, RegionPartition, broad3, point_values
from .ingest import LineupDataset, shot_arrays
from .metrics import _stack_draws, reallocate, tie_break_priority

DEFAULT_VARIATES = 500


@dataclass
class PermTestResult:
    lineup: tuple
    variates: np.ndarray
    p_hat: float

    @property
    def S(self) -> int:
        return len(self.variates)

    def to_dict(self) -> dict:
        return {"lineup": list(self.lineup), "S": self.S, "p_hat": self.p_hat,
                "variates": [float(v) for v in self.variates]}


def null_variates(values, draws, fga, S: int = DEFAULT_VARIATES, seed: int = 0,
                  chunk: int = 50) -> np.ndarray:
    """Variates of ``sum_i sum_j v_i * xi_ij * (A_ij - Adag_ij)``.

    ``draws`` is an (n_draws, M, 5) array of joint FG% draws and ``fga`` an
    (M, 5) attempt array; each cell of each variate gets its own uniformly
    random permutation ``Adag`` of that cell's attempts.
    """
    if S < 1:
        raise ValueError("S must be at least 1")
    rng = np.random.default_rng(seed)
    fga = np.asarray(fga, dtype=float)
    draws = np.asarray(draws, dtype=float)
    # cells whose attempts are all equal contribute nothing
    active = np.ptp(fga, axis=-1) > 0
    v = np.asarray(values, dtype=float)[active]
    a = fga[active]
    n_draws = draws.shape[0]
    pick = np.arange(S) % n_draws if n_draws >= S or n_draws == 1 else rng.integers(0, n_draws, S)
    out = np.empty(S)
    for s0 in range(0, S, chunk):
        idx = pick[s0:s0 + chunk]
        xi = draws[idx][:, active, :]
        a_dag = rng.permuted(np.broadcast_to(a, xi.shape), axis=-1)
        out[s0:s0 + len(idx)] = np.sum(v * np.sum(xi * (a - a_dag), axis=-1), axis=-1)
    return out


def permutation_test(posteriors, fga_surfaces, grid: CourtGrid = GRID,
                     S: int = DEFAULT_VARIATES, seed: int = 0, lineup=None) -> PermTestResult:
    """One-sided test of the observed allocation against random allocation.

    ``p_hat`` is the fraction of variates below zero, i.e. draws where a
    random reshuffle of the attempts beats the observed allocation.
    """
    draws = _stack_draws(posteriors)
    fga = np.column_stack([f.per36 for f in fga_surfaces])
    if draws.shape[1] != grid.n_cells or fga.shape[0] != grid.n_cells:
        raise ValueError("surfaces do not match the grid")
    variates = null_variates(point_values(grid), draws, fga, S, seed)
    key = lineup if lineup is not None else tuple(p.player_id for p in posteriors)
    return PermTestResult(tuple(key), variates, float(np.mean(variates < 0)))


# ------------------------------------------------------------------ GLPL

def region_fgp(fgp_mean, weights, partition: RegionPartition) -> np.ndarray:
    """Attempt-weighted average FG% per region (unweighted if no attempts)."""
    r = partition.region_of_cell
    n = partition.n_regions
    xi = np.asarray(fgp_mean, dtype=float)
    w = np.asarray(weights, dtype=float) if weights is not None else np.zeros_like(xi)
    num = np.bincount(r, weights=w * xi, minlength=n)
    den = np.bincount(r, weights=w, minlength=n)
    plain = np.bincount(r, weights=xi, minlength=n) / np.maximum(np.bincount(r, minlength=n), 1)
    safe = np.where(den > 0, den, 1.0)
    return np.where(den > 0, num / safe, plain)


def glpl(region_attempts, region_fgp_matrix, partition: RegionPartition,
         priority=None) -> np.ndarray:
    """GLPL per region from (R, 5) attempts and (R, 5) region FG%."""
    a = np.asarray(region_attempts, dtype=float)
    f = np.asarray(region_fgp_matrix, dtype=float)
    a_star = reallocate(f, a, priority)
    return partition.region_values() * np.sum(f * (a_star - a), axis=-1)


def region_attempts(shots, players, partition: RegionPartition,
                    grid: CourtGrid = GRID) -> np.ndarray:
    """(R, 5) attempt counts; out-of-grid shots land in the residual region."""
    out = np.zeros((partition.n_regions, len(players)))
    col = {p: j for j, p in enumerate(players)}
    if not shots:
        return out
    cells, _ = shot_arrays(shots, grid)
    regions = partition.index_of_cells(cells)
    for s, r in zip(shots, regions):
        out[r, col[s.player_id]] += 1
    return out


@dataclass
class GameLplRecord:
    game_id: str
    team_id: str
    home: bool | None = None
    score: float | None = None
    per_lineup: dict = field(default_factory=dict)   # players -> (R,) GLPL
    regions: tuple = ()

    @property
    def glpl(self) -> dict:
        if not self.per_lineup:
            return {r: 0.0 for r in self.regions}
        tot = np.sum(list(self.per_lineup.values()), axis=0)
        return dict(zip(self.regions, map(float, tot)))

    @property
    def tglpl(self) -> float:
        return tglpl(self)


def tglpl(record: GameLplRecord) -> float:
    """Sum of GLPL over every region and every lineup of one team-game."""
    total = 0.0
    for key in sorted(record.per_lineup):
        total += float(np.sum(record.per_lineup[key]))
    return total


def game_records(lineups: list[LineupDataset], fgp_means: dict, season_weights: dict,
                 partition: RegionPartition | None = None, results: dict | None = None,
                 grid: CourtGrid = GRID) -> list[GameLplRecord]:
    """Per (game, team) GLPL records for every lineup that took shots.

    ``fgp_means`` maps player -> M-vector of FG% means, ``season_weights``
    maps player -> M-vector of season attempts, and ``results`` optionally
    maps (game_id, team_id) -> (home, score).
    """
    partition = partition or broad3(grid)
    results = results or {}
    records: dict[tuple, GameLplRecord] = {}
    for ds in lineups:
        players = ds.players
        f = np.column_stack([region_fgp(fgp_means[p], season_weights.get(p), partition)
                             for p in players])
        prio = tie_break_priority(players, season_weights)
        by_game = defaultdict(list)
        for s in ds.shots:
            by_game[s.game_id].append(s)
        for game_id in sorted(by_game):
            rec = records.get((game_id, ds.team_id))
            if rec is None:
                home, score = results.get((game_id, ds.team_id), (None, None))
                rec = records[(game_id, ds.team_id)] = GameLplRecord(
                    game_id, ds.team_id, home, score, regions=partition.regions)
            a = region_attempts(by_game[game_id], players, partition, grid)
            # datasets sharing the same five players add up
            prev = rec.per_lineup.get(players, 0.0)
            rec.per_lineup[players] = prev + glpl(a, f, partition, prio)
    for (game_id, team_id), (home, score) in results.items():
        if (game_id, team_id) not in records:
            records[(game_id, team_id)] = GameLplRecord(game_id, team_id, home, score,
                                                        regions=partition.regions)
    return [records[k] for k in sorted(records)]
