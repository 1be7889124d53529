"""Allocative-efficiency metrics for a five-player lineup.

Conventions
-----------
Player axes are always last.  ``priority`` is the tie-break key: an array of
five distinct integers where a smaller number wins ties (see
:func:`tie_break_priority`).  Ranks are 1 (best) .. 5.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .court import GRID, CourtGrid, point_values
from .surfaces import FgaSurface, FgPctPosterior

N_PLAYERS = 5


def tie_break_priority(player_ids, season_attempts=None) -> np.ndarray:
    """Tie-break priority: more season attempts first, then smaller id."""
    totals = season_attempts or {}
    order = sorted(range(len(player_ids)),
                   key=lambda j: (-float(np.sum(totals.get(player_ids[j], 0.0))),
                                  player_ids[j]))
    prio = np.empty(len(player_ids), dtype=np.int64)
    prio[order] = np.arange(len(player_ids))
    return prio


def _priority(priority, n):
    return np.arange(n) if priority is None else np.asarray(priority)


def _order_desc(values: np.ndarray, priority) -> np.ndarray:
    """Player indices sorted best-first along the last axis."""
    values = np.asarray(values, dtype=float)
    prio = _priority(priority, values.shape[-1])
    by_key = np.argsort(prio)
    order = np.argsort(-values[..., by_key], axis=-1, kind="stable")
    return by_key[order]


def rank_vector(values, priority=None) -> np.ndarray:
    """Ranks (1 = largest) along the last axis; ties go to the lower priority."""
    values = np.asarray(values, dtype=float)
    order = _order_desc(values, priority)
    ranks = np.empty(order.shape, dtype=np.int64)
    np.put_along_axis(ranks, order, np.arange(1, values.shape[-1] + 1)
                      * np.ones(order.shape, dtype=np.int64), axis=-1)
    return ranks


def reallocate(fgp, fga, priority=None) -> np.ndarray:
    """Rank-matched reallocation A*: the k-th best shooter receives the
    k-th largest attempt value.  Works on (..., 5) arrays."""
    fgp = np.asarray(fgp, dtype=float)
    fga = np.asarray(fga, dtype=float)
    fgp, fga = np.broadcast_arrays(fgp, fga)
    order = _order_desc(fgp, priority)
    sorted_a = -np.sort(-fga, axis=-1)
    out = np.empty_like(sorted_a)
    np.put_along_axis(out, order, sorted_a, axis=-1)
    return out


def lpl_cell(value, fgp, fga, priority=None) -> np.ndarray:
    """Lineup points lost: expected points of A* minus those of A.

    The rearrangement gap is never negative; the floor at zero only removes
    rounding noise (e.g. five equal FG% values).
    """
    fgp = np.asarray(fgp, dtype=float)
    fga = np.asarray(fga, dtype=float)
    a_star = reallocate(fgp, fga, priority)
    return np.maximum(np.asarray(value) * np.sum(fgp * (a_star - fga), axis=-1), 0.0)


def lpl_per_shot(lpl, fga) -> np.ndarray:
    total = np.sum(np.asarray(fga, dtype=float), axis=-1)
    lpl = np.asarray(lpl, dtype=float)
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, lpl / safe, 0.0)


def plc_cell(lpl, fga, a_star) -> np.ndarray:
    """Split LPL across players in proportion to their signed reallocation."""
    diff = np.asarray(a_star, dtype=float) - np.asarray(fga, dtype=float)
    denom = np.sum(np.abs(diff), axis=-1, keepdims=True)
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, np.asarray(lpl, dtype=float)[..., None] * diff / safe, 0.0)


@dataclass
class RankSummary:
    pmf: np.ndarray        # (..., 5 players, 5 ranks)
    map_rank: np.ndarray   # (..., 5)
    q20: np.ndarray
    q50: np.ndarray
    q80: np.ndarray


def _rank_quantile(cdf, q):
    # smallest rank r with P(R <= r) >= q
    return np.argmax(cdf >= q - 1e-12, axis=-1) + 1


def rank_summaries(draws, priority=None) -> RankSummary:
    """Posterior rank distribution from joint draws of shape (S, ..., 5).

    The MAP rank is the modal rank with ties resolved toward the better rank.
    """
    draws = np.asarray(draws, dtype=float)
    ranks = rank_vector(draws, priority)
    onehot = ranks[..., None] == np.arange(1, N_PLAYERS + 1)
    pmf = onehot.mean(axis=0)
    cdf = np.cumsum(pmf, axis=-1)
    return RankSummary(pmf=pmf,
                       map_rank=np.argmax(pmf, axis=-1) + 1,
                       q20=_rank_quantile(cdf, 0.2),
                       q50=_rank_quantile(cdf, 0.5),
                       q80=_rank_quantile(cdf, 0.8))


def _stack_draws(posteriors) -> np.ndarray:
    sizes = {p.n_draws for p in posteriors}
    if len(sizes) != 1:
        raise ValueError(f"posteriors disagree on draw count: {sorted(sizes)}")
    return np.stack([p.draws for p in posteriors], axis=-1)  # (S, M, 5)


def fgp_rank_summaries(posteriors, cell=None, priority=None) -> RankSummary:
    """Rank pmf / MAP / 20-50-80% quantiles for one cell or all cells."""
    if len(posteriors) != N_PLAYERS:
        raise ValueError("need exactly five posteriors")
    draws = _stack_draws(posteriors)
    if cell is not None:
        draws = draws[:, cell, :]
    return rank_summaries(draws, priority)


@dataclass
class MetricSurfaces:
    player_ids: tuple[str, ...]
    rank_fgp_map: np.ndarray    # (M, 5)
    rank_fgp_q: dict            # {"q20"|"q50"|"q80": (M, 5)}
    rank_fga: np.ndarray        # (M, 5)
    rank_correspondence: np.ndarray  # (M, 5)
    a_star: np.ndarray          # (M, 5)
    lpl: np.ndarray             # (M,)
    lpl_per_shot: np.ndarray    # (M,)
    plc: np.ndarray             # (5, M)
    plc_per_shot: np.ndarray    # (5, M)
    total_lpl: float
    lpl_draws: np.ndarray       # (S,)


def total_lpl_draws(values, draws, fga, priority=None, chunk: int = 64) -> np.ndarray:
    """Total LPL recomputed under each joint posterior draw.

    ``draws`` is (S, M, 5); only cells with attempts are evaluated.
    """
    fga = np.asarray(fga, dtype=float)
    active = fga.sum(axis=-1) > 0
    v = np.asarray(values, dtype=float)[active]
    a = fga[active]
    out = np.empty(draws.shape[0])
    for s0 in range(0, draws.shape[0], chunk):
        d = draws[s0:s0 + chunk][:, active, :]
        cells = lpl_cell(v, d, a, priority)
        out[s0:s0 + chunk] = cells.sum(axis=-1)
    return out


def lineup_metrics(posteriors, fga_surfaces, grid: CourtGrid = GRID,
                   priority=None) -> MetricSurfaces:
    """All per-cell metric surfaces for one lineup.

    Point surfaces use the posterior mean FG%; displayed FG% ranks are MAP
    ranks; ``lpl_draws`` recomputes total LPL for every joint draw.
    """
    if len(posteriors) != N_PLAYERS or len(fga_surfaces) != N_PLAYERS:
        raise ValueError("need five posteriors and five FGA surfaces")
    m = grid.n_cells
    if any(p.mean.shape != (m,) for p in posteriors) or any(
            f.per36.shape != (m,) for f in fga_surfaces):
        raise ValueError(f"surfaces must have {m} cells")
    pids = tuple(p.player_id for p in posteriors)
    if tuple(f.player_id for f in fga_surfaces) != pids:
        raise ValueError("posteriors and FGA surfaces must list the same players in order")

    values = point_values(grid).astype(float)
    xi = np.column_stack([p.mean for p in posteriors])
    fga = np.column_stack([f.per36 for f in fga_surfaces])
    draws = _stack_draws(posteriors)

    summ = rank_summaries(draws, priority)
    r_fga = rank_vector(fga, priority)
    a_star = reallocate(xi, fga, priority)
    lpl = lpl_cell(values, xi, fga, priority)
    plc = plc_cell(lpl, fga, a_star)
    per_shot = lpl_per_shot(lpl, fga)
    return MetricSurfaces(
        player_ids=pids,
        rank_fgp_map=summ.map_rank,
        rank_fgp_q={"q20": summ.q20, "q50": summ.q50, "q80": summ.q80},
        rank_fga=r_fga,
        rank_correspondence=r_fga - summ.map_rank,
        a_star=a_star,
        lpl=lpl,
        lpl_per_shot=per_shot,
        plc=plc.T.copy(),
        plc_per_shot=plc_cell(per_shot, fga, a_star).T.copy(),
        total_lpl=float(np.sum(lpl)),
        lpl_draws=total_lpl_draws(values, draws, fga, priority),
    )
