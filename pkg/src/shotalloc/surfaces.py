"""Per-player FG% posteriors over the grid and per-lineup FGA-per-36 surfaces.

FG% backends are region-constant Beta posteriors; anything producing an
``(S, M)`` draw matrix can be wrapped with :meth:`FgPctPosterior.from_draws`.
FGA surfaces are deterministic.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .court import GRID, CourtGrid, RegionPartition
from .ingest import LineupDataset, shot_arrays

DEFAULT_DRAWS = 500
_EPS = 1e-9


def task_seed(master_seed: int, *key) -> int:
    """Stable per-task seed derived from a master seed and a task key."""
    h = hashlib.sha256(repr((int(master_seed),) + tuple(map(str, key))).encode())
    return int.from_bytes(h.digest()[:8], "little")


@dataclass(frozen=True)
class FgPctPosterior:
    player_id: str
    draws: np.ndarray
    mean: np.ndarray
    backend: str = "external"

    def __post_init__(self):
        d = np.atleast_2d(np.asarray(self.draws, dtype=float))
        m = np.asarray(self.mean, dtype=float)
        if d.shape[1] != m.shape[0]:
            raise ValueError(f"draws {d.shape} and mean {m.shape} disagree on M")
        if not (np.all(d > 0) and np.all(d < 1)):
            raise ValueError("FG% draws must lie strictly inside (0, 1)")
        object.__setattr__(self, "draws", d)
        object.__setattr__(self, "mean", m)

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    @classmethod
    def from_draws(cls, player_id, draws, backend="external"):
        draws = np.atleast_2d(np.asarray(draws, dtype=float))
        return cls(player_id, draws, draws.mean(axis=0), backend)

    @classmethod
    def degenerate(cls, player_id, values, n_draws=1, backend="point"):
        """Posterior with every draw equal to ``values``."""
        values = np.asarray(values, dtype=float)
        return cls(player_id, np.tile(values, (n_draws, 1)), values.copy(), backend)


@dataclass(frozen=True)
class FgaSurface:
    team_id: str
    lineup: tuple[str, ...]
    player_id: str
    per36: np.ndarray
    raw_count: int
    total_minutes: float

    def __post_init__(self):
        if np.any(self.per36 < 0):
            raise ValueError("FGA rates must be nonnegative")


def _centre_draws(draws: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Shift each column of ``draws`` so its average equals ``target``.

    The deviation is contracted where the shift would leave (0, 1).
    """
    dev = draws - draws.mean(axis=0)
    lo = np.min(dev, axis=0)
    hi = np.max(dev, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        c_lo = np.where(lo < 0, (target - _EPS) / -lo, np.inf)
        c_hi = np.where(hi > 0, (1 - _EPS - target) / hi, np.inf)
    c = np.minimum(1.0, np.minimum(c_lo, c_hi))
    out = target + c * dev
    # residual rounding of the column mean
    out += target - out.mean(axis=0)
    return out


def _region_posterior(player_id, partition, a_shape, b_shape, n_draws, seed, backend):
    rng = np.random.default_rng(seed)
    point = a_shape / (a_shape + b_shape)
    if n_draws == 1:
        region_draws = point[None, :]
    else:
        region_draws = rng.beta(a_shape, b_shape, size=(n_draws, len(point)))
        region_draws = _centre_draws(np.clip(region_draws, _EPS, 1 - _EPS), point)
    idx = partition.region_of_cell
    return FgPctPosterior(player_id, region_draws[:, idx], point[idx], backend)


def region_counts(shots, partition: RegionPartition, grid: CourtGrid = GRID):
    """(makes, attempts) per region; out-of-grid shots count in the residual."""
    cells, made = shot_arrays(shots, grid)
    r = partition.index_of_cells(cells)
    a = np.bincount(r, minlength=partition.n_regions).astype(float)
    m = np.bincount(r, weights=made.astype(float), minlength=partition.n_regions)
    return m, a


def estimate_fgp_empirical(player_id, shots, partition: RegionPartition,
                           pseudo_makes: float = 1, pseudo_attempts: float = 5,
                           draws: int = DEFAULT_DRAWS, seed: int = 0,
                           grid: CourtGrid = GRID) -> FgPctPosterior:
    """Region FG% with pseudo-counts added to every region.

    The point estimate in a region with ``m`` makes from ``a`` attempts is
    ``(m + pseudo_makes) / (a + pseudo_attempts)``; draws come from the
    matching Beta.  Pass ``shots=[]`` for replacement players.
    """
    if not pseudo_attempts > pseudo_makes >= 0:
        raise ValueError("need pseudo_attempts > pseudo_makes >= 0")
    if pseudo_makes == 0:
        raise ValueError("pseudo_makes must be positive to keep draws interior")
    m, a = region_counts(shots, partition, grid)
    return _region_posterior(player_id, partition, m + pseudo_makes,
                             a - m + pseudo_attempts - pseudo_makes,
                             draws, seed, "empirical")


def league_region_rates(league_shots, partition: RegionPartition,
                        grid: CourtGrid = GRID, clip: float = 1e-3) -> np.ndarray:
    """League FG% per region; empty regions take the global league FG%."""
    m, a = region_counts(league_shots, partition, grid)
    total = a.sum()
    overall = m.sum() / total if total else 0.5
    with np.errstate(invalid="ignore", divide="ignore"):
        rate = np.where(a > 0, m / a, overall)
    return np.clip(rate, clip, 1 - clip)


def estimate_fgp_shrunk(player_id, shots, league, partition: RegionPartition,
                        concentration: float = 10.0, draws: int = DEFAULT_DRAWS,
                        seed: int = 0, grid: CourtGrid = GRID) -> FgPctPosterior:
    """Beta posterior shrunk toward the league FG% of each region.

    ``league`` is either a list of league shots or a precomputed per-region
    rate vector from :func:`league_region_rates`.
    """
    if not concentration > 0:
        raise ValueError("concentration must be positive")
    prior = (np.asarray(league, dtype=float)
             if isinstance(league, np.ndarray) else league_region_rates(league, partition, grid))
    m, a = region_counts(shots, partition, grid)
    return _region_posterior(player_id, partition,
                             concentration * prior + m,
                             concentration * (1 - prior) + a - m,
                             draws, seed, "shrunk")


def _gauss_1d(n: int, h: float) -> np.ndarray:
    """(n, n) kernel matrix: K[t, s] is weight at cell t from a source at s,
    each column renormalised to sum to one inside the grid."""
    pos = np.arange(n)
    k = np.exp(-0.5 * ((pos[:, None] - pos[None, :]) / h) ** 2)
    return k / k.sum(axis=0, keepdims=True)


def smooth_counts(counts: np.ndarray, h: float, grid: CourtGrid = GRID) -> np.ndarray:
    """Isotropic Gaussian smoothing of a count grid (std ``h`` feet).

    Each source cell spreads its mass over the grid only, so the total is
    preserved.
    """
    c = np.asarray(counts, dtype=float).reshape(grid.shape)
    if h <= 0:
        return c.ravel().copy()
    kr = _gauss_1d(grid.depth_cells, h / grid.cell_size)
    kc = _gauss_1d(grid.width_cells, h / grid.cell_size)
    return (kr @ c @ kc.T).ravel()


def estimate_fga(lineup: LineupDataset, player_id: str, bandwidth: float = 3.0,
                 smoothing: str = "gaussian-kernel", grid: CourtGrid = GRID) -> FgaSurface:
    """Attempts-per-36 surface for one player within one lineup.

    Out-of-grid shots are dropped; ``raw_count`` counts in-grid attempts.
    """
    if not lineup.total_minutes > 0:
        raise ValueError(f"lineup {lineup.key} has no minutes; cannot normalise")
    if smoothing not in ("none", "gaussian-kernel"):
        raise ValueError(f"unknown smoothing {smoothing!r}")
    cells, _ = shot_arrays(lineup.player_shots(player_id), grid)
    cells = cells[cells >= 0]
    counts = np.bincount(cells, minlength=grid.n_cells).astype(float)
    raw = int(counts.sum())
    surf = smooth_counts(counts, bandwidth if smoothing != "none" else 0.0, grid)
    if raw:
        surf *= raw / surf.sum()
    surf = np.maximum(surf, 0.0)
    per36 = surf / lineup.total_minutes * 36.0
    return FgaSurface(lineup.team_id, lineup.players, player_id, per36, raw,
                      lineup.total_minutes)
