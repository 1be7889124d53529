"""Bayesian game-score regression on total game lineup points lost.

    score = mu + alpha[team] + beta[opponent] + gamma * home + theta * tglpl + eps
    eps ~ N(0, sigma^2)

Priors: mu ~ N(100, 10^2); alpha, beta, gamma, theta ~ N(0, 10^2);
sigma ~ Gamma(shape=2, rate=0.2).  Offence and defence effects are
constrained to sum to zero.  Sampling is Metropolis-within-Gibbs: the
linear coefficients are drawn jointly from their normal full conditional
and log(sigma) takes a random-walk Metropolis step.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .surfaces import task_seed

log = logging.getLogger(__name__)

PRIOR_MU = (100.0, 10.0)
PRIOR_SD = 10.0
SIGMA_SHAPE, SIGMA_RATE = 2.0, 0.2
RHAT_LIMIT = 1.05

OBS_COLUMNS = ("game_id", "team_id", "opponent_id", "home", "score", "tglpl")


@dataclass(frozen=True)
class ScoreObservation:
    team: str
    opponent: str
    game: str
    score: float
    home: bool
    tglpl: float

    def __post_init__(self):
        if self.score < 0:
            raise ValueError("score must be nonnegative")


def read_observations(path) -> list[ScoreObservation]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in OBS_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"observations file missing columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            try:
                out.append(ScoreObservation(row["team_id"], row["opponent_id"], row["game_id"],
                                            float(row["score"]), row["home"].strip() == "1",
                                            float(row["tglpl"])))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
    return out


def write_observations(obs, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(OBS_COLUMNS)
        for o in obs:
            w.writerow([o.game, o.team, o.opponent, int(o.home), repr(float(o.score)),
                        repr(float(o.tglpl))])


def hpd_interval(draws, prob: float = 0.95) -> tuple[float, float]:
    """Shortest interval containing ``prob`` of the draws."""
    x = np.sort(np.asarray(draws, dtype=float).ravel())
    n = len(x)
    k = int(np.ceil(prob * n))
    if k >= n:
        return float(x[0]), float(x[-1])
    widths = x[k - 1:] - x[:n - k + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k - 1])


def split_rhat(chains) -> float:
    """Split-chain potential scale reduction for a (chains, draws) array."""
    c = np.asarray(chains, dtype=float)
    n = c.shape[1] // 2
    halves = np.concatenate([c[:, :n], c[:, n:2 * n]], axis=0)
    m = halves.shape[0]
    means = halves.mean(axis=1)
    w = halves.var(axis=1, ddof=1).mean()
    b = n * means.var(ddof=1)
    if w == 0:
        return 1.0 if b == 0 else np.inf
    var_plus = (n - 1) / n * w + b / n
    return float(np.sqrt(var_plus / w))


class _Design:
    """Effect-coded design matrix and matching Gaussian prior."""

    def __init__(self, obs):
        teams = sorted({o.team for o in obs} | {o.opponent for o in obs})
        off = {o.team for o in obs}
        dfn = {o.opponent for o in obs}
        missing = [t for t in teams if t not in off or t not in dfn]
        if missing:
            raise ValueError(f"teams missing as offence or defence: {missing}")
        if len(teams) < 2:
            raise ValueError("need at least two teams")
        self.teams = teams
        t = len(teams)
        ix = {name: i for i, name in enumerate(teams)}
        n = len(obs)
        p = 1 + 2 * (t - 1) + 2
        x = np.zeros((n, p))
        x[:, 0] = 1.0
        for r, o in enumerate(obs):
            for block, team in ((0, o.team), (1, o.opponent)):
                base = 1 + block * (t - 1)
                k = ix[team]
                if k < t - 1:
                    x[r, base + k] = 1.0
                else:
                    x[r, base:base + t - 1] = -1.0
            x[r, -2] = float(o.home)
            x[r, -1] = o.tglpl
        self.x = x
        self.y = np.array([o.score for o in obs], dtype=float)
        # prior precision: independent N(0, 10^2) on all t effects, restricted
        # to the sum-to-zero subspace
        prec = np.zeros((p, p))
        prec[0, 0] = 1 / PRIOR_MU[1] ** 2
        blk = (np.eye(t - 1) + np.ones((t - 1, t - 1))) / PRIOR_SD ** 2
        for block in range(2):
            s = 1 + block * (t - 1)
            prec[s:s + t - 1, s:s + t - 1] = blk
        prec[-2, -2] = prec[-1, -1] = 1 / PRIOR_SD ** 2
        self.prior_prec = prec
        m0 = np.zeros(p)
        m0[0] = PRIOR_MU[0]
        self.prior_shift = prec @ m0
        self.xtx = x.T @ x
        self.xty = x.T @ self.y

    def expand(self, coef):
        """(n, p) free coefficients -> dict of named parameter arrays."""
        t = len(self.teams)
        a = coef[:, 1:t]
        b = coef[:, t:2 * t - 1]
        return {"mu": coef[:, 0],
                "alpha": np.column_stack([a, -a.sum(axis=1)]),
                "beta": np.column_stack([b, -b.sum(axis=1)]),
                "gamma": coef[:, -2],
                "theta": coef[:, -1]}


def _log_sigma_target(u, rss, n):
    # log p(u = log sigma | rest), including the Jacobian of the transform
    return SIGMA_SHAPE * u - SIGMA_RATE * np.exp(u) - n * u - 0.5 * rss * np.exp(-2 * u)


def _run_chain(design: _Design, iterations, warmup, seed):
    rng = np.random.default_rng(seed)
    x, y = design.x, design.y
    n, p = x.shape
    sd_y = float(np.std(y)) or 1.0
    sigma = sd_y * float(np.exp(rng.normal(0, 0.3)))
    step = 0.1
    keep = iterations - warmup
    coefs = np.empty((keep, p))
    sigmas = np.empty(keep)
    accepted = 0
    window_acc, window = 0, 0
    for it in range(iterations):
        prec = design.xtx / sigma ** 2 + design.prior_prec
        chol = np.linalg.cholesky(prec)
        rhs = design.xty / sigma ** 2 + design.prior_shift
        mean = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
        coef = mean + np.linalg.solve(chol.T, rng.standard_normal(p))

        resid = y - x @ coef
        rss = float(resid @ resid)
        u = np.log(sigma)
        u_new = u + step * rng.standard_normal()
        log_r = _log_sigma_target(u_new, rss, n) - _log_sigma_target(u, rss, n)
        acc = np.log(rng.random()) < log_r
        if acc:
            sigma = float(np.exp(u_new))
        if it < warmup:
            window_acc += acc
            window += 1
            if window == 50:
                rate = window_acc / window
                if rate < 0.3:
                    step *= 0.8
                elif rate > 0.5:
                    step *= 1.25
                window_acc = window = 0
        else:
            accepted += acc
            coefs[it - warmup] = coef
            sigmas[it - warmup] = sigma
    return coefs, sigmas, accepted / max(keep, 1), step


@dataclass
class ScoreModelPosterior:
    teams: list
    draws: dict                    # name -> (chains, draws[, teams])
    rhat: dict = field(default_factory=dict)
    acceptance: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(v <= RHAT_LIMIT for v in self.rhat.values())

    def pooled(self, name):
        d = self.draws[name]
        return d.reshape(-1, *d.shape[2:])

    def summary(self, name, prob: float = 0.95) -> dict:
        d = self.pooled(name)
        if d.ndim == 1:
            lo, hi = hpd_interval(d, prob)
            return {"mean": float(d.mean()), "hpd_low": lo, "hpd_high": hi,
                    "rhat": self.rhat[name]}
        out = {}
        for j, team in enumerate(self.teams):
            lo, hi = hpd_interval(d[:, j], prob)
            out[team] = {"mean": float(d[:, j].mean()), "hpd_low": lo, "hpd_high": hi,
                         "rhat": self.rhat[f"{name}[{team}]"]}
        return out

    @property
    def theta(self) -> dict:
        return self.summary("theta")

    def to_dict(self) -> dict:
        params = {}
        for name in ("mu", "alpha", "beta", "gamma", "theta", "sigma"):
            d = self.pooled(name)
            if d.ndim == 1:
                params[name] = {"draws": d.tolist(), "summary": self.summary(name)}
            else:
                params[name] = {"teams": list(self.teams),
                                "draws": d.tolist(),
                                "summary": self.summary(name)}
        return {"parameters": params,
                "diagnostics": {"rhat_max": max(self.rhat.values()),
                                "converged": self.converged,
                                "acceptance_sigma": self.acceptance}}


def fit_score_model(obs, chains: int = 4, iterations: int = 2000, warmup: int = 1000,
                    seed: int = 0) -> ScoreModelPosterior:
    """Sample the score-regression posterior.

    Chains run with seeds derived from ``seed`` and the chain index.  Check
    ``converged`` on the result: any split R-hat above 1.05 marks it.
    """
    if chains < 2:
        raise ValueError("need at least two chains for convergence diagnostics")
    if not 0 <= warmup < iterations:
        raise ValueError("need 0 <= warmup < iterations")
    design = _Design(list(obs))
    runs = [_run_chain(design, iterations, warmup, task_seed(seed, "chain", c))
            for c in range(chains)]
    coefs = np.stack([r[0] for r in runs])
    per_chain = [design.expand(c) for c in coefs]
    draws = {k: np.stack([pc[k] for pc in per_chain]) for k in per_chain[0]}
    draws["sigma"] = np.stack([r[1] for r in runs])

    rhat = {}
    for name, d in draws.items():
        if d.ndim == 2:
            rhat[name] = split_rhat(d)
        else:
            for j, team in enumerate(design.teams):
                rhat[f"{name}[{team}]"] = split_rhat(d[:, :, j])
    post = ScoreModelPosterior(design.teams, draws, rhat, [float(r[2]) for r in runs])
    if not post.converged:
        log.warning("score model not converged: max rhat %.3f", max(rhat.values()))
    return post


def points_lost_summary(theta_hat: float, tglpl_by_team: dict,
                        quantiles=(0.1, 0.5, 0.9)) -> dict:
    """Per-team actual points lost per game, ``-theta_hat * TGLPL``.

    Reported as a loss magnitude, so a negative ``theta_hat`` and positive
    TGLPL give positive points lost.
    """
    out = {}
    for team in sorted(tglpl_by_team):
        lost = -theta_hat * np.asarray(tglpl_by_team[team], dtype=float)
        row = {"games": int(lost.size), "points_lost": lost.tolist(),
               "mean": float(lost.mean()) if lost.size else 0.0}
        for q in quantiles:
            row[f"q{int(round(q * 100))}"] = float(np.quantile(lost, q)) if lost.size else 0.0
        out[team] = row
    return out


def simulate_scores(n_teams: int = 30, games_per_team: int = 82, mu: float = 100.0,
                    gamma: float = 2.0, theta: float = -0.62, sigma: float = 10.0,
                    team_sd: float = 3.0, tglpl_shape: float = 4.0,
                    tglpl_scale: float = 1.0, seed: int = 0):
    """Simulate a season of score observations from the regression model.

    Each round pairs all teams at random, so every team plays
    ``games_per_team`` games (``n_teams`` must be even).  TGLPL covariates are
    Gamma(``tglpl_shape``, ``tglpl_scale``).  Returns ``(observations, truth)``.
    """
    if n_teams % 2:
        raise ValueError("n_teams must be even")
    rng = np.random.default_rng(seed)
    teams = [f"T{i:02d}" for i in range(n_teams)]
    alpha = rng.normal(0, team_sd, n_teams)
    alpha -= alpha.mean()
    beta = rng.normal(0, team_sd, n_teams)
    beta -= beta.mean()
    obs = []
    g = 0
    for _ in range(games_per_team):
        order = rng.permutation(n_teams)
        for h, a in order.reshape(-1, 2):
            game = f"G{g:05d}"
            g += 1
            for team, opp, home in ((h, a, True), (a, h, False)):
                t = rng.gamma(tglpl_shape, tglpl_scale)
                score = mu + alpha[team] + beta[opp] + gamma * home + theta * t \
                    + rng.normal(0, sigma)
                obs.append(ScoreObservation(teams[team], teams[opp], game,
                                            max(score, 0.0), home, float(t)))
    truth = {"mu": mu, "gamma": gamma, "theta": theta, "sigma": sigma,
             "alpha": dict(zip(teams, alpha)), "beta": dict(zip(teams, beta))}
    return obs, truth
