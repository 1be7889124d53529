# %% [markdown]
# # Points lost on the scoreboard
#
# Team scores are regressed on offence, defence, home court and the game's
# total lineup points lost.  The sampler is block Gibbs for the linear
# effects plus a Metropolis step on log sigma.

# %%
from shotalloc.score_model import fit_score_model, points_lost_summary, simulate_scores

obs, truth = simulate_scores(n_teams=30, games_per_team=82, theta=-0.62, seed=7)
post = fit_score_model(obs, chains=4, iterations=2000, warmup=1000, seed=7)
for name in ("mu", "gamma", "theta", "sigma"):
    s = post.summary(name)
    print(f"{name:>5}: mean {s['mean']:8.3f}  95% HPD ({s['hpd_low']:.3f}, {s['hpd_high']:.3f})"
          f"  rhat {s['rhat']:.3f}   truth {truth[name]}")
print("converged:", post.converged)

# %%
by_team = {}
for o in obs:
    by_team.setdefault(o.team, []).append(o.tglpl)
table = points_lost_summary(post.theta["mean"], by_team)
worst = sorted(table.items(), key=lambda kv: -kv[1]["mean"])[:5]
for team, row in worst:
    print(f"{team}: {row['mean']:.2f} points lost per game (80% range {row['q10']:.2f} to {row['q90']:.2f})")
