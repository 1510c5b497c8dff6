# %% [markdown]
# # Full-information learning with a GNL potential
#
# The learner plays the choice probabilities of the cumulative reward vector.
# With an MNL model this is exponential weights; other models change how
# quickly weight moves between related experts.

# %%
import numpy as np

from choicebandit import GnlModel, experts_regret_bound, make_adversarial_losses, run_experts

rng = np.random.default_rng(0)
n, T = 10, 2000
models = {
    "MNL": GnlModel.mnl(n),
    "NL": GnlModel.nl([list(range(5)), list(range(5, 10))], [0.5, 0.7]),
}

# %% [markdown]
# Rewards lie in [-1, 1]; the bound uses K = 1.  We run each model on 50 random
# sequences and on a sequence where the best expert rotates.

# %%
random_rewards = rng.uniform(-1, 1, size=(50, T, n))
switching = 2 * make_adversarial_losses("switching-best", n, T, rng) + 1

for name, model in models.items():
    b = experts_regret_bound(model, 1.0, 1.0, T)
    eta = b.optimal_eta
    _, r_random = run_experts(model, eta, random_rewards)
    _, r_switch = run_experts(model, eta, switching)
    print(f"{name:4} eta*={eta:6.2f}  bound {b.optimized_bound:7.1f}  "
          f"worst random regret {r_random.max():6.1f}  switching regret {float(r_switch):6.1f}")

# %% [markdown]
# Average regret falls like 1 / sqrt(T).

# %%
for T_ in (250, 1000, 4000):
    model = models["NL"]
    eta = experts_regret_bound(model, 1.0, 1.0, T_).optimal_eta
    _, r = run_experts(model, eta, rng.uniform(-1, 1, size=(20, T_, n)))
    print(f"T={T_:5}  mean regret / T = {r.mean() / T_:.4f}")
