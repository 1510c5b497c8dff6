# %% [markdown]
# # Adversarial bandits
#
# Only the loss of the played arm is seen.  The learner keeps an
# importance-weighted estimate of the cumulative losses and samples from the
# GNL probabilities of that estimate.  With MNL this is Exp3.

# %%
import numpy as np
from scipy.special import softmax

from choicebandit import (GevBandit, GnlModel, bandit_regret_bound, enumerate_expected_regret,
                          make_adversarial_losses, optimal_bandit_eta, run_gev_bandit)

rng = np.random.default_rng(1)
n, T = 5, 1000

# %% [markdown]
# Exp3 check: the sampling distribution is softmax of the estimate.

# %%
model = GnlModel.mnl(n)
bandit = GevBandit(model, 3.0)
losses = make_adversarial_losses("uniform-random", n, 200, rng)
gap = 0.0
for row in losses:
    expected = softmax(bandit.state.U_hat / 3.0)
    bandit.step(row, rng)
    gap = max(gap, np.abs(bandit.probs[-1] - expected).max())
print("max deviation from softmax:", gap)

# %% [markdown]
# Expected regret against the bound, for each loss generator.

# %%
nl = GnlModel.nl([[0, 1, 2], [3, 4]], [0.5, 0.8])
for kind in ("uniform-random", "single-best-arm", "switching-best"):
    losses = make_adversarial_losses(kind, n, T, rng)
    for name, m in [("Exp3", model), ("GEV-NL", nl)]:
        eta, _ = optimal_bandit_eta(m, T)
        _, _, regret = run_gev_bandit(m, eta, losses, rng.random((200, T)))
        print(f"{kind:16} {name:7} regret {regret.mean():7.1f} +- {regret.std() / np.sqrt(200):4.1f}"
              f"   bound {bandit_regret_bound(m, eta, n, T):6.1f}")

# %% [markdown]
# For tiny problems the expectation can be computed exactly by walking all
# sampling paths, and compared with simulation.

# %%
small = rng.uniform(-1, 0, size=(4, 2))
exact = enumerate_expected_regret(GnlModel.mnl(2), 1.0, small)
_, _, sim = run_gev_bandit(GnlModel.mnl(2), 1.0, small, rng.random((100_000, 4)))
print(f"exact {exact:.5f}  simulated {sim.mean():.5f} +- {sim.std() / np.sqrt(sim.size):.5f}")
