# %% [markdown]
# # Choice models and their surplus
#
# A GNL model is a top-level scale, a set of nests with their own scales and
# the share of each alternative allocated to each nest.  The surplus of a
# utility vector is smooth and its gradient is the vector of choice
# probabilities.

# %%
import numpy as np

from choicebandit import GnlModel, Nest, choice_probabilities, prob_jacobian, surplus, surplus_constants

u = np.array([1.0, 0.8, 0.2, -0.5])

mnl = GnlModel.mnl(4)
nl = GnlModel.nl([[0, 1], [2, 3]], [0.3, 0.9])
gnl = GnlModel(4, 1.0, (Nest("A", 0.3, {0: 1.0, 1: 0.5}),
                        Nest("B", 0.9, {1: 0.5, 2: 1.0, 3: 1.0})))

for name, model in [("MNL", mnl), ("NL", nl), ("GNL", gnl)]:
    print(f"{name:4} P = {np.round(choice_probabilities(model, u), 4)}  E(u) = {surplus(model, u):.4f}")

# %% [markdown]
# Arms 0 and 1 share a tight nest (scale 0.3) in the NL model, so they compete
# mostly with each other: arm 1 loses more share to arm 0 than under MNL.
#
# The gradient identity can be checked with central differences.

# %%
h = 1e-6
fd = np.array([(surplus(nl, u + h * e) - surplus(nl, u - h * e)) / (2 * h) for e in np.eye(4)])
print("max |FD - P| =", np.abs(fd - choice_probabilities(nl, u)).max())

# %% [markdown]
# The Jacobian of the probabilities is the Hessian of the surplus: symmetric,
# rows summing to zero.

# %%
J = prob_jacobian(nl, u)
print(np.round(J, 4))
print("asymmetry", np.abs(J - J.T).max(), " row sums", np.abs(J.sum(axis=1)).max())

# %% [markdown]
# Constants used by the regret bounds.  For nested logit E(0) sits between
# min mu_ell * ln n and ln n.

# %%
c = surplus_constants(nl)
print(f"L = {c.smooth_L:.3f}, C = {c.diff_C:.3f}, E(0) = {c.alpha_exact:.4f} "
      f"in [{c.alpha_lower:.4f}, {c.alpha_upper:.4f}]")
