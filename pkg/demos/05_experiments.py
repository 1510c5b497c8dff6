# %% [markdown]
# # Replicated experiments
#
# The harness runs every variant on the same environments with the same random
# stream per replication, then averages per-step curves.  This is a smaller
# version of the nine-arm study; ``choicebandit presets run e2-nl-env`` runs the
# full one.

# %%
from pathlib import Path

from choicebandit import get_preset, run_experiment, write_outputs

config = get_preset("e2-nl-env").with_overrides(replications=200, steps=500)
result = run_experiment(config)

for name, v in result.variants.items():
    print(f"{name:7} total average reward {v.total_average_reward:.3f}   "
          f"final pct optimal {v.pct_optimal[-1]:.3f}")

# %% [markdown]
# Paired differences (same environment, same random stream) give tight
# standard errors.

# %%
for nl in ("NL1", "NL2", "NL3"):
    mean, se = result.paired_gap(nl, "MNL-GB", "reward")
    print(f"{nl} - MNL-GB reward gap {mean:+.3f} ({mean / se:.1f} SE)")

# %% [markdown]
# CSV, SVG and a metadata file are written next to this script.

# %%
out = Path(__file__).resolve().parent / "output"
for path in write_outputs(result, out):
    print("wrote", path.relative_to(out.parent))
