"""Discrete-choice (GEV / generalized nested logit) surplus functions and the
bandit algorithms built on them, plus a seeded experiment harness."""
from .gev import (ChoiceFactors, GnlModel, ModelError, Nest, check_differential_consistency,
                  choice_factors, choice_probabilities, diff_consistency_constant,
                  generating_value, prob_jacobian, sample_index, smoothness_constant, surplus,
                  surplus_constants)
from .envs import (StochasticEnv, load_loss_csv, make_adversarial_losses, make_mnl_env,
                   make_nl_env, make_nl_large_env, save_loss_csv)
from .experts import (BoundViolation, Experts, experts_decide, experts_observe, experts_regret,
                      experts_regret_bound, run_experts)
from .adversarial import (GevBandit, LossOnlyViolation, bandit_regret_bound, bandit_sample,
                          bandit_step, enumerate_expected_regret, estimate_gain,
                          expected_regret, optimal_bandit_eta, run_gev_bandit)
from .gradient import (GradBanditVariant, GradientBandit, PreferenceState, classical_gb_update,
                       gb_update_generic, gb_update_nl)
from .harness import (AgentSpec, AggregateResult, ConfigError, EnvSpec, ExperimentConfig,
                      check_bounds, config_from_json, run_experiment)
from .presets import get_preset, preset_experiments
from .report import emit_csv, emit_svg, write_outputs

__version__ = "0.1.0"
