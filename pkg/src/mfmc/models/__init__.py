"""Parametric marginal and joint distribution families."""

from .marginals import (EULER_GAMMA, Bernoulli, Gaussian, Gumbel, GumbelLocation,
                        MarginalFamily, MomentSpec, bernoulli_moment_spec,
                        family_from_id, gaussian_moment_spec,
                        gumbel_location_moment_spec, gumbel_moment_spec,
                        marginal_eval, marginal_quantile, moment_map)
from .copulas import (Copula, GaussianCopula, GumbelHougaardCopula,
                      IndependenceCopula, bvn_cdf, copula_eval, copula_from_id,
                      pickands_logistic, sample_positive_stable)
from .joint import (BernoulliCopula, BernoulliMixture, BivariateGaussian,
                    BivariateGumbelLogistic, JointModel, joint_hessian_fd,
                    joint_log_density, joint_score_fd, model_from_id,
                    sample_joint)

__all__ = [
    "EULER_GAMMA", "Bernoulli", "Gaussian", "Gumbel", "GumbelLocation",
    "MarginalFamily", "MomentSpec", "bernoulli_moment_spec", "family_from_id",
    "gaussian_moment_spec", "gumbel_location_moment_spec", "gumbel_moment_spec",
    "marginal_eval", "marginal_quantile", "moment_map",
    "Copula", "GaussianCopula", "GumbelHougaardCopula", "IndependenceCopula",
    "bvn_cdf", "copula_eval", "copula_from_id", "pickands_logistic",
    "sample_positive_stable",
    "BernoulliCopula", "BernoulliMixture", "BivariateGaussian",
    "BivariateGumbelLogistic", "JointModel", "joint_hessian_fd",
    "joint_log_density", "joint_score_fd", "model_from_id", "sample_joint",
]
