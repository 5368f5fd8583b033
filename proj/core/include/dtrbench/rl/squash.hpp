#pragma once

#include <string_view>

#include "dtrbench/sim/types.hpp"

namespace dtrbench::rl {

enum class ActionTransform { Clip, Tanh };

std::string_view to_string(ActionTransform t);
ActionTransform parse_action_transform(std::string_view name);

/// a = d/2 (tanh z + 1), in the open interval (0, d).
double squash_tanh(double z, double d_max = sim::kMaxRate);
/// Inverse of squash_tanh. Requires a in (0, d).
double unsquash_tanh(double a, double d_max = sim::kMaxRate);

/// a = d/2 (clip(z, -1, 1) + 1).
double act_clip(double z, double d_max = sim::kMaxRate);

double gaussian_log_prob(double z, double mu, double sigma);

/// log(1 - tanh^2 z), stable for large |z|.
double log_one_minus_tanh_sq(double z);

/// Density of the squashed action given its pre-image z.
double log_prob_tanh_from_logit(double z, double mu, double sigma, double d_max = sim::kMaxRate);
/// Density of a squashed action. Throws DomainError unless a is in (0, d).
double log_prob_tanh(double a, double mu, double sigma, double d_max = sim::kMaxRate);

struct LogProbGrad {
  double value = 0;
  double d_mu = 0;
  double d_sigma = 0;
};
/// Value and analytic derivatives wrt mu and sigma (the Jacobian term depends on neither).
LogProbGrad log_prob_tanh_grad(double a, double mu, double sigma, double d_max = sim::kMaxRate);

/// Action for logit z under the transform.
double apply_transform(ActionTransform t, double z, double d_max = sim::kMaxRate);
/// Log-prob used in the PPO ratio: the change-of-variables density for Tanh, the raw
/// Gaussian density of z for Clip (the common, biased treatment of clipped actions).
double transform_log_prob(ActionTransform t, double z, double mu, double sigma,
                          double d_max = sim::kMaxRate);

/// Logit whose squashed action is `rate`: artanh(2 rate / d - 1). For rate 0.5, d 9: -1.4166.
double tanh_offset_for_rate(double rate, double d_max = sim::kMaxRate);

}  // namespace dtrbench::rl
