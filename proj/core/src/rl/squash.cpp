#include "dtrbench/rl/squash.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dtrbench/errors.hpp"

namespace dtrbench::rl {

std::string_view to_string(ActionTransform t) { return t == ActionTransform::Clip ? "clip" : "tanh"; }

ActionTransform parse_action_transform(std::string_view name) {
  if (name == "clip") return ActionTransform::Clip;
  if (name == "tanh") return ActionTransform::Tanh;
  throw FormatError("unknown action transform '" + std::string(name) + "'");
}

double squash_tanh(double z, double d_max) { return 0.5 * d_max * (std::tanh(z) + 1.0); }

double unsquash_tanh(double a, double d_max) {
  if (!(a > 0.0 && a < d_max)) throw DomainError("tanh action must lie strictly inside (0, d_max)");
  return std::atanh(2.0 * a / d_max - 1.0);
}

double act_clip(double z, double d_max) { return 0.5 * d_max * (std::clamp(z, -1.0, 1.0) + 1.0); }

double gaussian_log_prob(double z, double mu, double sigma) {
  const double u = (z - mu) / sigma;
  return -0.5 * u * u - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_one_minus_tanh_sq(double z) {
  const double a = std::abs(z);
  return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

double log_prob_tanh_from_logit(double z, double mu, double sigma, double d_max) {
  return gaussian_log_prob(z, mu, sigma) - std::log(0.5 * d_max) - log_one_minus_tanh_sq(z);
}

double log_prob_tanh(double a, double mu, double sigma, double d_max) {
  return log_prob_tanh_from_logit(unsquash_tanh(a, d_max), mu, sigma, d_max);
}

LogProbGrad log_prob_tanh_grad(double a, double mu, double sigma, double d_max) {
  const double z = unsquash_tanh(a, d_max);
  const double u = (z - mu) / sigma;
  return {log_prob_tanh_from_logit(z, mu, sigma, d_max), u / sigma, (u * u - 1.0) / sigma};
}

double apply_transform(ActionTransform t, double z, double d_max) {
  return t == ActionTransform::Tanh ? squash_tanh(z, d_max) : act_clip(z, d_max);
}

double transform_log_prob(ActionTransform t, double z, double mu, double sigma, double d_max) {
  return t == ActionTransform::Tanh ? log_prob_tanh_from_logit(z, mu, sigma, d_max)
                                    : gaussian_log_prob(z, mu, sigma);
}

double tanh_offset_for_rate(double rate, double d_max) { return unsquash_tanh(rate, d_max); }

}  // namespace dtrbench::rl
