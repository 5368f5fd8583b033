#include "dtrbench/sim/patient.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dtrbench/errors.hpp"

namespace dtrbench::sim {
namespace {

struct CohortBase {
  double v_g, s_i, p1, p2, tau_sc, v_i, k_abs, f_bio, noise_sigma, cgm_sigma;
  std::array<double, 4> g_b;
};

// Child s_i comes from bisection so that 2.36 U from a resting 164 mg/dL produces a 59 mg/dL
// peak drop within three hours (see tests/unit/test_patient.cpp). Adolescent and adult
// sensitivities are set per unit of insulin volume: s_i / v_i = 0.14 and 0.11.
constexpr CohortBase kAdult{1400.0, 1.32, 0.0020, 0.020, 35.0, 12.0, 0.015, 0.9, 0.4, 3.0,
                            {140.0, 135.0, 145.0, 130.0}};
constexpr CohortBase kAdolescent{900.0, 1.12, 0.0010, 0.022, 30.0, 8.0, 0.020, 0.9, 0.5, 3.0,
                                 {150.0, 145.0, 155.0, 140.0}};
constexpr CohortBase kChild{600.0, 0.85814442, 0.0005, 0.025, 25.0, 4.0, 0.025, 0.9, 0.6, 3.0,
                            {164.0, 158.0, 170.0, 152.0}};

// Within-cohort spread on (s_i, v_g); patient 0 is the cohort reference.
constexpr std::array<std::array<double, 2>, 4> kSpread{{
    {1.00, 1.00},
    {1.08, 0.94},
    {0.92, 1.06},
    {1.05, 1.09},
}};

const CohortBase& base_for(Cohort c) {
  switch (c) {
    case Cohort::Adult: return kAdult;
    case Cohort::Adolescent: return kAdolescent;
    case Cohort::Child: return kChild;
  }
  throw ContractViolation("unknown cohort");
}

bool finite_state(const PatientState& s) {
  return std::isfinite(s.g) && std::isfinite(s.s1) && std::isfinite(s.s2) &&
         std::isfinite(s.x) && std::isfinite(s.q_gut);
}

PatientState add_scaled(const PatientState& s, const StateDerivative& d, double h) {
  PatientState out = s;
  out.g += h * d.g;
  out.s1 += h * d.s1;
  out.s2 += h * d.s2;
  out.x += h * d.x;
  out.q_gut += h * d.q_gut;
  return out;
}

}  // namespace

PatientParams make_patient(Cohort cohort, int patient_id) {
  require(patient_id >= 0 && patient_id < 4, "patient_id must be in 0..3");
  const CohortBase& b = base_for(cohort);
  const auto& spread = kSpread[static_cast<std::size_t>(patient_id)];
  PatientParams p;
  p.cohort = cohort;
  p.patient_id = patient_id;
  p.v_g = b.v_g * spread[1];
  p.s_i = b.s_i * spread[0];
  p.p1 = b.p1;
  p.p2 = b.p2;
  p.tau_sc = b.tau_sc;
  p.v_i = b.v_i;
  p.k_abs = b.k_abs;
  p.f_bio = b.f_bio;
  p.g_b = b.g_b[static_cast<std::size_t>(patient_id)];
  p.noise_sigma = b.noise_sigma;
  p.cgm_sigma = b.cgm_sigma;
  p.validate();
  return p;
}

std::array<PatientParams, 4> make_cohort(Cohort cohort) {
  return {make_patient(cohort, 0), make_patient(cohort, 1), make_patient(cohort, 2),
          make_patient(cohort, 3)};
}

void PatientParams::validate() const {
  std::ostringstream bad;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) bad << name << "=" << v << " ";
  };
  positive(v_g, "v_g");
  positive(s_i, "s_i");
  positive(p1, "p1");
  positive(p2, "p2");
  positive(tau_sc, "tau_sc");
  positive(v_i, "v_i");
  positive(k_abs, "k_abs");
  positive(g_b, "g_b");
  if (!(f_bio > 0.0 && f_bio <= 1.0)) bad << "f_bio=" << f_bio << " ";
  if (!(noise_sigma >= 0.0)) bad << "noise_sigma=" << noise_sigma << " ";
  if (!(cgm_sigma >= 0.0)) bad << "cgm_sigma=" << cgm_sigma << " ";
  if (patient_id < 0 || patient_id > 3) bad << "patient_id=" << patient_id << " ";
  if (!bad.str().empty()) throw ContractViolation("invalid patient parameters: " + bad.str());
}

StateDerivative derivative(const PatientState& s, const PatientParams& p, double rate) {
  const double plasma_insulin = s.s2 / (p.tau_sc * p.v_i);
  const double ra = 1000.0 * p.f_bio * p.k_abs * s.q_gut / p.v_g;
  return {
      -p.p1 * (s.g - p.g_b) - s.x * s.g + ra,
      rate / 60.0 - s.s1 / p.tau_sc,
      (s.s1 - s.s2) / p.tau_sc,
      -p.p2 * s.x + p.p2 * p.s_i * plasma_insulin,
      -p.k_abs * s.q_gut,
  };
}

PatientState step_physiology(const PatientState& state, const PatientParams& params, double rate,
                             double dt, Rng* noise) {
  require(dt > 0.0 && dt <= kControlIntervalMin, "dt must be in (0, 15] minutes");
  require(rate >= 0.0 && std::isfinite(rate), "insulin rate must be finite and non-negative");
  if (!finite_state(state)) {
    std::ostringstream msg;
    msg << "non-finite patient state entering integrator: g=" << state.g << " s1=" << state.s1
        << " s2=" << state.s2 << " x=" << state.x << " q_gut=" << state.q_gut;
    throw SimulationFault(msg.str());
  }

  const StateDerivative k1 = derivative(state, params, rate);
  const StateDerivative k2 = derivative(add_scaled(state, k1, dt / 2), params, rate);
  const StateDerivative k3 = derivative(add_scaled(state, k2, dt / 2), params, rate);
  const StateDerivative k4 = derivative(add_scaled(state, k3, dt), params, rate);

  PatientState next = state;
  const double w = dt / 6.0;
  next.g += w * (k1.g + 2 * k2.g + 2 * k3.g + k4.g);
  next.s1 += w * (k1.s1 + 2 * k2.s1 + 2 * k3.s1 + k4.s1);
  next.s2 += w * (k1.s2 + 2 * k2.s2 + 2 * k3.s2 + k4.s2);
  next.x += w * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  next.q_gut += w * (k1.q_gut + 2 * k2.q_gut + 2 * k3.q_gut + k4.q_gut);

  if (noise != nullptr && params.noise_sigma > 0.0) {
    next.g += params.noise_sigma * std::sqrt(dt) * standard_normal(*noise);
  }

  if (!finite_state(next)) {
    std::ostringstream msg;
    msg << "integrator produced a non-finite state for " << to_string(params.cohort) << "#"
        << params.patient_id << " at t=" << state.t_elapsed << " min (rate " << rate << " U/h)";
    throw SimulationFault(msg.str());
  }

  next.s1 = std::max(next.s1, 0.0);
  next.s2 = std::max(next.s2, 0.0);
  next.x = std::max(next.x, 0.0);
  next.q_gut = std::max(next.q_gut, 0.0);
  next.g = std::max(next.g, 1.0);
  next.t_elapsed = state.t_elapsed + dt;
  return next;
}

PatientState apply_meal(const PatientState& state, double carbs) {
  require(carbs > 0.0 && std::isfinite(carbs), "meal carbs must be positive");
  PatientState next = state;
  next.q_gut += carbs;
  return next;
}

PatientState inject_bolus(const PatientState& state, double units) {
  require(units >= 0.0 && std::isfinite(units), "bolus must be non-negative");
  PatientState next = state;
  next.s1 += units;
  return next;
}

}  // namespace dtrbench::sim
