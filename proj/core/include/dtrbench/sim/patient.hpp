#pragma once

#include <array>

#include "dtrbench/random.hpp"
#include "dtrbench/sim/types.hpp"

namespace dtrbench::sim {

/// Four deterministic virtual patients per cohort. Children have the smallest glucose volume
/// and the weakest self-regulation, adults the largest and strongest. Child patient 0 has a
/// correction factor of roughly 25 mg/dL per unit from a resting glucose of 164 mg/dL.
std::array<PatientParams, 4> make_cohort(Cohort cohort);

PatientParams make_patient(Cohort cohort, int patient_id);

/// Time derivative of the surrogate model at `state` under a constant infusion `rate` (U/h):
///
///   s1' = u/60 - s1/tau_sc          s2' = (s1 - s2)/tau_sc
///   I   = s2 / (tau_sc * v_i)       x'  = -p2*x + p2*s_i*I
///   q'  = -k_abs*q                  Ra  = 1000*f_bio*k_abs*q / v_g
///   g'  = -p1*(g - g_b) - x*g + Ra
struct StateDerivative {
  double g, s1, s2, x, q_gut;
};
StateDerivative derivative(const PatientState& state, const PatientParams& params, double rate);

/// One RK4 step of length `dt` minutes, then process noise on glucose (skipped when `noise` is
/// null or noise_sigma is zero). Compartments are floored at zero and glucose at 1 mg/dL.
PatientState step_physiology(const PatientState& state, const PatientParams& params, double rate,
                             double dt, Rng* noise);

/// Adds carbohydrate to the gut compartment; glucose is untouched at the instant of ingestion.
PatientState apply_meal(const PatientState& state, double carbs);

/// Places `units` of insulin directly into the first subcutaneous compartment.
PatientState inject_bolus(const PatientState& state, double units);

}  // namespace dtrbench::sim
