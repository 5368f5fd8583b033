#include "dtrbench/llm/prompts.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "dtrbench/errors.hpp"

namespace dtrbench::llm {

namespace {

constexpr std::string_view kBaseSystem =
    R"(You are a clinical specialist responsible for managing patients with Type-1 Diabetes. Your primary objective is to maintain the patient's blood glucose levels within the safe range of **70-140 mg/dL** by administering appropriate insulin doses.

### Monitoring and Decision Frequency
Blood glucose levels are observed every **15 minutes**. Your task is to determine the insulin dose rate in units/hour every **15 minutes** based on the latest glucose readings and trends.

### Insulin Administration
    - Insulin lowers blood glucose levels with a delayed effect. Your decisions will define the insulin dose rate to be administered over the next **15 minutes** to maintain a normal glucose level in a long run.

    - We do not distinguish between basal and bolus insulin. The dosing decision is based on the latest glucose readings and trends.

    - **Rate Range**: You MUST provide a dose in the range of [0 to 9] units/hour, inclusive.

    - **Administration Interval**: The specified dose is distributed evenly over the 15-minute period, i.e., the total dosage is your_action/60*15. You only need to provide the dose rate in units/hour. Do NOT specify the total dose.)";

constexpr std::string_view kPriorBlock = R"(### Hidden Variables
- **Food Intake**: Food consumption increases blood glucose levels.
- **Exercise**: Exercise reduces blood glucose levels.
- **Estimation**: Since food intake and exercise are not directly observable, estimate based on time of day and observed glucose trends using clinical judgment and common sense.

### Penalties and Risks
- **Blood Glucose Outside Safe Range (70-140 mg/dL)**:
  - **Above 140 mg/dL**: Hyperglycaemia penalties.
  - **Below 70 mg/dL**: Hypoglycaemia penalties, with increased severity.
  - **Above 500 or below 40 mg/dL**: EXTREMELY DANGEROUS, your treatment will be considered a failure and the patient will die!
- **Insulin Dose Considerations**:
  - **High Doses**: Use cautiously to avoid rapid and excessive lowering of glucose levels.
  - **Low Glucose Levels (<70 mg/dL)**:
    - **Action**: Immediately cease insulin administration until glucose levels rise above 70 mg/dL.
    - **Priority**: Prevent hypoglycaemia due to its acute dangers.

### Safety Precautions
- **Avoid Overdosing Insulin**: Prevent hypoglycaemia by carefully balancing insulin doses.
- **Insulin Stacking Awareness**: You should consider the accumulated dosage and the delayed effect of insulin on glucose levels carefully.
- **Prioritize Patient Safety**: Always aim to keep glucose levels within the target range. If uncertainty exists, opt for a lower or zero insulin dose to ensure safety.)";

constexpr std::string_view kTerseRequest =
    "Determine the optimal insulin rate for the current 15-minute interval to maintain a patient's "
    "blood glucose levels within the safe range of 70-140 mg/dL. Choose a dosage value. For example, "
    "if you choose 0 units, enter 0. DO NOT say anything else.";

constexpr std::string_view kCotRequest =
    "Determine the optimal insulin rate for the current 15-minute interval to maintain a patient's "
    "blood glucose levels within the safe range of 70-140 mg/dL. First, analyse the current state "
    "step-by-step. Finally, you must choose a dosage value enclosed in answer tags (i.e., <ans> and "
    "</ans>]), for example, <ans>0</ans>, without any non-numerical word. Let's think step by step.";

constexpr std::string_view kMealCotRequest =
    "Determine the optimal insulin rate for the current 15-minute interval to maintain a patient's "
    "blood glucose levels within the safe range of 70-140 mg/dL. First, analyse the current state "
    "step-by-step by estimating the Correction Factor(CF) and Total Daily Insulin(TDI). If the "
    "patient has taken any meal, you must consider the meal effect. Finally, you must choose a "
    "dosage value enclosed in answer tags (i.e., <ans> and </ans>]), for example, <ans>0</ans>, "
    "without any non-numerical word. Let's think step by step.";

const std::string& prior_system() {
  static const std::string text = std::string(kBaseSystem) + "\n\n" + std::string(kPriorBlock);
  return text;
}

}  // namespace

std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::BaseZeroShot: return "base";
    case PromptKind::PriorZeroShot: return "prior";
    case PromptKind::PriorCot: return "cot";
    case PromptKind::PriorMealCot: return "meal-cot";
  }
  throw ContractViolation("unknown prompt kind");
}

PromptKind parse_prompt_kind(std::string_view name) {
  for (PromptKind k : kAllPromptKinds)
    if (to_string(k) == name) return k;
  throw FormatError("unknown prompt kind '" + std::string(name) + "'");
}

bool is_cot(PromptKind k) { return k == PromptKind::PriorCot || k == PromptKind::PriorMealCot; }

std::string serialize_observation(const sim::EpisodeHistory& history, bool render_meals) {
  require(!history.empty(), "cannot serialize an empty history");
  const std::size_t first =
      history.size() > static_cast<std::size_t>(sim::kObservationWindow)
          ? history.size() - static_cast<std::size_t>(sim::kObservationWindow)
          : 0;
  std::string out;
  for (std::size_t i = first; i < history.size(); ++i) {
    const sim::HistoryEntry& e = history[i];
    if (!out.empty()) out += '\n';
    out += fmt::format("Day {}, Time: {}{}, glucose: {:.2f} mg/dL, insulin rate: {:.4f} unit/hour, "
                       "insulin dose: {:.2f} unit{}.",
                       e.clock.day, e.clock.hms(), e.step == 0 ? " (initial measurement)" : "",
                       e.glucose_sensor, e.rate, e.dose,
                       render_meals && e.meal_carbs > 0 ? ", meal taken" : "");
  }
  return out;
}

std::string_view system_text(PromptKind k) {
  switch (k) {
    case PromptKind::BaseZeroShot: return kBaseSystem;
    case PromptKind::PriorZeroShot:
    case PromptKind::PriorCot:
    case PromptKind::PriorMealCot: return prior_system();
  }
  throw ContractViolation("unknown prompt kind");
}

std::string_view request_text(PromptKind k) {
  switch (k) {
    case PromptKind::BaseZeroShot:
    case PromptKind::PriorZeroShot: return kTerseRequest;
    case PromptKind::PriorCot: return kCotRequest;
    case PromptKind::PriorMealCot: return kMealCotRequest;
  }
  throw ContractViolation("unknown prompt kind");
}

std::vector<ChatMessage> build_prompt(PromptKind k, std::string_view observation_text) {
  std::string user = "###Observations\n";
  user += observation_text;
  user += "\n\n###Request\n";
  user += request_text(k);
  user += "\n\n###Answer";
  return {{"system", std::string(system_text(k))}, {"user", std::move(user)}};
}

std::string render_prompt(PromptKind k, std::string_view observation_text) {
  const auto msgs = build_prompt(k, observation_text);
  return msgs[0].content + "\n\n" + msgs[1].content;
}

}  // namespace dtrbench::llm
