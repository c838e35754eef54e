#ifndef RB_JSON_IO_HPP
#define RB_JSON_IO_HPP

#include <optional>
#include <string>

#include "emitter.hpp"
#include "repeater.hpp"

namespace rb {

// Emitter document: {name, tau0_ns, dw0, xi, zpl_thz}.
EmitterSpec emitter_from_json(const std::string& text);
std::string emitter_to_json(const EmitterSpec& spec);

// Scenario document with ns/km-keyed fields:
// {l_km, l_att_km, tau_ph_ns, tau_cz_ns, eps_r, eta_det, l_min_km, n_ph_max}.
// Every key is optional and overrides the defaults; unknown keys are rejected.
RepeaterScenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const RepeaterScenario& scn);

struct SweepGrid {
  double eta_from = 0.0;
  double eta_to = 0.0;
  std::int32_t steps = 0;
};

// Composite CLI scenario file:
// {
//   "emitter": "SnV" | {name, tau0_ns, dw0, xi, zpl_thz},
//   "chain": {f_p, beta_wg, beta_f, alpha_deg?},
//   "repeater": { ... scenario keys ... },    (optional)
//   "sweep": {eta_from, eta_to, steps}        (optional)
// }
struct ScenarioFile {
  EmitterSpec emitter;
  double f_p = 0.0;
  double beta_wg = 1.0;
  double beta_f = 1.0;
  double alpha_rad = 0.0;
  RepeaterScenario repeater;
  std::optional<SweepGrid> sweep;

  // Orientation-scaled Purcell factor actually applied to the chain.
  double effective_f_p() const;
  double eta_emitter() const;
};

ScenarioFile scenario_file_from_json(const std::string& text);
std::string scenario_file_to_json(const ScenarioFile& file);

}  // namespace rb

#endif
