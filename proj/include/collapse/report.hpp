#pragma once

#include <string>

#include "collapse/analysis.hpp"
#include "collapse/curvature.hpp"
#include "collapse/sde.hpp"
#include "collapse/topology.hpp"
#include "json.hpp"

// JSON report builders shared by the command-line tool and the acceptance
// checks; keeping them in one place is what makes "byte-identical summary"
// a well-defined statement.

namespace collapse {

inline nlohmann::json end_json(const EndpointClass& e) {
  nlohmann::json j;
  j["kind"] = to_string(e.kind);
  j["location"] = std::isfinite(e.location)
                      ? nlohmann::json(e.location)
                      : nlohmann::json("inf");
  if (e.kind == EndKind::Bolt) {
    j["n"] = e.n;
    j["boundary_slope"] = e.boundary_slope;
  }
  if (e.kind == EndKind::Nut || e.kind == EndKind::ConicalDefect)
    j["boundary_slope"] = e.boundary_slope;
  if (e.kind == EndKind::ConicalDefect) j["deficit"] = e.deficit;
  if (e.drift_limit) j["drift_limit"] = *e.drift_limit;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j;
}

inline nlohmann::json classification_json(const ManifoldClassification& c) {
  nlohmann::json j;
  j["ends"] = {end_json(c.ends[0]), end_json(c.ends[1])};
  j["case"] = to_string(c.case_label);
  j["orbit"] = c.principal_orbit;
  j["notes"] = c.topology_note;
  if (!c.incomplete_reason.empty())
    j["incomplete_reason"] = c.incomplete_reason;
  return j;
}

inline nlohmann::json verdicts_json(const PositivityVerdicts& v) {
  nlohmann::json j;
  j["collapse_H"] = v.collapse_H;
  j["reduce_S"] = v.reduce_S ? nlohmann::json(*v.reduce_S) : nlohmann::json();
  j["all_bisectional"] = v.all_bisectional
                             ? nlohmann::json(*v.all_bisectional)
                             : nlohmann::json();
  j["min_KH"] = {{"value", v.min_KH.value}, {"at", v.min_KH.at}};
  if (v.reduce_S) {
    j["min_R0312"] = {{"value", v.min_R0312.value}, {"at", v.min_R0312.at}};
    j["min_R1212"] = {{"value", v.min_R1212.value}, {"at", v.min_R1212.at}};
  }
  return j;
}

inline nlohmann::json hypothesis_json(const HypothesisReport& r) {
  nlohmann::json j;
  j["statistic"] = r.statistic;
  j["standard_error"] = r.standard_error;
  j["z_score"] = r.z_score;
  j["pass"] = r.pass;
  j["n_samples"] = r.n_samples;
  j["description"] = r.description;
  for (auto& [k, v] : r.details) j["details"][k] = v;
  return j;
}

inline nlohmann::json ensemble_summary_json(const EnsembleStats& st) {
  nlohmann::json j;
  j["endpoints"] = {{"lower", st.n_lower},
                    {"upper", st.n_upper},
                    {"none", st.n_none}};
  j["mean_V"] = st.mean_V;
  j["mean_H"] = st.mean_H;
  j["se"] = st.se_V;
  j["se_H"] = st.se_H;
  j["t_grid"] = st.t_grid;
  j["non_convergence_count"] = st.non_convergence_count;
  j["config"] = {{"sigma", st.sigma},
                 {"dt", st.dt},
                 {"max_steps", st.max_steps},
                 {"record_stride", st.record_stride},
                 {"seed", st.seed},
                 {"absorb_V_tol", st.absorb_V_tol},
                 {"chi_bounds", {st.chi_bounds.first, st.chi_bounds.second}},
                 {"chi0", st.chi0}};
  if (!st.warning.empty()) j["warning"] = st.warning;
  return j;
}

inline nlohmann::json lueders_json(const LuedersReport& r) {
  nlohmann::json j;
  j["ratio_residual"] = r.ratio_residual;
  j["pass_confinement"] = r.pass_confinement;
  j["endpoints"] = {{"lower", r.n_lower},
                    {"upper", r.n_upper},
                    {"none", r.n_none}};
  j["p_upper_mc"] = r.p_upper_mc;
  j["p_upper_analytic"] = r.p_upper_analytic;
  j["standard_error"] = r.standard_error;
  j["z_score"] = r.z_score;
  j["pass_split"] = r.pass_split;
  if (r.p_upper_born) {
    j["p_upper_born"] = *r.p_upper_born;
    j["born_z"] = *r.born_z;
  }
  j["pass_born"] = r.pass_born;
  j["mean_H_drift_z"] = r.mean_H_drift_z;
  j["pass"] = r.pass;
  j["n_samples"] = r.n_samples;
  j["description"] = r.description;
  return j;
}

}  // namespace collapse
