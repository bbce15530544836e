#ifndef SYMDIRECT_REPORT_HPP
#define SYMDIRECT_REPORT_HPP

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracle.hpp"
#include "problem.hpp"
#include "symmetry.hpp"
#include "transform.hpp"

namespace symdirect {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

// NaN is not valid JSON; absent values become null.
inline nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

}  // namespace detail

inline nlohmann::json to_json(const ProblemSpec& p, const Solution& s) {
  nlohmann::json j;
  j["method"] = method_name(s.method);
  j["status"] = status_name(s.status);
  j["cost"] = detail::number_or_null(s.cost);
  j["exact_cost"] = s.exact_cost ? nlohmann::json(to_string(*s.exact_cost)) : nlohmann::json();
  if (s.has_closed_form()) {
    nlohmann::json states = nlohmann::json::object(), controls = nlohmann::json::object();
    for (std::size_t i = 0; i < s.states.size(); ++i) states[p.space.states[i]] = to_string(s.states[i]);
    for (std::size_t j2 = 0; j2 < s.controls.size(); ++j2) controls[p.space.controls[j2]] = to_string(s.controls[j2]);
    j["states"] = states;
    j["controls"] = controls;
  }
  j["parameter_values"] = s.diagnostics.parameter_values;
  j["dyn_residual"] = s.diagnostics.dyn_residual;
  j["bc_residual"] = s.diagnostics.bc_residual;
  j["notes"] = s.diagnostics.notes;
  return j;
}

inline nlohmann::json to_json(const OracleResult& r) {
  return {{"cost", r.cost}, {"kkt_residual", r.kkt_residual}, {"N", r.N}, {"iterations", r.iterations},
          {"converged", r.converged}, {"local", r.local}};
}

inline nlohmann::json to_json(const InvarianceReport& r) {
  nlohmann::json dyn = nlohmann::json::array();
  for (std::size_t i = 0; i < r.dynamics_ok.size(); ++i)
    dyn.push_back({{"ok", r.dynamics_ok[i]}, {"residual", to_string(r.dynamics_residuals[i])}});
  return {{"invariant", r.invariant()},
          {"mode", check_mode_name(r.mode)},
          {"lagrangian", {{"ok", r.lagrangian_ok}, {"residual", to_string(r.lagrangian_residual)}}},
          {"dynamics", dyn},
          {"max_sampled_residual", r.max_sampled_residual}};
}

inline nlohmann::json to_json(const TransformFamily& f) {
  nlohmann::json xs = nlohmann::json::array(), us = nlohmann::json::array();
  for (const auto& e : f.x_maps) xs.push_back(to_string(e));
  for (const auto& e : f.u_maps) us.push_back(to_string(e));
  return {{"t_s", to_string(f.t_map)}, {"x_s", xs}, {"u_s", us},
          {"gauge", f.gauge ? nlohmann::json(to_string(*f.gauge)) : nlohmann::json()}};
}

/// CSV with columns t, states, controls. Interval controls are written at
/// the left node; the last node repeats the last interval's control.
inline void write_csv(std::ostream& os, const ProblemSpec& p, const SampledTrajectory& s) {
  os << p.space.time;
  for (const auto& x : p.space.states) os << "," << x;
  for (const auto& u : p.space.controls) os << "," << u;
  os << "\n";
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    os << format_double(s.times[k]);
    for (double v : s.states[k]) os << "," << format_double(v);
    for (double v : s.control_at_node(k)) os << "," << format_double(v);
    os << "\n";
  }
}

inline SampledTrajectory trajectory_of(const ProblemSpec& p, const Solution& s, int mesh) {
  return s.samples ? *s.samples : sample(p, s, mesh);
}

inline SampledTrajectory trajectory_of(const OracleResult& r) {
  SampledTrajectory t;
  t.times = r.times;
  t.states = r.states;
  t.controls = r.controls;
  t.interval_controls = true;
  return t;
}

inline void write_text(std::ostream& os, const ProblemSpec& p, const Solution& s) {
  os << "method: " << method_name(s.method) << "\n";
  os << "status: " << status_name(s.status) << "\n";
  if (s.has_closed_form()) {
    for (std::size_t i = 0; i < s.states.size(); ++i)
      os << "  " << p.space.states[i] << "(t) = " << to_string(s.states[i]) << "\n";
    for (std::size_t j = 0; j < s.controls.size(); ++j)
      os << "  " << p.space.controls[j] << "(t) = " << to_string(s.controls[j]) << "\n";
  }
  if (!s.diagnostics.parameter_values.empty()) {
    os << "parameter:";
    for (double v : s.diagnostics.parameter_values) os << " " << p.space.parameter << " = " << format_double(v);
    os << "\n";
  }
  if (s.exact_cost) os << "exact cost: " << to_string(*s.exact_cost) << "\n";
  if (std::isfinite(s.cost)) os << "cost: " << format_double(s.cost) << "\n";
  os << "residuals: dynamics " << format_double(s.diagnostics.dyn_residual) << ", boundary "
     << format_double(s.diagnostics.bc_residual) << "\n";
  for (const auto& n : s.diagnostics.notes) os << "note: " << n << "\n";
}

inline void write_text(std::ostream& os, const InvarianceReport& r) {
  os << "mode: " << check_mode_name(r.mode) << "\n";
  os << "lagrangian: " << (r.lagrangian_ok ? "ok" : "FAILED") << ", residual " << to_string(r.lagrangian_residual)
     << "\n";
  for (std::size_t i = 0; i < r.dynamics_ok.size(); ++i)
    os << "dynamics[" << i << "]: " << (r.dynamics_ok[i] ? "ok" : "FAILED") << ", residual "
       << to_string(r.dynamics_residuals[i]) << "\n";
  if (r.mode == CheckMode::NumericSampled)
    os << "max sampled residual: " << format_double(r.max_sampled_residual) << "\n";
  os << "verdict: " << (r.invariant() ? "invariant" : "not invariant") << "\n";
}

}  // namespace symdirect

#endif
