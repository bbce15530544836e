#ifndef SYMDIRECT_CLI_HPP
#define SYMDIRECT_CLI_HPP

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "leitmann.hpp"
#include "noether.hpp"
#include "oracle.hpp"
#include "problem_io.hpp"
#include "report.hpp"
#include "symmetry.hpp"

namespace symdirect::cli {

enum ExitCode : int { Success = 0, VerdictFalse = 1, Usage = 2, SolverFailure = 3 };

struct RunConfig {
  std::string command;
  std::string input;
  std::string method = "noether";
  int mesh = 200;
  double tol = 1e-9;
  bool tol_given = false;
  unsigned seed = 42;
  std::string out;
  std::string format = "text";
  double scan_min = -100.0;
  double scan_max = 100.0;
  int f_degree = 1;
  int deg_t = 1;
  int deg_s = 1;
};

/// Raised for input problems that map to the usage exit code.
struct UsageError : Error {
  using Error::Error;
};

namespace detail {

inline void write_file(const RunConfig& cfg, const std::string& name, const std::string& content) {
  if (cfg.out.empty()) return;
  std::filesystem::create_directories(cfg.out);
  std::ofstream f(std::filesystem::path(cfg.out) / name);
  if (!f) throw UsageError("cannot write to '" + cfg.out + "'");
  f << content;
}

inline std::string csv_text(const ProblemSpec& p, const SampledTrajectory& t) {
  std::ostringstream os;
  write_csv(os, p, t);
  return os.str();
}

inline const TransformFamily& require_symmetry(const ProblemFile& f) {
  if (!f.symmetry) throw UsageError("the problem file has no [symmetry] section");
  return *f.symmetry;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_problem_file(cfg.input);
  const auto& fam = require_symmetry(file);
  if (!fam.gauge) throw UsageError("the [symmetry] section has no gauge; run 'symdirect gauge' to synthesize one");
  SamplingOptions opt;
  opt.seed = cfg.seed;
  opt.tolerance = cfg.tol;
  const auto rep = check_invariance(file.problem, fam, opt);
  if (cfg.format == "json") out << to_json(rep).dump(2) << "\n";
  else write_text(out, rep);
  return rep.invariant() ? Success : VerdictFalse;
}

inline int cmd_gauge(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_problem_file(cfg.input);
  const Expr phi = synthesize_gauge(file.problem, require_symmetry(file));
  if (cfg.format == "json") out << nlohmann::json{{"gauge", to_string(phi)}}.dump(2) << "\n";
  else out << "gauge = " << to_string(phi) << "\n";
  return Success;
}

inline int cmd_find(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_problem_file(cfg.input);
  const auto fams = find_symmetry_ansatz(file.problem, cfg.deg_t, cfg.deg_s);
  if (cfg.format == "json") {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : fams) arr.push_back(to_json(f));
    out << arr.dump(2) << "\n";
    return Success;
  }
  out << fams.size() << " famil" << (fams.size() == 1 ? "y" : "ies") << " found\n";
  for (const auto& f : fams) {
    out << "[symmetry]\n";
    auto j = to_json(f);
    out << "x_s = " << j["x_s"].dump() << "\n";
    out << "u_s = " << j["u_s"].dump() << "\n";
    out << "gauge = " << j["gauge"].dump() << "\n";
  }
  return Success;
}

inline int emit_solutions(const RunConfig& cfg, const ProblemSpec& p, const std::vector<Solution>& sols,
                          const std::string& stem, std::ostream& out, nlohmann::json extra = {}) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : sols) {
    auto j = to_json(p, s);
    if (!extra.is_null()) j.update(extra);
    arr.push_back(std::move(j));
  }
  const bool numeric = p.is_numeric();
  const auto json_text = (sols.size() == 1 ? arr[0] : arr).dump(2) + "\n";
  write_file(cfg, stem + ".json", json_text);
  for (std::size_t k = 0; k < sols.size() && numeric; ++k)
    write_file(cfg, sols.size() == 1 ? stem + ".csv" : stem + "_" + std::to_string(k) + ".csv",
               csv_text(p, trajectory_of(p, sols[k], cfg.mesh)));

  if (cfg.format == "json") {
    out << json_text;
  } else if (cfg.format == "csv") {
    if (!numeric) throw UsageError("CSV output needs numeric problem data");
    write_csv(out, p, trajectory_of(p, sols.front(), cfg.mesh));
  } else {
    for (std::size_t k = 0; k < sols.size(); ++k) {
      if (sols.size() > 1) out << "--- solution " << k + 1 << " of " << sols.size() << "\n";
      write_text(out, p, sols[k]);
    }
  }
  return Success;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_problem_file(cfg.input);
  const ProblemSpec& p = file.problem;
  if (cfg.method == "noether") {
    NoetherOptions opt;
    opt.mesh = cfg.mesh;
    opt.fit.scan_min = cfg.scan_min;
    opt.fit.scan_max = cfg.scan_max;
    return emit_solutions(cfg, p, noether_solve(p, require_symmetry(file), opt), "noether", out);
  }
  if (cfg.method == "leitmann") {
    const auto res = leitmann_solve(p, cfg.f_degree);
    nlohmann::json exactness = nlohmann::json::array();
    for (const auto& e : res.trace.exactness) exactness.push_back(to_string(e));
    nlohmann::json extra{{"transform",
                          {{"sign", res.transform.sign}, {"f", to_string(res.transform.f)}, {"G", to_string(res.transform.G)}}},
                         {"trace",
                          {{"excess", to_string(res.trace.excess)},
                           {"A", to_string(res.trace.A)},
                           {"B", to_string(res.trace.B)},
                           {"exactness", exactness}}}};
    if (cfg.format == "text") {
      out << "excess: " << to_string(res.trace.excess) << "\n";
      out << "A = " << to_string(res.trace.A) << ", B = " << to_string(res.trace.B) << "\n";
      for (const auto& e : res.trace.exactness) out << "exactness: " << to_string(e) << " = 0\n";
    }
    return emit_solutions(cfg, p, {res.solution}, "leitmann", out, extra);
  }
  if (cfg.method == "oracle") {
    const auto res = transcribe_and_solve(p, cfg.mesh, cfg.tol);
    const auto traj = trajectory_of(res);
    const auto summary = to_json(res).dump(2) + "\n";
    write_file(cfg, "oracle.json", summary);
    write_file(cfg, "oracle.csv", csv_text(p, traj));
    if (cfg.format == "json") out << summary;
    else if (cfg.format == "csv") write_csv(out, p, traj);
    else write_text(out, p, res.to_solution());
    return Success;
  }
  throw UsageError("unknown method '" + cfg.method + "'");
}

struct CompareEntry {
  std::string method;
  std::optional<double> cost;
  std::optional<SampledTrajectory> nodes;
  std::string error;
};

inline int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  const auto file = load_problem_file(cfg.input);
  const ProblemSpec& p = file.problem;
  if (!p.is_numeric()) throw UsageError("compare needs numeric problem data");
  const double tol = cfg.tol_given ? cfg.tol : 1e-4;
  std::vector<CompareEntry> rows;
  auto attempt = [&](const std::string& name, auto&& body) {
    CompareEntry e{name, {}, {}, {}};
    try {
      body(e);
    } catch (const Error& ex) {
      e.error = ex.what();
    }
    rows.push_back(std::move(e));
  };
  attempt("noether", [&](CompareEntry& e) {
    if (!file.symmetry) throw Unsupported("no [symmetry] section");
    NoetherOptions opt;
    opt.mesh = cfg.mesh;
    opt.fit.scan_min = cfg.scan_min;
    opt.fit.scan_max = cfg.scan_max;
    const auto sols = noether_solve(p, *file.symmetry, opt);
    e.cost = sols.front().cost;
    e.nodes = trajectory_of(p, sols.front(), cfg.mesh);
  });
  attempt("leitmann", [&](CompareEntry& e) {
    const auto res = leitmann_solve(p, cfg.f_degree);
    e.cost = res.solution.cost;
    e.nodes = trajectory_of(p, res.solution, cfg.mesh);
  });
  attempt("oracle", [&](CompareEntry& e) {
    const auto res = transcribe_and_solve(p, cfg.mesh, cfg.tol_given ? cfg.tol : 1e-9);
    e.cost = res.cost;
    e.nodes = trajectory_of(res);
  });

  std::vector<const CompareEntry*> ok;
  for (const auto& r : rows)
    if (r.cost) ok.push_back(&r);
  double worst = 0.0;
  nlohmann::json pairs = nlohmann::json::array();
  for (std::size_t a = 0; a < ok.size(); ++a)
    for (std::size_t b = a + 1; b < ok.size(); ++b) {
      const double gap = std::abs(*ok[a]->cost - *ok[b]->cost);
      double dist = 0.0;
      const auto &na = *ok[a]->nodes, &nb = *ok[b]->nodes;
      for (std::size_t k = 0; k < std::min(na.times.size(), nb.times.size()); ++k)
        for (std::size_t i = 0; i < p.space.n(); ++i) dist = std::max(dist, std::abs(na.states[k][i] - nb.states[k][i]));
      worst = std::max(worst, gap);
      pairs.push_back({{"a", ok[a]->method}, {"b", ok[b]->method}, {"cost_gap", gap}, {"state_distance", dist}});
    }
  const int code = ok.size() < 2 ? SolverFailure : (worst <= tol ? Success : VerdictFalse);

  if (cfg.format == "json") {
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& r : rows)
      methods.push_back({{"method", r.method},
                         {"cost", r.cost ? nlohmann::json(*r.cost) : nlohmann::json()},
                         {"error", r.error.empty() ? nlohmann::json() : nlohmann::json(r.error)}});
    out << nlohmann::json{{"methods", methods}, {"pairs", pairs}, {"tolerance", tol}, {"agree", code == Success}}.dump(2)
        << "\n";
    return code;
  }
  for (const auto& r : rows) {
    out << r.method << ": ";
    if (r.cost) out << "cost " << format_double(*r.cost) << "\n";
    else out << "failed (" << r.error << ")\n";
  }
  for (const auto& pr : pairs)
    out << pr["a"].get<std::string>() << " vs " << pr["b"].get<std::string>() << ": cost gap "
        << format_double(pr["cost_gap"].get<double>()) << ", state distance "
        << format_double(pr["state_distance"].get<double>()) << "\n";
  if (ok.size() < 2) out << "fewer than two methods succeeded\n";
  else out << (code == Success ? "agree" : "disagree") << " within " << format_double(tol) << "\n";
  return code;
}

}  // namespace detail

/// Runs one command; `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Direct global solutions of optimal control problems via variational symmetries", "symdirect"};
  app.require_subcommand(1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", cfg.input, "problem file")->required();
    sub->add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"text", "json", "csv"}));
    sub->add_option("--tol", cfg.tol, "tolerance")->each([&](const std::string&) { cfg.tol_given = true; });
    sub->add_option("--seed", cfg.seed, "sampling seed");
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_option("--mesh", cfg.mesh, "mesh size N")->check(CLI::Range(2, 1000000));
    sub->add_option("--scan-min", cfg.scan_min, "lower end of the parameter root scan");
    sub->add_option("--scan-max", cfg.scan_max, "upper end of the parameter root scan");
    sub->add_option("--f-degree", cfg.f_degree, "degree of Leitmann's f ansatz")->check(CLI::Range(0, 10));
  };
  auto* check = app.add_subcommand("check", "verify the [symmetry] section");
  auto* solve = app.add_subcommand("solve", "solve by one method");
  auto* compare = app.add_subcommand("compare", "run all applicable methods and compare");
  auto* gauge = app.add_subcommand("gauge", "synthesize the gauge term of the [symmetry] section");
  auto* find = app.add_subcommand("find-symmetry", "search shift-form symmetries");
  for (auto* sub : {check, solve, compare, gauge, find}) add_common(sub);
  solve->add_option("--method", cfg.method, "noether, leitmann or oracle")
      ->check(CLI::IsMember({"noether", "leitmann", "oracle"}));
  find->add_option("--deg-t", cfg.deg_t, "degree in t of the shifts")->check(CLI::Range(0, 6));
  find->add_option("--deg-s", cfg.deg_s, "largest power of s")->check(CLI::Range(1, 6));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? Success : Usage;
  }

  try {
    if (check->parsed()) return detail::cmd_check(cfg, out);
    if (solve->parsed()) return detail::cmd_solve(cfg, out);
    if (compare->parsed()) return detail::cmd_compare(cfg, out);
    if (gauge->parsed()) return detail::cmd_gauge(cfg, out);
    if (find->parsed()) return detail::cmd_find(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return Usage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return Usage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return Usage;
  } catch (const UnknownIdentifier& e) {
    err << "error: " << e.what() << "\n";
    return Usage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return SolverFailure;
  }
  return Usage;
}

}  // namespace symdirect::cli

#endif
