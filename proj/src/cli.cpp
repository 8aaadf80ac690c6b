#include "stc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <CLI11.hpp>

#include "stc/config.hpp"
#include "stc/oracle.hpp"
#include "stc/random.hpp"

namespace stc {
namespace {

namespace fs = std::filesystem;

// Matches the sub-stream derivation inside run_scenario, so bounds
// precomputed here agree bit for bit with a simulate run of the same
// config. Stream ids 1..4 are taken by the simulator; 5 is used for
// standalone admissibility checks.
Rng stream(std::uint64_t seed, std::uint32_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), id};
  return Rng(seq);
}

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

ScenarioConfig load_with_overrides(const CommonOpts& o) {
  std::ifstream in(o.config_path);
  if (!in) throw std::invalid_argument("cannot open config file: " + o.config_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  ScenarioConfig cfg;
  try {
    cfg = parse_config(apply_overrides(buf.str(), o.overrides));
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(o.config_path + ": " + e.what());
  }
  if (o.seed_set) cfg.seed = o.seed;
  return cfg;
}

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

std::string fmt_full(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

std::string fmt_state(const Vec& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) s += ", ";
    s += fmt(x[i]);
  }
  return s + ")";
}

fs::path resolve_out(const std::string& out_dir, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute() || out_dir.empty()) return p;
  return fs::path(out_dir) / p;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

double total_share(const SamplerConfig& s) { return s.theta1 + s.theta2 + s.theta_g; }

int cmd_simulate(const ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out) {
  Scenario sc = build_scenario(cfg);
  const Trace tr = run_scenario(sc);

  const bool self_trig = cfg.sampler.kind == "self-triggered";
  SafetyVerdict safety;
  if (sc.safe_radius > 0.0) safety = check_safety(tr, sc.safe_radius);

  std::optional<DecreaseVerdict> decrease;
  if (self_trig && cfg.sampler.mode == "stability")
    decrease = check_lyapunov_decrease(tr, sc.certificate, total_share(cfg.sampler));

  std::optional<AdmissibilityReport> adm;
  if (self_trig && cfg.sampler.mode == "safety-perturbed") {
    Rng rng = stream(cfg.seed, 5);
    adm = check_admissible(sc.system, sc.feedback, sc.certificate, cfg.sampler.delta,
                           cfg.sampler.theta_g, cfg.sampler.bounds.n_level_samples,
                           cfg.sampler.admissibility_margin, rng);
  }

  const fs::path trace_path = resolve_out(out_dir, cfg.trace_path);
  const fs::path summary_path = resolve_out(out_dir, cfg.summary_path);
  ensure_parent(trace_path);
  ensure_parent(summary_path);
  write_trace_csv(tr, trace_path.string());
  std::ofstream sf(summary_path);
  if (!sf) throw std::invalid_argument("cannot write " + summary_path.string());
  sf << summarize_run(cfg, tr, safety, decrease, adm);

  const TraceStats st = trace_stats(tr);
  out << "samples: " << st.sample_count << "\n";
  if (st.sample_count > 0) {
    out << "gaps: mean " << fmt(st.mean_gap) << " s, min " << fmt(st.min_gap) << " s, max "
        << fmt(st.max_gap) << " s\n";
    if (st.max_delay > 0.0)
      out << "delays: mean " << fmt(st.mean_delay) << " s, max " << fmt(st.max_delay) << " s\n";
  }
  if (tr.trigger_bounds) {
    const TriggerBounds& b = *tr.trigger_bounds;
    out << "bounds: m2 " << fmt(b.m2_global) << ", m3 " << fmt(b.m3) << ", tau_min "
        << fmt(b.tau_min) << " s, delta_max " << fmt(b.delta_max) << " s\n";
  }

  bool ok = !tr.diverged && !tr.internal_error;
  if (sc.safe_radius > 0.0) {
    if (safety.safe) {
      out << "safety: ok (radius " << fmt(sc.safe_radius) << ")\n";
    } else {
      out << "safety: violated at t = " << fmt(*safety.first_violation_time) << " s\n";
      ok = false;
    }
  }
  if (decrease) {
    if (decrease->ok) {
      out << "decrease: ok (" << decrease->checked_points << " points, worst margin "
          << fmt(decrease->worst_margin) << ")\n";
    } else {
      out << "decrease: violated at t = " << fmt(*decrease->first_violation_time)
          << " s (worst margin " << fmt(decrease->worst_margin) << ")\n";
      ok = false;
    }
  }
  if (adm) {
    out << "admissibility: " << (adm->admissible ? "pass" : "fail") << " (threshold "
        << fmt(adm->threshold) << ", sampled max " << fmt(adm->sampled_max) << ")\n";
    ok = ok && adm->admissible;
  }
  if (tr.diverged) out << "diverged at t = " << fmt(tr.divergence_time) << " s\n";
  if (tr.internal_error) out << "internal error: a trigger invariant was breached mid-run\n";
  out << "wrote " << trace_path.string() << " and " << summary_path.string() << "\n";
  return ok ? 0 : 1;
}

int cmd_triggers(const ScenarioConfig& cfg, double extent, int points, const std::string& out_file,
                 const std::string& out_dir, std::ostream& console) {
  if (cfg.sampler.kind != "self-triggered")
    throw std::invalid_argument("triggers needs a config with a self-triggered sampler");
  if (!(extent > 0.0)) throw std::invalid_argument("--extent must be positive");
  if (points < 1) throw std::invalid_argument("--points must be at least 1");

  Scenario sc = build_scenario(cfg);
  TriggerPolicy& policy = *sc.sampler.policy;
  Rng pre = stream(cfg.seed, 1);
  policy.precompute(sc.x0, pre);

  const std::size_t dim = sc.system.state_dim;
  double total = 1.0;
  for (std::size_t d = 0; d < dim; ++d) total *= points;
  if (total > 200000.0)
    throw std::invalid_argument("grid of " + fmt(total) + " points is too large; lower --points");

  std::ostringstream csv;
  for (std::size_t d = 0; d < dim; ++d) csv << "x" << (d + 1) << ",";
  csv << "m1,tau_raw,tau_s\n";

  Rng rng = stream(cfg.seed, 2);
  const double delta_max = policy.bounds().delta_max;
  const double tau_floor = policy.bound_config().tau_floor;
  std::vector<int> idx(dim, 0);
  Vec x(dim);
  while (true) {
    for (std::size_t d = 0; d < dim; ++d)
      x[d] = points == 1 ? 0.0 : -extent + 2.0 * extent * idx[d] / (points - 1);
    if (!policy.in_domain(x))
      throw std::invalid_argument("grid point " + fmt_state(x) +
                                  " lies outside the trigger domain; shrink --extent");
    const double m1 = policy.first_order_bound(x);
    const double raw = policy.raw_hold_time(x, rng);
    const double tau_s = std::max(raw - delta_max, tau_floor);
    for (std::size_t d = 0; d < dim; ++d) csv << fmt_full(x[d]) << ",";
    csv << fmt_full(m1) << "," << fmt_full(raw) << "," << fmt_full(tau_s) << "\n";

    std::size_t d = 0;
    for (; d < dim; ++d) {
      if (++idx[d] < points) break;
      idx[d] = 0;
    }
    if (d == dim) break;
  }

  if (out_file.empty()) {
    console << csv.str();
  } else {
    const fs::path path = resolve_out(out_dir, out_file);
    ensure_parent(path);
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot write " + path.string());
    f << csv.str();
    console << "wrote " << path.string() << " (" << fmt(total) << " rows)\n";
  }
  return 0;
}

int cmd_verify(const ScenarioConfig& cfg, int n_points, int dense_factor, double oracle_step,
               std::ostream& out) {
  if (cfg.sampler.kind != "self-triggered")
    throw std::invalid_argument("verify needs a config with a self-triggered sampler");
  if (n_points < 1) throw std::invalid_argument("--points must be at least 1");
  if (dense_factor < 1) throw std::invalid_argument("--dense-factor must be at least 1");
  if (!(oracle_step > 0.0)) throw std::invalid_argument("--oracle-step must be positive");

  Scenario sc = build_scenario(cfg);
  TriggerPolicy& policy = *sc.sampler.policy;
  Rng pre = stream(cfg.seed, 1);
  policy.precompute(sc.x0, pre);
  const TriggerBounds& b = policy.bounds();
  const bool safety = policy.mode() != TriggerMode::Stability;
  const std::size_t dim = sc.system.state_dim;

  // Hold times against the integrated ground truth. Sampling stays in
  // the operating envelope: the delta-ball in safety modes, the initial
  // sublevel set outside the inner radius in stability mode.
  const HoldCriterion crit =
      safety ? HoldCriterion::safety_ball(policy.delta())
             : HoldCriterion::lyapunov_decrease(sc.certificate, total_share(cfg.sampler));
  Rng rng = stream(cfg.seed, 2);
  struct Breach {
    Vec x;
    double tau_s, oracle;
  };
  std::vector<Breach> breaches;
  int checked = 0;
  const long attempt_cap = 200L * n_points;
  for (long attempt = 0; attempt < attempt_cap && checked < n_points; ++attempt) {
    Vec x = safety ? sample_ball(rng, dim, policy.delta())
                   : sample_ball(rng, dim, sc.certificate.valid_radius);
    if (!safety) {
      if (norm2(x) <= sc.certificate.valid_inner_radius ||
          sc.certificate.V(x) > b.envelope_level)
        continue;
    }
    if (!policy.in_domain(x)) continue;
    ++checked;
    const double tau_s = policy.next_sample_time(x, rng);
    // Marching slightly past tau_s is enough to certify the point.
    const double h_max = tau_s * (1.0 + 1e-6) + 10.0 * oracle_step;
    const double truth = oracle_hold_time(sc.system, sc.feedback, x, crit, h_max, oracle_step);
    if (tau_s > truth * (1.0 + 1e-9)) breaches.push_back({x, tau_s, truth});
  }
  if (checked < n_points)
    throw std::runtime_error("conservativeness sweep could not sample the operating region");
  out << "conservativeness: " << checked << " points, " << breaches.size() << " violations\n";
  for (std::size_t i = 0; i < breaches.size() && i < 10; ++i)
    out << "  at x = " << fmt_state(breaches[i].x) << ": tau_s " << fmt(breaches[i].tau_s)
        << " s exceeds hold time " << fmt(breaches[i].oracle) << " s\n";

  // Densified re-estimates must stay under the stored inflated bounds.
  BoundConfig dense = policy.bound_config();
  dense.safety_margin = 1.0;
  dense.n_level_samples *= dense_factor;
  dense.n_lipschitz_samples *= dense_factor;
  Rng rng_dense = stream(cfg.seed, 3);
  const double m2_dense =
      estimate_curvature_global(sc.system, sc.feedback, b.envelope_radius, dense, rng_dense);
  const double m3_radius = safety ? policy.delta() : b.envelope_radius;
  const double m3_dense =
      estimate_delay_sensitivity(sc.system, sc.feedback, m3_radius, dense, rng_dense);
  const bool m2_ok = m2_dense <= b.m2_global * (1.0 + 1e-9);
  const bool m3_ok = m3_dense <= b.m3 * (1.0 + 1e-9);
  out << "curvature bound: " << (m2_ok ? "ok" : "underestimated") << " (stored "
      << fmt(b.m2_global) << ", dense " << fmt(m2_dense) << ")\n";
  out << "delay sensitivity: " << (m3_ok ? "ok" : "underestimated") << " (stored " << fmt(b.m3)
      << ", dense " << fmt(m3_dense) << ")\n";

  bool adm_ok = true;
  if (policy.mode() == TriggerMode::SafetyPerturbed) {
    Rng rng_adm = stream(cfg.seed, 5);
    const AdmissibilityReport adm =
        check_admissible(sc.system, sc.feedback, sc.certificate, policy.delta(),
                         cfg.sampler.theta_g, dense.n_level_samples,
                         cfg.sampler.admissibility_margin, rng_adm);
    adm_ok = adm.admissible;
    out << "admissibility: " << (adm.admissible ? "pass" : "fail") << " (threshold "
        << fmt(adm.threshold) << ", sampled max " << fmt(adm.sampled_max) << ", margin "
        << fmt(adm.margin) << ")\n";
  } else {
    out << "admissibility: not applicable\n";
  }

  return (breaches.empty() && m2_ok && m3_ok && adm_ok) ? 0 : 1;
}

int cmd_compare(const std::vector<CommonOpts>& opts, std::ostream& out) {
  std::vector<ScenarioConfig> cfgs;
  cfgs.reserve(opts.size());
  for (const CommonOpts& o : opts) cfgs.push_back(load_with_overrides(o));
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    if (cfgs[i].builtin != cfgs[0].builtin)
      throw std::invalid_argument("configs target different systems: " + cfgs[0].builtin +
                                  " vs " + cfgs[i].builtin);
  }

  struct Row {
    std::string name, sampler;
    TraceStats stats;
    double max_norm = 0.0;
    std::string safety;
    bool ok = true;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const ScenarioConfig& cfg = cfgs[i];
    Scenario sc = build_scenario(cfg);
    const Trace tr = run_scenario(sc);
    Row row;
    row.name = fs::path(opts[i].config_path).filename().string();
    row.sampler = cfg.sampler.kind == "self-triggered"
                      ? cfg.sampler.kind + "/" + cfg.sampler.mode
                      : cfg.sampler.kind;
    row.stats = trace_stats(tr);
    for (const Vec& x : tr.states) row.max_norm = std::max(row.max_norm, norm2(x));
    row.ok = !tr.diverged && !tr.internal_error;
    if (sc.safe_radius > 0.0) {
      const SafetyVerdict v = check_safety(tr, sc.safe_radius);
      row.safety = v.safe ? "ok" : "violated@" + fmt(*v.first_violation_time);
      row.ok = row.ok && v.safe;
    } else {
      row.safety = "-";
    }
    if (tr.diverged) row.safety = "diverged";
    rows.push_back(std::move(row));
  }

  std::size_t name_w = 6, sampler_w = 7;
  for (const Row& r : rows) {
    name_w = std::max(name_w, r.name.size());
    sampler_w = std::max(sampler_w, r.sampler.size());
  }
  out << std::left << std::setw(static_cast<int>(name_w) + 2) << "config"
      << std::setw(static_cast<int>(sampler_w) + 2) << "sampler" << std::setw(9) << "samples"
      << std::setw(13) << "mean gap" << std::setw(13) << "min gap" << std::setw(13) << "max gap"
      << std::setw(13) << "max |x|" << "safety" << "\n";
  bool all_ok = true;
  for (const Row& r : rows) {
    out << std::left << std::setw(static_cast<int>(name_w) + 2) << r.name
        << std::setw(static_cast<int>(sampler_w) + 2) << r.sampler << std::setw(9)
        << r.stats.sample_count << std::setw(13) << fmt(r.stats.mean_gap) << std::setw(13)
        << fmt(r.stats.min_gap) << std::setw(13) << fmt(r.stats.max_gap) << std::setw(13)
        << fmt(r.max_norm) << r.safety << "\n";
    all_ok = all_ok && r.ok;
  }
  return all_ok ? 0 : 1;
}

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "scenario config JSON")->required();
  sub->add_option("--override", o.overrides,
                  "dotted-path config override, e.g. sampler.theta1=0.4 (repeatable)");
  sub->add_option("--seed", o.seed, "replace the config seed")
      ->each([&o](const std::string&) { o.seed_set = true; });
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"digital self-triggered control of nonlinear systems"};
  app.name("stc");
  app.set_version_flag("--version", std::string("stc ") + kVersion);
  app.require_subcommand(1);

  CommonOpts sim_opts;
  std::string sim_out_dir;
  CLI::App* sim = app.add_subcommand(
      "simulate", "run one closed-loop scenario and write trace + summary");
  add_common(sim, sim_opts);
  sim->add_option("--out", sim_out_dir, "directory for the trace and summary files");

  CommonOpts trig_opts;
  double trig_extent = 0.0;
  int trig_points = 21;
  std::string trig_out, trig_out_dir;
  CLI::App* trig = app.add_subcommand(
      "triggers", "tabulate m1, raw hold time and next-sample time over a state grid");
  add_common(trig, trig_opts);
  trig->add_option("--extent", trig_extent, "half-width of the grid box around the origin")
      ->required();
  trig->add_option("--points", trig_points, "grid points per axis (default 21)");
  trig->add_option("--grid-out", trig_out, "CSV file (default: stdout)");
  trig->add_option("--out", trig_out_dir, "directory for --grid-out");

  CommonOpts ver_opts;
  int ver_points = 100, ver_dense = 10;
  double ver_step = 1e-4;
  CLI::App* ver = app.add_subcommand(
      "verify", "check scheduled times and precomputed bounds against integrated ground truth");
  add_common(ver, ver_opts);
  ver->add_option("--points", ver_points, "states checked against the hold-time oracle");
  ver->add_option("--dense-factor", ver_dense, "densification of the bound re-estimates");
  ver->add_option("--oracle-step", ver_step, "RK4 step of the ground-truth integration");

  std::vector<std::string> cmp_paths, cmp_overrides;
  std::uint64_t cmp_seed = 0;
  bool cmp_seed_set = false;
  CLI::App* cmp = app.add_subcommand("compare", "run several configs on one system");
  cmp->add_option("--config", cmp_paths, "scenario config JSON (repeat for each run)")
      ->required();
  cmp->add_option("--override", cmp_overrides, "dotted-path override applied to every config");
  cmp->add_option("--seed", cmp_seed, "replace every config seed")
      ->each([&cmp_seed_set](const std::string&) { cmp_seed_set = true; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(load_with_overrides(sim_opts), sim_out_dir, std::cout);
    if (trig->parsed())
      return cmd_triggers(load_with_overrides(trig_opts), trig_extent, trig_points, trig_out,
                          trig_out_dir, std::cout);
    if (ver->parsed())
      return cmd_verify(load_with_overrides(ver_opts), ver_points, ver_dense, ver_step, std::cout);
    if (cmp->parsed()) {
      if (cmp_paths.size() < 2)
        throw std::invalid_argument("compare needs at least two --config paths");
      std::vector<CommonOpts> opts;
      for (const std::string& p : cmp_paths)
        opts.push_back({p, cmp_overrides, cmp_seed, cmp_seed_set});
      return cmd_compare(opts, std::cout);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace stc
