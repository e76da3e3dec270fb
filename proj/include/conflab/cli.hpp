#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conflab/concentration.hpp"
#include "conflab/disk.hpp"
#include "conflab/io.hpp"
#include "conflab/metric.hpp"

namespace conflab::cli {

inline constexpr const char* kVersion = "0.3.0";

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3 };

/// Free constants of the lab. Every field is a flag of the same name and may
/// also come from a key=value config file; flags win.
struct LabConfig {
  int grid_n = 257;
  double chart_half_width = 2.0;
  double epsilon1 = 0.4;
  double p = 2.0;
  double Lambda_report = 10.0;
  std::uint64_t seed = 1;
  std::string output_dir;

  // Sweep selection.
  std::vector<std::string> families{"cylinder_sphere", "flat_neck_sphere", "dilated_round", "perturbed_round"};
  std::vector<double> cylinder_k, flat_neck_k, dilated_s, perturbed_amplitude;

  void validate() const {
    if (grid_n < 65 || grid_n % 2 == 0) throw Error(ErrorCode::InvalidArgument, "grid_n must be odd and >= 65");
    if (!(chart_half_width > 1.0)) throw Error(ErrorCode::InvalidArgument, "chart_half_width must exceed 1");
    if (!(epsilon1 > 0.0 && epsilon1 < 4.0 * kPi)) throw Error(ErrorCode::InvalidArgument, "epsilon1 must lie in (0, 4 pi)");
    if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  }

  GridSpec grid() const { return {grid_n, chart_half_width}; }

  DiagnosticsOptions diagnostics() const {
    DiagnosticsOptions o;
    o.n = grid_n;
    o.epsilon1 = epsilon1;
    o.seed = seed;
    return o;
  }

  std::vector<double> parameters(Family f) const {
    const std::vector<double>* chosen = nullptr;
    switch (f) {
      case Family::CylinderSphere: chosen = &cylinder_k; break;
      case Family::FlatNeckSphere: chosen = &flat_neck_k; break;
      case Family::DilatedRound: chosen = &dilated_s; break;
      case Family::PerturbedRound: chosen = &perturbed_amplitude; break;
    }
    return chosen->empty() ? default_parameters(f) : *chosen;
  }

  io::Json to_json() const {
    return {{"grid_n", grid_n},   {"chart_half_width", chart_half_width},
            {"epsilon1", epsilon1}, {"p", p},
            {"Lambda_report", Lambda_report}, {"seed", seed},
            {"output_dir", output_dir}, {"families", families},
            {"cylinder_k", cylinder_k}, {"flat_neck_k", flat_neck_k},
            {"dilated_s", dilated_s}, {"perturbed_amplitude", perturbed_amplitude}};
  }
};

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidExponent:
    case ErrorCode::NonPositiveScale:
    case ErrorCode::IoError: return kUsage;
    default: return kData;
  }
}

namespace detail {

/// Where a verb reads its metric from: a file, or a family member.
struct MetricSource {
  std::string file;
  std::string family;
  double k = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--metric", file, "metric JSON file")->check(CLI::ExistingFile);
    cmd->add_option("--family", family, "round | cylinder | flat_neck | dilated | perturbed");
    cmd->add_option("--k", k, "neck index, dilation, or amplitude");
  }

  ConformalMetric load(const LabConfig& cfg) const {
    if (!file.empty()) return io::metric_from_json(io::read_json(file));
    if (family.empty()) throw Error(ErrorCode::InvalidArgument, "give --metric FILE or --family NAME");
    if (family == "round") return make_round(cfg.grid());
    return family_member(family_from_string(family), k, cfg.diagnostics());
  }

  std::string label() const {
    if (!file.empty()) return std::filesystem::path(file).stem().string();
    return family == "round" ? family : family + "_" + io::csv::real(k);
  }
};

inline std::filesystem::path output_root(const LabConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("LAB_OUTPUT_DIR"); env && *env) return env;
  return "lab_output";
}

inline std::string functional_label(const std::string& family) {
  return family == "round" ? family : to_string(family_from_string(family));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Verbs

inline int cmd_examples(const LabConfig& cfg, const std::string& family, std::vector<double> ks, std::ostream& out,
                        std::ostream& err) {
  const std::string name = detail::functional_label(family);
  const bool round = name == "round";
  if (ks.empty()) ks = round ? std::vector<double>{0.0} : default_parameters(family_from_string(name));
  const auto root = detail::output_root(cfg);
  std::string table = std::string(io::csv::kFunctionalHeader) + "\n";
  for (double k : ks) {
    const ConformalMetric g = round ? make_round(cfg.grid()) : family_member(family_from_string(name), k, cfg.diagnostics());
    const FunctionalReport r = functionals(g, cfg.p);
    table += io::csv::row(name, k, cfg.grid_n, r) + "\n";
    io::write_json(root / "metrics" / (name + "_k" + io::csv::real(k) + ".json"), io::metric_to_json(g));
    if (r.entropy > cfg.Lambda_report)
      err << name << " k=" << io::csv::real(k) << ": entropy " << r.entropy << " above Lambda_report "
          << cfg.Lambda_report << "\n";
  }
  io::write_text(root / ("examples_" + name + ".csv"), table);
  out << table;
  return kOk;
}

inline int cmd_functionals(const LabConfig& cfg, const detail::MetricSource& src, std::ostream& out) {
  const ConformalMetric g = src.load(cfg);
  const FunctionalReport r = functionals(g, cfg.p);
  out << io::csv::kFunctionalHeader << "\n" << io::csv::row(g.provenance(), src.k, g.grid().n, r) << "\n";
  return kOk;
}

inline int cmd_normalize(const LabConfig& cfg, const detail::MetricSource& src, int max_iter, std::ostream& out) {
  const ConformalMetric g = src.load(cfg);
  DiagnosticsRow row;
  row.family = g.provenance();
  row.k = src.k;
  row.n = g.grid().n;
  row.epsilon1 = cfg.epsilon1;
  const FunctionalReport f = functionals(g, 1.0);
  row.area = f.area;
  row.entropy = f.entropy;
  row.dev1 = f.dev1;
  row.rho_before = rho_global(g, cfg.epsilon1).rho_global;
  const NormalizationResult r = normalize(g, cfg.epsilon1, max_iter);
  row.rho_after = r.rho_after;
  row.u_prime_sup = r.u_prime_sup;
  row.converged = r.converged;
  if (!r.converged) row.error = "NoConvergence: centre of mass still " + io::csv::real(r.center_norm);
  const auto root = detail::output_root(cfg);
  io::Json j = io::to_json(r);
  j["label"] = src.label();
  io::write_json(root / ("normalize_" + src.label() + ".json"), j);
  out << j.dump(1) << "\n" << io::csv::kDiagnosticsHeader << "\n" << io::csv::row(row) << "\n";
  return kOk;
}

inline int cmd_bubble(const LabConfig& cfg, const detail::MetricSource& src, double R, std::ostream& out) {
  const ConformalMetric g = src.load(cfg);
  const BubbleReport r = bubble_extract(g, cfg.epsilon1, R, cfg.grid_n);
  const auto root = detail::output_root(cfg);
  io::Json j = io::to_json(r);
  j["label"] = src.label();
  j["R"] = R;
  io::write_json(root / ("bubble_" + src.label() + ".json"), j);
  io::write_json(root / ("bubble_" + src.label() + "_v_prime.json"), io::to_json(r.v_prime));
  out << j.dump(1) << "\n";
  return kOk;
}

struct DiskOptions {
  std::string check;
  double eps = 1.0;
  std::optional<int> seeds;
  double q = 1.0;
  int n = 129;
  int members = 10;
  std::optional<double> lambda;
};

inline int cmd_diskpde(const LabConfig& cfg, const DiskOptions& o, std::ostream& out) {
  std::vector<EstimateReport> rows;
  const int seeds = o.seeds.value_or(o.check == "brezis-merle" ? 20 : 0);
  if (seeds < 0) throw Error(ErrorCode::InvalidArgument, "--seeds must be >= 0");
  auto constant = [&] { return sample_disk([](double, double) { return 1.0; }, o.n); };
  auto sources = [&](bool with_constant) {
    std::vector<std::pair<std::string, DiskField>> all;
    if (with_constant) all.emplace_back("f=1", constant());
    for (int s = 1; s <= seeds; ++s)
      all.emplace_back("seed=" + std::to_string(s), random_source(cfg.seed * 1000 + s, o.n));
    return all;
  };
  const double lambda = o.lambda.value_or(cfg.Lambda_report);

  if (o.check == "brezis-merle") {
    if (!(o.eps > 0.0 && o.eps < 4.0 * kPi)) throw Error(ErrorCode::InvalidArgument, "--eps must lie in (0, 4 pi)");
    for (auto& [tag, f] : sources(seeds == 0)) {
      EstimateReport r = brezis_merle_check(f, o.eps);
      r.params = tag + ";" + r.params;
      rows.push_back(std::move(r));
    }
  } else if (o.check == "lq" || o.check == "osc") {
    check_q(o.q);
    for (auto& [tag, f] : sources(true)) {
      EstimateReport r = o.check == "lq" ? lq_gradient_check(f, o.q, {0.125, 0.25, 0.5}) : osc_bound_check(f, o.q);
      r.params = tag + ";" + r.params;
      rows.push_back(std::move(r));
    }
  } else if (o.check == "eps-reg") {
    rows.push_back(epsilon_regularity_experiment(scaled_bubble_family(o.members, o.eps, o.n, cfg.seed), o.eps, lambda));
  } else if (o.check == "lp-reg") {
    rows.push_back(
        lp_regularity_experiment(scaled_bubble_family(o.members, o.eps, o.n, cfg.seed), o.eps, lambda, cfg.p));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown check '" + o.check + "'");
  }
  const std::string table = io::csv::table(io::csv::kEstimateHeader, rows, [](const EstimateReport& r) { return io::csv::row(r); });
  io::write_text(detail::output_root(cfg) / ("diskpde_" + o.check + ".csv"), table);
  out << table;
  return kOk;
}

inline int cmd_sweep(const LabConfig& cfg, std::ostream& out, std::ostream& err) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  std::vector<DiagnosticsRow> rows;
  io::Json timings = io::Json::array();
  for (const std::string& name : cfg.families) {
    const Family f = family_from_string(name);
    const auto t0 = Clock::now();
    auto part = sequence_diagnostics(f, cfg.parameters(f), cfg.diagnostics());
    timings.push_back({{"family", to_string(f)},
                       {"rows", part.size()},
                       {"seconds", std::chrono::duration<double>(Clock::now() - t0).count()}});
    rows.insert(rows.end(), part.begin(), part.end());
  }
  std::size_t failed = 0;
  for (const DiagnosticsRow& r : rows)
    if (!r.error.empty()) {
      ++failed;
      err << r.family << " k=" << io::csv::real(r.k) << ": " << r.error << "\n";
    }
  const std::string table = io::csv::table(io::csv::kDiagnosticsHeader, rows, [](const DiagnosticsRow& r) { return io::csv::row(r); });
  const auto root = detail::output_root(cfg);
  io::write_text(root / "sweep.csv", table);
  io::Json manifest = {{"config", cfg.to_json()},
                       {"version", kVersion},
                       {"compiler", __VERSION__},
                       {"rows", rows.size()},
                       {"rows_with_errors", failed},
                       {"wall_seconds", std::chrono::duration<double>(Clock::now() - start).count()},
                       {"family_wall_seconds", timings}};
  io::write_json(root / "sweep_manifest.json", manifest);
  out << table;
  return !rows.empty() && failed == rows.size() ? kData : kOk;
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical lab for conformal metrics on the sphere", "conflab"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "key=value configuration file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  LabConfig cfg;
  app.add_option("--grid_n", cfg.grid_n, "grid points per chart side (odd, >= 65)");
  app.add_option("--chart_half_width", cfg.chart_half_width);
  app.add_option("--epsilon1", cfg.epsilon1, "concentration mass");
  app.add_option("--p", cfg.p, "exponent of the devp functional");
  app.add_option("--Lambda_report", cfg.Lambda_report, "entropy reporting threshold");
  app.add_option("--seed", cfg.seed);
  app.add_option("--output_dir", cfg.output_dir, "defaults to $LAB_OUTPUT_DIR, then ./lab_output");
  app.add_option("--families", cfg.families)->delimiter(',');
  app.add_option("--cylinder_k", cfg.cylinder_k)->delimiter(',');
  app.add_option("--flat_neck_k", cfg.flat_neck_k)->delimiter(',');
  app.add_option("--dilated_s", cfg.dilated_s)->delimiter(',');
  app.add_option("--perturbed_amplitude", cfg.perturbed_amplitude)->delimiter(',');

  std::string family;
  std::vector<double> ks;
  auto* examples = app.add_subcommand("examples", "build a family, write metric files and functionals");
  examples->add_option("--family", family)->required();
  examples->add_option("--k", ks, "comma separated parameters")->delimiter(',');

  detail::MetricSource src;
  auto* functionals_cmd = app.add_subcommand("functionals", "area, entropy, dev1, devp of one metric");
  src.attach(functionals_cmd);

  int max_iter = 30;
  auto* normalize_cmd = app.add_subcommand("normalize", "mass centering by Mobius dilations");
  src.attach(normalize_cmd);
  normalize_cmd->add_option("--max_iter", max_iter);

  double R = 4.0;
  auto* bubble = app.add_subcommand("bubble", "blow up at the concentration point");
  src.attach(bubble);
  bubble->add_option("--R", R, "blow-up disk radius");

  DiskOptions disk;
  auto* diskpde = app.add_subcommand("diskpde", "estimate checks on the unit disk");
  diskpde->add_option("check", disk.check, "brezis-merle | lq | osc | eps-reg | lp-reg")
      ->required()
      ->check(CLI::IsMember({"brezis-merle", "lq", "osc", "eps-reg", "lp-reg"}));
  diskpde->add_option("--eps", disk.eps);
  diskpde->add_option("--seeds", disk.seeds);
  diskpde->add_option("--q", disk.q);
  diskpde->add_option("--n", disk.n, "disk grid size");
  diskpde->add_option("--members", disk.members);
  diskpde->add_option("--lambda", disk.lambda);

  std::string sweep_config;
  auto* sweep = app.add_subcommand("sweep", "diagnostics over the declared families");
  sweep->add_option("config", sweep_config, "key=value configuration file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  // `sweep FILE` is `sweep --config FILE`.
  if (sweep->parsed() && !sweep_config.empty()) {
    if (app.get_config_ptr()->count() > 0) {
      err << "give the sweep configuration once\n";
      return kUsage;
    }
    std::vector<std::string> again{"--config", sweep_config};
    for (const std::string& a : args)
      if (a != sweep_config) again.push_back(a);
    return run(again, out, err);
  }

  try {
    cfg.validate();
    if (examples->parsed()) return cmd_examples(cfg, family, ks, out, err);
    if (functionals_cmd->parsed()) return cmd_functionals(cfg, src, out);
    if (normalize_cmd->parsed()) return cmd_normalize(cfg, src, max_iter, out);
    if (bubble->parsed()) return cmd_bubble(cfg, src, R, out);
    if (diskpde->parsed()) return cmd_diskpde(cfg, disk, out);
    if (sweep->parsed()) {
      if (app.get_config_ptr()->count() == 0) {
        err << "sweep needs a configuration file\n";
        return kUsage;
      }
      return cmd_sweep(cfg, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const int code = exit_code_for(e.code());
    if (code == kUsage) err << "families: round, cylinder, flat_neck, dilated, perturbed; see --help\n";
    return code;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace conflab::cli
