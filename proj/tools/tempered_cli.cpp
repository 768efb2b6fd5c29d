// Command-line front end: wires configs to the library modules and writes
// CSV/JSON results plus SVG plots for the experiment reproductions.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tempered/conjugate.hpp"
#include "tempered/csv.hpp"
#include "tempered/experiments.hpp"
#include "tempered/linmodel.hpp"
#include "tempered/mcmc.hpp"
#include "tempered/metrics.hpp"
#include "tempered/svg.hpp"
#include "tempered/tuning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tempered;

namespace {

constexpr const char* kVersion = "0.1.0";

using Config = std::map<std::string, std::string>;

Config parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg[key] = value;
  }
  return cfg;
}

std::string config_digest(const Config& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](const std::string& s) {
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [k, v] : cfg) {  // std::map iterates in sorted key order
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<long> parse_long_list(const std::string& s) {
  std::vector<long> out;
  for (const auto& tok : split(s, ',')) {
    if (!tok.empty()) out.push_back(std::stol(tok));
  }
  if (out.empty()) throw ConfigError("empty integer list: " + s);
  return out;
}

std::vector<Method> parse_methods(const std::string& s) {
  std::vector<Method> out;
  for (const auto& tok : split(s, ',')) {
    if (!tok.empty()) out.push_back(method_from_name(tok));
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

// "--grid lo:hi:count:{lin|log}" override.
Grid parse_grid_override(const std::string& s, Grid base) {
  const auto parts = split(s, ':');
  if (parts.size() != 4) throw ConfigError("grid override must be lo:hi:count:{lin|log}");
  base.lower = parse_double(parts[0]);
  base.upper = parse_double(parts[1]);
  base.density = static_cast<int>(std::stol(parts[2]));
  if (parts[3] == "lin") base.spacing = Grid::Spacing::Linear;
  else if (parts[3] == "log") base.spacing = Grid::Spacing::Logarithmic;
  else throw ConfigError("grid spacing must be lin or log");
  return base;
}

struct Output {
  fs::path dir;
  Config cfg;
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::string> paths;

  fs::path file(const std::string& name) {
    paths.push_back((dir / name).string());
    return dir / name;
  }

  void write_manifest() {
    json m;
    m["command"] = command;
    m["config_digest"] = config_digest(cfg);
    m["master_seed"] = seed;
    m["artifact_version"] = kVersion;
    m["output_paths"] = paths;
    std::ofstream out(dir / "manifest.json");
    out << m.dump(2) << "\n";
  }
};

Output make_output(const std::string& command, const std::string& out_dir, const Config& cfg,
                   std::uint64_t seed) {
  Output o;
  o.dir = out_dir;
  o.cfg = cfg;
  o.command = command;
  o.seed = seed;
  fs::create_directories(o.dir);
  return o;
}

void summarize(const fs::path& p) { std::cout << "wrote " << p.string() << "\n"; }

CsvTable samples_table(const std::vector<AlphaSample>& samples) {
  CsvTable t;
  t.header = {"n", "method", "spec", "rep", "alpha_hat", "is_corner"};
  for (const auto& s : samples) {
    t.rows.push_back({std::to_string(s.n), method_name(s.method),
                      s.misspecified ? "misspecified" : "well-specified",
                      std::to_string(s.replication), format_double(s.alpha_hat),
                      s.is_corner ? "1" : "0"});
  }
  return t;
}

std::vector<AlphaSample> samples_from_table(const CsvTable& t) {
  const int cn = t.column("n");
  const int cm = t.column("method");
  const int cs = t.column("spec");
  const int cr = t.column("rep");
  const int ca = t.column("alpha_hat");
  const int cc = t.column("is_corner");
  std::vector<AlphaSample> out;
  for (const auto& r : t.rows) {
    AlphaSample s;
    s.n = std::stol(r[static_cast<size_t>(cn)]);
    s.method = method_from_name(r[static_cast<size_t>(cm)]);
    s.misspecified = r[static_cast<size_t>(cs)] == "misspecified";
    s.replication = static_cast<int>(std::stol(r[static_cast<size_t>(cr)]));
    s.alpha_hat = parse_double(r[static_cast<size_t>(ca)]);
    s.is_corner = r[static_cast<size_t>(cc)] == "1" || r[static_cast<size_t>(cc)] == "true";
    out.push_back(s);
  }
  return out;
}

// Known experiment presets. Parameters stated by the source experiments are
// encoded verbatim; everything else is this artifact's default.
void apply_preset(const std::string& name, Config& cfg) {
  auto set_default = [&](const std::string& k, const std::string& v) {
    if (!cfg.count(k)) cfg[k] = v;
  };
  if (name == "fig1") {
    set_default("methods", "loocv,safebayes");
    set_default("spec", "both");
    set_default("n_values", "100,1000,5000");
    set_default("reps", "1000");
  } else if (name == "fig2") {
    set_default("methods", "bcv,bcv-vi");
    set_default("spec", "misspecified");
    set_default("n_values", "100,1000,5000");
    set_default("reps", "1000");
  } else if (name == "fig3") {
    set_default("methods", "bcv,bcv-vi,train-test");
    set_default("spec", "both");
    set_default("n_values", "100,1000,5000");
    set_default("reps", "1000");
  } else if (name == "table2") {
    set_default("methods", "bcv,bcv-vi,loocv,train-test,safebayes");
    set_default("spec", "both");
    set_default("n_values", "100,500,1000,5000");
    set_default("reps", "1000");
  } else if (name == "fig4") {
    set_default("n_grid", "200,500,1000,2000");
    set_default("reps", "100");
    set_default("closed_form", "false");
  } else if (name == "fig5") {
    set_default("n_grid", "100,1000,10000,100000");
    set_default("reps", "100");
    set_default("closed_form", "true");
  } else if (name == "table5") {
    // the simulation-study grids are already the library defaults
  } else {
    throw ConfigError("unknown preset: " + name);
  }
}

int run_simulate(Config cfg, Output& out, int threads) {
  const auto methods = parse_methods(cfg.count("methods") ? cfg["methods"] : "bcv");
  const auto n_values = parse_long_list(cfg.count("n_values") ? cfg["n_values"] : "100,1000,5000");
  const int reps = cfg.count("reps") ? static_cast<int>(std::stol(cfg["reps"])) : 100;
  const std::string spec = cfg.count("spec") ? cfg["spec"] : "both";
  const double split = cfg.count("split_fraction") ? parse_double(cfg["split_fraction"]) : 0.70;

  std::vector<bool> specs;
  if (spec == "well-specified") specs = {false};
  else if (spec == "misspecified") specs = {true};
  else if (spec == "both") specs = {false, true};
  else throw ConfigError("spec must be well-specified, misspecified or both");

  std::vector<AlphaSample> all;
  for (bool mis : specs) {
    for (long n : n_values) {
      SimConfig sim;
      sim.n = n;
      sim.misspecified = mis;
      sim.reps = reps;
      sim.master_seed = out.seed;
      const auto batch = run_replications(sim, methods, {}, split, threads);
      all.insert(all.end(), batch.begin(), batch.end());
    }
  }

  const CsvTable t = samples_table(all);
  write_csv_file(out.file("alpha_samples.csv").string(), t);
  summarize(out.dir / "alpha_samples.csv");

  PlotOptions popts;
  popts.log_alpha_axis = true;
  write_plot_file(out.file("alpha_histograms.svg").string(), t, PlotKind::HistogramGrid, popts);
  summarize(out.dir / "alpha_histograms.svg");
  return 0;
}

int run_rates(Config cfg, Output& out) {
  if (!cfg.count("input")) throw ConfigError("rates: --input alpha_samples.csv required");
  const CsvTable t = read_csv_file(cfg["input"]);
  const auto samples = samples_from_table(t);

  RateOptions ropts;
  if (cfg.count("aggregate") && cfg["aggregate"] == "mean") ropts.aggregate_means = true;

  std::map<std::pair<std::string, std::string>, std::vector<AlphaSample>> cells;
  for (const auto& s : samples) {
    cells[{method_name(s.method), s.misspecified ? "misspecified" : "well-specified"}].push_back(s);
  }

  CsvTable rates;
  rates.header = {"method", "spec", "gamma_hat", "ci_low", "ci_high", "corner_proportion",
                  "regime"};
  for (const auto& [key, cell] : cells) {
    std::string gamma = "nan", lo = "nan", hi = "nan", corner = "nan", regime = "unclassified";
    try {
      const RegimeEstimate est = estimate_rate(cell, ropts);
      gamma = format_double(est.gamma_hat);
      lo = format_double(est.ci_low);
      hi = format_double(est.ci_high);
      corner = format_double(est.corner_proportion);
      regime = regime_name(classify_regime(cell));
    } catch (const InsufficientData&) {
      // all corners at some n; row is emitted with nan fields
    }
    rates.rows.push_back({key.first, key.second, gamma, lo, hi, corner, regime});
  }
  write_csv_file(out.file("rates.csv").string(), rates);
  summarize(out.dir / "rates.csv");

  write_plot_file(out.file("rate_fits.svg").string(), t, PlotKind::LogLogFit, {});
  summarize(out.dir / "rate_fits.svg");
  return 0;
}

ModelSpec cps_model_spec(const std::string& model, const std::vector<std::string>& covariates,
                         const Config& cfg) {
  auto col_of = [&](const std::string& key, const std::string& fallback) {
    const std::string name = cfg.count("cps." + key) ? cfg.at("cps." + key) : fallback;
    for (size_t i = 0; i < covariates.size(); ++i) {
      if (covariates[i] == name) return static_cast<int>(i);
    }
    throw SchemaMismatch("subsample: column '" + name + "' not in dataset");
  };
  const int education = col_of("education", "education");
  const int experience = col_of("experience", "experience");
  const int ethnicity = col_of("ethnicity", "ethnicity");

  ModelSpec spec;
  spec.add_intercept = true;
  if (model == "full") {
    spec.column_subset = {education, ethnicity, experience};
    spec.transforms = {{ColumnTransform::Kind::Square, experience}};
  } else if (model == "no-ethnicity") {
    spec.column_subset = {education, experience};
    spec.transforms = {{ColumnTransform::Kind::Square, experience}};
  } else if (model == "no-exp2") {
    spec.column_subset = {education, ethnicity, experience};
  } else {
    throw ConfigError("model must be full, no-ethnicity or no-exp2");
  }
  return spec;
}

int run_subsample(Config cfg, Output& out, int threads) {
  if (!cfg.count("data")) throw ConfigError("subsample: --data CSV required");
  const std::string response = cfg.count("response") ? cfg["response"] : "wage";
  const bool log_response = !cfg.count("log_response") || cfg["log_response"] == "true";
  const Dataset full = load_dataset_csv(cfg["data"], response, log_response);
  const auto covariates = dataset_covariate_names(cfg["data"], response);

  const std::string model = cfg.count("model") ? cfg["model"] : "full";
  const ModelSpec spec = cps_model_spec(model, covariates, cfg);

  SubsampleConfig sc;
  sc.sizes = parse_long_list(cfg.count("sizes") ? cfg["sizes"] : "100,1000,5000");
  sc.reps = cfg.count("reps") ? static_cast<int>(std::stol(cfg["reps"])) : 100;
  sc.methods = parse_methods(cfg.count("methods") ? cfg["methods"]
                                                  : "bcv,bcv-vi,loocv,train-test,safebayes");
  sc.seed = out.seed;
  sc.threads = threads;
  if (cfg.count("split_fraction")) sc.split_fraction = parse_double(cfg["split_fraction"]);

  const SubsampleReport report = subsample_study(full, spec, sc);

  CsvTable t = samples_table(report.samples);
  // subsample rows carry the model name instead of the simulation spec flag
  const int spec_col = t.column("spec");
  for (auto& row : t.rows) row[static_cast<size_t>(spec_col)] = model;
  write_csv_file(out.file("alpha_samples.csv").string(), t);
  summarize(out.dir / "alpha_samples.csv");

  CsvTable rates;
  rates.header = {"method", "spec", "gamma_hat", "ci_low", "ci_high", "corner_proportion"};
  for (const auto& [m, est] : report.rates) {
    rates.rows.push_back({method_name(m), model, format_double(est.gamma_hat),
                          format_double(est.ci_low), format_double(est.ci_high),
                          format_double(est.corner_proportion)});
  }
  write_csv_file(out.file("rates.csv").string(), rates);
  summarize(out.dir / "rates.csv");

  write_plot_file(out.file("alpha_histograms.svg").string(), t, PlotKind::HistogramGrid, {});
  summarize(out.dir / "alpha_histograms.svg");
  return 0;
}

int run_tune(Config cfg, Output& out) {
  if (!cfg.count("data")) throw ConfigError("tune: --data CSV required");
  if (!cfg.count("method")) throw ConfigError("tune: --method required");
  method_from_name(cfg["method"]);  // config validation before any file access
  const std::string response = cfg.count("response") ? cfg["response"] : "y";
  const Dataset d0 = load_dataset_csv(cfg["data"], response,
                                      cfg.count("log_response") && cfg["log_response"] == "true");
  Dataset d = d0;
  if (cfg.count("sigma2")) {
    d.sigma2 = parse_double(cfg["sigma2"]);
  } else if (cfg.count("estimate_sigma2") && cfg["estimate_sigma2"] == "true") {
    d.sigma2 = estimate_sigma2(d);
  }

  const Method method = method_from_name(cfg["method"]);
  Grid grid = cfg.count("preset") && cfg["preset"] == "table5" ? Grid::simulation_default(method)
                                                               : Grid::data_default(method);
  if (cfg.count("grid")) grid = parse_grid_override(cfg["grid"], grid);

  TuneOptions opts;
  if (cfg.count("split_fraction")) opts.split_fraction = parse_double(cfg["split_fraction"]);
  const TuningResult r = tune(d, method, grid, out.seed, opts);

  std::ofstream f(out.file("tuning_result.json"));
  f << r.to_json() << "\n";
  summarize(out.dir / "tuning_result.json");
  std::cout << "alpha_hat = " << format_double(r.alpha_hat)
            << (r.is_corner ? " (corner)" : "") << "\n";
  return 0;
}

int run_conjugate(Config cfg, Output& out) {
  const std::string fam_name = cfg.count("family") ? cfg["family"] : "gauss-gauss";
  ConjugateFamily fam;
  const double a = cfg.count("a") ? parse_double(cfg["a"]) : 2.0;
  const double b = cfg.count("b") ? parse_double(cfg["b"]) : 2.0;
  switch (family_from_name(fam_name)) {
    case Family::ExpGamma: fam = ConjugateFamily::exp_gamma(a, b); break;
    case Family::ParetoGamma:
      fam = ConjugateFamily::pareto_gamma(a, b, cfg.count("xm") ? parse_double(cfg["xm"]) : 1.0);
      break;
    case Family::BernBeta: fam = ConjugateFamily::bern_beta(a, b); break;
    case Family::GaussGauss:
      fam = ConjugateFamily::gauss_gauss(cfg.count("mu0") ? parse_double(cfg["mu0"]) : 0.0,
                                         cfg.count("sigma02") ? parse_double(cfg["sigma02"]) : 1.0,
                                         cfg.count("sigma2") ? parse_double(cfg["sigma2"]) : 1.0);
      break;
  }

  BvmCheckConfig bc;
  bc.n_grid = parse_long_list(cfg.count("n_grid") ? cfg["n_grid"] : "100,1000,10000");
  bc.replications = cfg.count("reps") ? static_cast<int>(std::stol(cfg["reps"])) : 50;
  bc.seed = out.seed;
  if (cfg.count("schedule")) {
    if (cfg["schedule"] == "over-n") bc.schedule = BvmCheckConfig::Schedule::Alpha0OverN;
    else if (cfg["schedule"] == "inv-sqrt") bc.schedule = BvmCheckConfig::Schedule::InvSqrtN;
    else throw ConfigError("schedule must be over-n or inv-sqrt");
  }
  const double alpha0 = cfg.count("alpha0") ? parse_double(cfg["alpha0"]) : 1.0;
  const double theta_star = cfg.count("theta_star") ? parse_double(cfg["theta_star"]) : 1.0;
  const double eta_star = fam.natural_from_conventional(theta_star);

  const auto rows = bvm_failure_check(fam, alpha0, eta_star, bc);
  CsvTable t;
  t.header = {"n", "cf_gap", "tv_to_gaussian"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.n), format_double(r.cf_gap),
                      format_double(r.tv_to_gaussian)});
  }
  write_csv_file(out.file("conjugate_report.csv").string(), t);
  summarize(out.dir / "conjugate_report.csv");

  // schema sniffing picks tv_to_gaussian plus a cf_gap side panel
  write_plot_file(out.file("conjugate_report.svg").string(), t, PlotKind::DecayCurves, {});
  summarize(out.dir / "conjugate_report.svg");
  return 0;
}

CsvTable figure4_table(const std::vector<Figure4Row>& rows) {
  CsvTable t;
  t.header = {"n", "schedule", "mean_sq_scaled_diff_mle", "mean_sq_scaled_diff_truth", "mc_se"};
  for (const auto& r : rows) {
    char sched[32];
    std::snprintf(sched, sizeof(sched), "n^%.2f", r.schedule_exponent);
    t.rows.push_back({std::to_string(r.n), sched, format_double(r.mean_sq_scaled_diff_mle),
                      format_double(r.mean_sq_scaled_diff_truth), format_double(r.mc_se)});
  }
  return t;
}

int run_figure4(Config cfg, Output& out, int threads) {
  const bool closed_form = cfg.count("closed_form") && cfg["closed_form"] == "true";
  std::vector<Figure4Row> rows;
  if (closed_form) {
    ClosedFormConfig cc;
    if (cfg.count("n_grid")) cc.n_grid = parse_long_list(cfg["n_grid"]);
    if (cfg.count("reps")) cc.replications = static_cast<int>(std::stol(cfg["reps"]));
    cc.seed = out.seed;
    rows = closed_form_threshold(cc, threads);
  } else {
    Figure4Config fc;
    if (cfg.count("n_grid")) fc.n_grid = parse_long_list(cfg["n_grid"]);
    if (cfg.count("reps")) fc.replications = static_cast<int>(std::stol(cfg["reps"]));
    if (cfg.count("draws")) fc.mcmc.m_samples = static_cast<int>(std::stol(cfg["draws"]));
    if (cfg.count("burn_in")) fc.mcmc.burn_in = static_cast<int>(std::stol(cfg["burn_in"]));
    fc.seed = out.seed;
    rows = figure4_experiment(fc, threads);
  }
  const CsvTable t = figure4_table(rows);
  const std::string stem = closed_form ? "threshold" : "figure4";
  write_csv_file(out.file(stem + ".csv").string(), t);
  summarize(out.dir / (stem + ".csv"));
  write_plot_file(out.file(stem + ".svg").string(), t, PlotKind::DecayCurves, {});
  summarize(out.dir / (stem + ".svg"));
  return 0;
}

int run_theorem3(Config cfg, Output& out) {
  MixedAlphaLaw law;
  if (cfg.count("q")) law.q = parse_double(cfg["q"]);
  if (cfg.count("alpha_coeff")) law.alpha_small.coeff = parse_double(cfg["alpha_coeff"]);
  if (cfg.count("alpha_exp")) law.alpha_small.exponent = parse_double(cfg["alpha_exp"]);
  if (cfg.count("gamma_coeff")) law.gamma_large.coeff = parse_double(cfg["gamma_coeff"]);
  if (cfg.count("gamma_exp")) law.gamma_large.exponent = parse_double(cfg["gamma_exp"]);
  const auto n_grid = parse_long_list(cfg.count("n_grid") ? cfg["n_grid"] : "100,1000,10000");
  const int p = cfg.count("p") ? static_cast<int>(std::stol(cfg["p"])) : 3;

  SimConfig sim;
  sim.n = *std::max_element(n_grid.begin(), n_grid.end());
  sim.p = p;
  sim.beta_star = Eigen::VectorXd::LinSpaced(p, 1.0, 0.1);
  sim.reps = 1;
  sim.master_seed = out.seed;
  const Dataset pool = generate(sim, 0);

  Theorem3Config tc;
  tc.seed = out.seed;
  const auto rows = theorem3_check(pool, law, n_grid, tc);

  CsvTable t;
  t.header = {"n", "metric", "value", "mc_se"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.n), r.metric, format_double(r.value),
                      format_double(r.mc_se)});
  }
  write_csv_file(out.file("theorem3.csv").string(), t);
  summarize(out.dir / "theorem3.csv");
  write_plot_file(out.file("theorem3.svg").string(), t, PlotKind::DecayCurves, {});
  summarize(out.dir / "theorem3.svg");
  return 0;
}

DistributionHandle handle_from_config(const Config& cfg, const std::string& prefix) {
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = cfg.find(prefix + "." + k);
    return it == cfg.end() ? std::nullopt : std::optional<std::string>(it->second);
  };
  const std::string kind = get("kind").value_or("gaussian");
  if (kind == "gaussian") {
    return DistributionHandle::gaussian1d(parse_double(get("mean").value_or("0")),
                                          parse_double(get("var").value_or("1")));
  }
  if (kind == "point") return DistributionHandle::point_mass1d(parse_double(get("loc").value_or("0")));
  throw ConfigError("metric: distribution kind must be gaussian or point (cli surface)");
}

int run_metric(Config cfg, Output& out) {
  const std::string kind = cfg.count("kind") ? cfg["kind"] : "tv";
  const DistributionHandle a = handle_from_config(cfg, "a");
  const DistributionHandle b = handle_from_config(cfg, "b");
  MetricConfig mc;
  mc.seed = out.seed;
  if (cfg.count("samples")) mc.samples = static_cast<int>(std::stol(cfg["samples"]));

  MetricResult r;
  if (kind == "tv") {
    r = tv_distance(a, b, mc);
  } else if (kind == "w2") {
    r = wasserstein_p(a, b, 2, mc);
  } else if (kind == "moment") {
    const int k = cfg.count("k") ? static_cast<int>(std::stol(cfg["k"])) : 1;
    Eigen::VectorXd c(1);
    c << (cfg.count("center") ? parse_double(cfg["center"]) : 0.0);
    const double scale = cfg.count("scale") ? parse_double(cfg["scale"]) : 1.0;
    r = moment_discrepancy(a, b, k, c, scale, mc);
  } else {
    throw ConfigError("metric kind must be tv, w2 or moment");
  }

  CsvTable t;
  t.header = {"n", "metric", "value", "mc_se"};
  t.rows.push_back({"1", kind, format_double(r.value), format_double(r.mc_se)});
  write_csv_file(out.file("metric.csv").string(), t);
  summarize(out.dir / "metric.csv");
  std::cout << kind << " = " << format_double(r.value);
  if (r.mc_se > 0) std::cout << " (mc se " << format_double(r.mc_se) << ")";
  std::cout << "\n";
  return 0;
}

int run_plot(Config cfg, Output& out) {
  if (!cfg.count("input")) throw ConfigError("plot: --input CSV required");
  if (!cfg.count("kind")) throw ConfigError("plot: --kind required");
  const CsvTable t = read_csv_file(cfg["input"]);
  PlotOptions popts;
  if (cfg.count("log_axis")) popts.log_alpha_axis = cfg["log_axis"] != "off";
  if (cfg.count("series_column")) popts.series_column = cfg["series_column"];
  if (cfg.count("y_column")) popts.y_column = cfg["y_column"];
  const std::string name = cfg.count("output") ? cfg["output"] : "plot.svg";
  write_plot_file(out.file(name).string(), t, plot_kind_from_name(cfg["kind"]), popts);
  summarize(out.dir / name);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tempered-posterior inference and tuning experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir = "tempered-out", preset;
  std::uint64_t seed = 0;
  int threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--preset", preset, "experiment preset (fig1..fig5, table2, table5)");

  // Per-subcommand pass-through options land in the config map so that the
  // precedence is: built-in defaults < preset < config file < flags.
  Config flag_cfg;
  auto passthrough = [&flag_cfg](CLI::App* sub, const std::string& key,
                                 const std::string& desc) {
    std::string names = "--" + key;
    if (key.find('_') != std::string::npos) {  // dashed alias, e.g. --n-grid
      std::string dashed = key;
      for (auto& c : dashed) {
        if (c == '_') c = '-';
      }
      names += ",--" + dashed;
    }
    sub->add_option_function<std::string>(
        names, [&flag_cfg, key](const std::string& v) { flag_cfg[key] = v; }, desc);
  };

  auto* simulate = app.add_subcommand("simulate", "replication study of the selected alpha");
  passthrough(simulate, "methods", "comma list: bcv,bcv-vi,loocv,train-test,safebayes");
  passthrough(simulate, "spec", "well-specified | misspecified | both");
  passthrough(simulate, "n_values", "comma list of sample sizes");
  passthrough(simulate, "reps", "replications per (n, spec)");
  passthrough(simulate, "split_fraction", "train fraction for train-test");

  auto* tune_cmd = app.add_subcommand("tune", "single-dataset grid search");
  passthrough(tune_cmd, "data", "dataset csv");
  passthrough(tune_cmd, "response", "response column name");
  passthrough(tune_cmd, "log_response", "true to model log(y)");
  passthrough(tune_cmd, "method", "tuning method");
  passthrough(tune_cmd, "grid", "lo:hi:count:{lin|log}");
  passthrough(tune_cmd, "sigma2", "fixed noise variance");
  passthrough(tune_cmd, "estimate_sigma2", "true to plug in the OLS estimate");
  passthrough(tune_cmd, "split_fraction", "train fraction for train-test");

  auto* rates = app.add_subcommand("rates", "rate regression on alpha samples");
  passthrough(rates, "input", "alpha_samples.csv");
  passthrough(rates, "aggregate", "mean to regress on per-n means");

  auto* subsample = app.add_subcommand("subsample", "subsampling study on a csv dataset");
  passthrough(subsample, "data", "dataset csv");
  passthrough(subsample, "response", "response column (default wage)");
  passthrough(subsample, "log_response", "default true");
  passthrough(subsample, "model", "full | no-ethnicity | no-exp2");
  passthrough(subsample, "sizes", "subsample sizes");
  passthrough(subsample, "reps", "subsamples per size");
  passthrough(subsample, "methods", "tuning methods");

  auto* conj = app.add_subcommand("conjugate", "conjugate-family limit diagnostics");
  passthrough(conj, "family", "exp-gamma | pareto-gamma | bern-beta | gauss-gauss");
  passthrough(conj, "alpha0", "limit of alpha_n * n");
  passthrough(conj, "theta_star", "true conventional parameter");
  passthrough(conj, "n_grid", "sample sizes");
  passthrough(conj, "reps", "replications per n");
  passthrough(conj, "schedule", "over-n | inv-sqrt");
  passthrough(conj, "a", "prior shape a");
  passthrough(conj, "b", "prior shape b");
  passthrough(conj, "mu0", "gaussian prior mean");
  passthrough(conj, "sigma02", "gaussian prior variance");
  passthrough(conj, "sigma2", "gaussian noise variance");
  passthrough(conj, "xm", "pareto scale");

  auto* fig4 = app.add_subcommand("figure4", "posterior-mean scaling experiment");
  passthrough(fig4, "n_grid", "sample sizes");
  passthrough(fig4, "reps", "replications");
  passthrough(fig4, "draws", "kept mcmc draws");
  passthrough(fig4, "burn_in", "burn-in draws");
  passthrough(fig4, "closed_form", "true for the exact linear-model arm");

  auto* th3 = app.add_subcommand("theorem3", "mixed-posterior wasserstein decay");
  passthrough(th3, "q", "mixture weight");
  passthrough(th3, "alpha_coeff", "alpha_n coefficient");
  passthrough(th3, "alpha_exp", "alpha_n exponent");
  passthrough(th3, "gamma_coeff", "gamma_n coefficient");
  passthrough(th3, "gamma_exp", "gamma_n exponent");
  passthrough(th3, "n_grid", "sample sizes");
  passthrough(th3, "p", "covariate dimension");

  auto* metric = app.add_subcommand("metric", "distances between distributions");
  passthrough(metric, "kind", "tv | w2 | moment");
  passthrough(metric, "samples", "monte carlo draws");
  passthrough(metric, "k", "moment order");
  passthrough(metric, "center", "theta* center");
  passthrough(metric, "scale", "alpha_n * n scale");
  passthrough(metric, "a.kind", "gaussian | point");
  passthrough(metric, "a.mean", "");
  passthrough(metric, "a.var", "");
  passthrough(metric, "a.loc", "");
  passthrough(metric, "b.kind", "gaussian | point");
  passthrough(metric, "b.mean", "");
  passthrough(metric, "b.var", "");
  passthrough(metric, "b.loc", "");

  auto* plot = app.add_subcommand("plot", "render a result csv to svg");
  passthrough(plot, "input", "csv path");
  passthrough(plot, "kind", "histogram_grid | loglog_fit | decay_curves");
  passthrough(plot, "output", "svg filename");
  passthrough(plot, "log_axis", "on | off");
  passthrough(plot, "series_column", "");
  passthrough(plot, "y_column", "");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    Config cfg;
    if (!preset.empty()) cfg["preset"] = preset;
    if (!config_path.empty()) {
      for (const auto& [k, v] : parse_config_file(config_path)) cfg[k] = v;
    }
    for (const auto& [k, v] : flag_cfg) cfg[k] = v;
    if (!preset.empty()) apply_preset(preset, cfg);
    cfg["seed"] = std::to_string(seed);

    const std::string name = app.get_subcommands().front()->get_name();
    Output out = make_output(name, out_dir, cfg, seed);

    int rc = 0;
    if (name == "simulate") rc = run_simulate(cfg, out, threads);
    else if (name == "tune") rc = run_tune(cfg, out);
    else if (name == "rates") rc = run_rates(cfg, out);
    else if (name == "subsample") rc = run_subsample(cfg, out, threads);
    else if (name == "conjugate") rc = run_conjugate(cfg, out);
    else if (name == "figure4") rc = run_figure4(cfg, out, threads);
    else if (name == "theorem3") rc = run_theorem3(cfg, out);
    else if (name == "metric") rc = run_metric(cfg, out);
    else if (name == "plot") rc = run_plot(cfg, out);
    else throw ConfigError("unknown subcommand");

    if (rc == 0) out.write_manifest();
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const SchemaMismatch& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const SizeTooLarge& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
