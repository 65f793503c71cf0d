// regiosim: N-region innovation-growth model with spatial knowledge
// spillovers. Subcommands simulate the coupled dynamics, solve equilibria,
// build spatial weight matrices, run Moran's I diagnostics, estimate frontier
// and panel regressions, analyze sigma convergence and generate synthetic
// datasets. Every run writes a reproducibility manifest.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regiosim/regiosim.hpp"

namespace fs = std::filesystem;
using namespace regiosim;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  bool quiet = false;
};

struct RunContext {
  RunConfig cfg;
  std::string out_dir;
  bool quiet = false;
  RunManifest manifest;

  std::string out_path(const std::string& name) const {
    return (fs::path(out_dir) / name).string();
  }

  void note(const std::string& msg) const {
    if (!quiet) std::cerr << msg << '\n';
  }

  void warn(const std::string& msg) const { std::cerr << "warning: " << msg << '\n'; }

  std::string input(const std::string& configured_path) {
    const std::string resolved = cfg.resolve(configured_path);
    manifest.input_hashes[resolved] = file_hash_hex(resolved);
    return resolved;
  }
};

RunContext make_context(const GlobalArgs& args, const std::string& command) {
  RunContext ctx;
  ctx.cfg = load_run_config(args.config_path);
  if (args.seed_override) ctx.cfg.seed = *args.seed_override;
  ctx.quiet = args.quiet;

  ctx.out_dir = args.out_dir;
  if (ctx.out_dir.empty() && ctx.cfg.out_dir) ctx.out_dir = ctx.cfg.resolve(*ctx.cfg.out_dir);
  if (ctx.out_dir.empty()) {
    const char* env = std::getenv("REGIOSIM_OUT");
    ctx.out_dir = env && *env ? env : "out";
  }
  fs::create_directories(ctx.out_dir);

  ctx.manifest.command = command;
  ctx.manifest.seed = ctx.cfg.seed;
  ctx.manifest.config_hash = file_hash_hex(args.config_path);
  ctx.manifest.input_hashes[args.config_path] = ctx.manifest.config_hash;
  ctx.manifest.started = RunManifest::now_iso();
  return ctx;
}

void finish(RunContext& ctx, const std::vector<std::string>& outputs) {
  for (const auto& path : outputs) ctx.manifest.add_output(path);
  ctx.manifest.finished = RunManifest::now_iso();
  const std::string mpath = ctx.out_path("run_manifest.json");
  ctx.manifest.write(mpath);
  ctx.note("wrote " + std::to_string(outputs.size()) + " output file(s) under " + ctx.out_dir);
}

// --------------------------------------------------------------------------
// shared assembly
// --------------------------------------------------------------------------

struct SpatialInputs {
  DistanceMatrix distances;
  SpatialWeights weights;  // row-standardized
};

SpatialInputs load_spatial(RunContext& ctx) {
  detail::require(ctx.cfg.weights.has_value(), ErrorCode::ConfigError,
                  "this command needs a $.weights section (coordinates or distances)");
  SpatialInputs s;
  if (ctx.cfg.weights->distances_path) {
    s.distances = load_distance_matrix(ctx.input(*ctx.cfg.weights->distances_path));
  } else {
    s.distances = haversine_distances(load_coordinates(ctx.input(*ctx.cfg.weights->coordinates_path)));
  }
  s.weights = row_standardize(inverse_square_weights(s.distances));
  for (Eigen::Index i : s.weights.isolated) {
    ctx.warn("region '" + s.weights.labels[static_cast<std::size_t>(i)] +
             "' is isolated (zero spillover row)");
  }
  return s;
}

EconomyConfig economy_from_config(RunContext& ctx, const SpatialWeights& weights) {
  detail::require(ctx.cfg.model.has_value(), ErrorCode::ConfigError,
                  "this command needs a $.model section");
  detail::require(!ctx.cfg.regions.empty(), ErrorCode::ConfigError,
                  "this command needs a $.regions section");
  detail::require(static_cast<Eigen::Index>(ctx.cfg.regions.size()) == weights.size(),
                  ErrorCode::ConfigError,
                  "$.regions count (" + std::to_string(ctx.cfg.regions.size()) +
                      ") does not match the weight matrix dimension (" +
                      std::to_string(weights.size()) + ")");
  if (!ctx.cfg.region_ids.empty()) {
    detail::require(ctx.cfg.region_ids == weights.labels, ErrorCode::ConfigError,
                    "$.regions ids must match the weight-source region ids in order");
  }
  EconomyConfig econ;
  econ.params = *ctx.cfg.model;
  econ.regions = ctx.cfg.regions;
  econ.weights = weights;
  return validate_config(econ);
}

Eigen::VectorXd broadcast(const std::vector<double>& values, bool is_scalar, Eigen::Index n,
                          const std::string& key) {
  if (is_scalar) return Eigen::VectorXd::Constant(n, values[0]);
  detail::require(static_cast<Eigen::Index>(values.size()) == n, ErrorCode::ConfigError,
                  key + " array length must equal the region count");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

EconomyState initial_state(const RunContext& ctx, Eigen::Index n) {
  EconomyState s;
  s.ln_A = broadcast(ctx.cfg.initial.ln_A, ctx.cfg.initial.broadcast_A, n, "$.initial.ln_A");
  s.ln_K = broadcast(ctx.cfg.initial.ln_K, ctx.cfg.initial.broadcast_K, n, "$.initial.ln_K");
  s.ln_L = broadcast(ctx.cfg.initial.ln_L, ctx.cfg.initial.broadcast_L, n, "$.initial.ln_L");
  return s;
}

std::string stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  if (p < 0.1) return ".";
  return "";
}

const char* kStarsLegend = "Signif. codes:  0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1 ' ' 1";

// --------------------------------------------------------------------------
// simulate
// --------------------------------------------------------------------------

int cmd_simulate(RunContext& ctx) {
  SpatialInputs sp = load_spatial(ctx);
  EconomyConfig econ = economy_from_config(ctx, sp.weights);
  EconomyState s0 = initial_state(ctx, econ.n_regions());
  const IntegrationConfig& ic = ctx.cfg.integration;
  Trajectory traj = simulate(econ, s0, ic.dt, ic.horizon, ic.tol);
  if (traj.early_stopped) {
    ctx.note("converged early at t=" + csv::format_double(traj.times.back()));
  }

  const std::string traj_path = ctx.out_path("trajectory.csv");
  {
    csv::Writer out(traj_path);
    out.row({"time", "region", "ln_A", "ln_K", "ln_L"});
    for (std::size_t k = 0; k < traj.size(); ++k) {
      for (Eigen::Index i = 0; i < econ.n_regions(); ++i) {
        out.row({csv::format_double(traj.times[k]),
                 sp.weights.labels[static_cast<std::size_t>(i)],
                 csv::format_double(traj.states[k].ln_A(i)),
                 csv::format_double(traj.states[k].ln_K(i)),
                 csv::format_double(traj.states[k].ln_L(i))});
      }
    }
  }
  const std::string rates_path = ctx.out_path("rates.csv");
  {
    csv::Writer out(rates_path);
    out.row({"time", "region", "g_A", "g_K"});
    for (std::size_t k = 0; k < traj.size(); ++k) {
      for (Eigen::Index i = 0; i < econ.n_regions(); ++i) {
        out.row({csv::format_double(traj.times[k]),
                 sp.weights.labels[static_cast<std::size_t>(i)],
                 csv::format_double(traj.rates[k].g_A(i)),
                 csv::format_double(traj.rates[k].g_K(i))});
      }
    }
  }

  svg::Chart chart;
  chart.title = "Knowledge growth rate: cross-region mean and +/-1 SD";
  chart.x_label = "time";
  chart.y_label = "g_A";
  svg::Series mean_series;
  mean_series.label = "mean g_A";
  svg::Band band;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Eigen::VectorXd& g = traj.rates[k].g_A;
    const double m = g.mean();
    const double sd = std::sqrt((g.array() - m).square().sum() / static_cast<double>(g.size()));
    mean_series.x.push_back(traj.times[k]);
    mean_series.y.push_back(m);
    band.x.push_back(traj.times[k]);
    band.lo.push_back(m - sd);
    band.hi.push_back(m + sd);
  }
  chart.series.push_back(mean_series);
  chart.band = band;
  const std::string svg_path = ctx.out_path("convergence.svg");
  svg::write_chart(svg_path, chart);

  finish(ctx, {traj_path, rates_path, svg_path});
  return 0;
}

// --------------------------------------------------------------------------
// equilibrium
// --------------------------------------------------------------------------

int cmd_equilibrium(RunContext& ctx) {
  SpatialInputs sp = load_spatial(ctx);
  EconomyConfig econ = economy_from_config(ctx, sp.weights);
  EquilibriumRates eq = equilibrium_solve(econ);

  bool homogeneous = true;
  for (const RegionParams& r : econ.regions) {
    if (r.mu != econ.regions[0].mu || r.n != econ.regions[0].n) homogeneous = false;
  }

  const std::string path = ctx.out_path("equilibrium.csv");
  csv::Writer out(path);
  if (homogeneous) {
    const auto [g_a_cf, g_k_cf] = equilibrium_closed_form(econ.params, econ.regions[0].mu,
                                                          econ.regions[0].n);
    const int r_max = 20;
    Eigen::VectorXd neumann = neumann_equilibrium(econ, r_max);
    out.row({"region", "g_A_star", "g_K_star", "g_A_closed_form", "g_A_neumann"});
    double d_cf = 0.0, d_ne = 0.0;
    for (Eigen::Index i = 0; i < econ.n_regions(); ++i) {
      out.row({sp.weights.labels[static_cast<std::size_t>(i)],
               csv::format_double(eq.g_A_star(i)), csv::format_double(eq.g_K_star(i)),
               csv::format_double(g_a_cf), csv::format_double(neumann(i))});
      d_cf = std::max(d_cf, std::fabs(eq.g_A_star(i) - g_a_cf));
      d_ne = std::max(d_ne, std::fabs(eq.g_A_star(i) - neumann(i)));
    }
    out.comment("max_abs_discrepancy_closed_form=" + csv::format_double(d_cf));
    out.comment("max_abs_discrepancy_neumann(r_max=" + std::to_string(r_max) +
                ")=" + csv::format_double(d_ne));
  } else {
    out.row({"region", "g_A_star", "g_K_star"});
    for (Eigen::Index i = 0; i < econ.n_regions(); ++i) {
      out.row({sp.weights.labels[static_cast<std::size_t>(i)],
               csv::format_double(eq.g_A_star(i)), csv::format_double(eq.g_K_star(i))});
    }
    out.comment("closed-form and Neumann columns omitted: heterogeneous mu or n");
  }
  finish(ctx, {path});
  return 0;
}

// --------------------------------------------------------------------------
// weights
// --------------------------------------------------------------------------

int cmd_weights(RunContext& ctx) {
  SpatialInputs sp = load_spatial(ctx);
  std::vector<std::string> outputs;

  const std::string dist_path = ctx.out_path("distances.csv");
  write_labeled_matrix(dist_path, "region", sp.distances.labels, sp.distances.d);
  outputs.push_back(dist_path);

  const std::string w_path = ctx.out_path("weights.csv");
  write_labeled_matrix(w_path, "region", sp.weights.labels, sp.weights.w);
  outputs.push_back(w_path);

  if (!ctx.cfg.bands.empty()) {
    auto bands = band_partition(sp.weights, sp.distances, ctx.cfg.bands);
    for (std::size_t b = 0; b < bands.size(); ++b) {
      const std::string band_path = ctx.out_path("band_" + std::to_string(b + 1) + ".csv");
      write_labeled_matrix(band_path, "region", bands[b].labels, bands[b].w);
      outputs.push_back(band_path);
    }
  }
  finish(ctx, outputs);
  return 0;
}

// --------------------------------------------------------------------------
// moran
// --------------------------------------------------------------------------

int cmd_moran(RunContext& ctx, const std::string& method_flag, int permutations_flag) {
  SpatialInputs sp = load_spatial(ctx);
  detail::require(ctx.cfg.moran.values_path.has_value(), ErrorCode::ConfigError,
                  "moran needs $.moran.values (region,year,value CSV)");
  ValuesPanel values = load_values_panel(ctx.input(*ctx.cfg.moran.values_path));
  detail::require(values.region_ids == sp.weights.labels, ErrorCode::DimensionMismatch,
                  "values regions must match the weight matrix regions in order");

  std::string method = method_flag.empty() ? ctx.cfg.moran.method : method_flag;
  const int n_perm = permutations_flag > 0 ? permutations_flag : ctx.cfg.moran.permutations;
  const MoranMethod::Kind kind =
      method == "analytic" ? MoranMethod::Analytic : MoranMethod::Permutation;
  detail::require(method == "analytic" || method == "permutation", ErrorCode::ConfigError,
                  "--method must be analytic or permutation");

  const std::string path = ctx.out_path("moran.csv");
  csv::Writer out(path);
  out.row({"year", "I", "expected", "variance", "z", "p", "method", "significant_5pct"});
  for (std::size_t t = 0; t < values.years.size(); ++t) {
    const std::string year = std::to_string(values.years[t]);
    try {
      MoranResult r = morans_test(values.values.col(static_cast<Eigen::Index>(t)), sp.weights,
                                  kind, n_perm, ctx.cfg.seed);
      out.row({year, csv::format_double(r.I), csv::format_double(r.expected),
               csv::format_double(r.variance), csv::format_double(r.z), csv::format_double(r.p),
               method, r.p < 0.05 ? "yes" : "no"});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateField) throw;
      ctx.warn("year " + year + ": degenerate field (all values equal), emitting NA row");
      out.row({year, "NA", "NA", "NA", "NA", "NA", method, "no"});
    }
  }
  finish(ctx, {path});
  return 0;
}

// --------------------------------------------------------------------------
// estimate
// --------------------------------------------------------------------------

struct CoefRow {
  std::string model;
  std::string term;
  double estimate = 0.0;
  double std_error = std::numeric_limits<double>::quiet_NaN();
  double stat = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
};

void write_estimates_csv(const std::string& path, const std::vector<CoefRow>& rows) {
  csv::Writer out(path);
  out.row({"model", "term", "estimate", "std_error", "stat", "p", "stars"});
  for (const auto& r : rows) {
    out.row({r.model, r.term, csv::format_double(r.estimate),
             std::isnan(r.std_error) ? "NA" : csv::format_double(r.std_error),
             std::isnan(r.stat) ? "NA" : csv::format_double(r.stat),
             std::isnan(r.p) ? "NA" : csv::format_double(r.p),
             std::isnan(r.p) ? "" : stars(r.p)});
  }
}

std::string coef_line(const std::string& term, double est, double se, double p) {
  char buf[160];
  if (std::isnan(se)) {
    std::snprintf(buf, sizeof(buf), "  %-12s %12.4f", term.c_str(), est);
  } else {
    std::snprintf(buf, sizeof(buf), "  %-12s %12.4f (%.4f) %s", term.c_str(), est, se,
                  stars(p).c_str());
  }
  return buf;
}

/// Panel from the configured source: prebuilt long CSV, or raw panel plus
/// weight matrices through the stock pipeline.
PanelMatrix load_estimation_panel(RunContext& ctx, bool bands_mode) {
  if (ctx.cfg.panel.built_path) {
    return load_panel_matrix(ctx.input(*ctx.cfg.panel.built_path));
  }
  detail::require(ctx.cfg.panel.raw_path.has_value(), ErrorCode::ConfigError,
                  "estimate needs $.panel.built or $.panel.raw");
  RawPanel raw = load_raw(ctx.input(*ctx.cfg.panel.raw_path));
  SpatialInputs sp = load_spatial(ctx);
  detail::require(sp.weights.labels == raw.region_ids, ErrorCode::DimensionMismatch,
                  "weight-source regions must match the raw panel regions in order");
  std::pair<int, int> span = ctx.cfg.stocks.growth_span.value_or(
      std::make_pair(raw.years.front(), raw.years.back()));
  StockSeries stocks = build_stocks(raw, ctx.cfg.stocks.delta, ctx.cfg.stocks.tau, span);
  std::vector<SpatialWeights> weight_list;
  if (bands_mode) {
    detail::require(!ctx.cfg.bands.empty(), ErrorCode::ConfigError,
                    "bands mode needs $.bands boundaries");
    weight_list = band_partition(sp.weights, sp.distances, ctx.cfg.bands);
  } else {
    weight_list = {sp.weights};
  }
  return build_regression_panel(raw, stocks, weight_list,
                                ctx.cfg.stocks.plus_one ? ZeroPatentPolicy::PlusOne
                                                        : ZeroPatentPolicy::Error);
}

/// Splits band spillover columns (w1lnA, w2lnA, ...) from the base
/// regressors, sorted by band index.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_band_columns(
    const PanelMatrix& pm) {
  std::vector<std::pair<int, std::size_t>> bands;
  std::vector<std::size_t> base;
  for (std::size_t j = 0; j < pm.regressor_names.size(); ++j) {
    const std::string& name = pm.regressor_names[j];
    if (name.size() >= 5 && name.front() == 'w' && name.substr(name.size() - 3) == "lnA") {
      const std::string digits = name.substr(1, name.size() - 4);
      if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos) {
        bands.emplace_back(std::stoi(digits), j);
        continue;
      }
    }
    base.push_back(j);
  }
  std::sort(bands.begin(), bands.end());
  std::vector<std::size_t> band_cols;
  for (const auto& [idx, col] : bands) band_cols.push_back(col);
  return {base, band_cols};
}

PanelMatrix subset_panel(const PanelMatrix& pm, const std::vector<std::size_t>& cols) {
  PanelMatrix out;
  out.region_ids = pm.region_ids;
  out.years = pm.years;
  out.y = pm.y;
  for (std::size_t c : cols) {
    out.X.push_back(pm.X[c]);
    out.regressor_names.push_back(pm.regressor_names[c]);
  }
  return out;
}

void append_fe_rows(std::vector<CoefRow>& rows, std::vector<std::string>& report,
                    const std::string& model, const FeFit& fit) {
  report.push_back(model + " (fixed effects, within estimator)");
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
    CoefRow r;
    r.model = model;
    r.term = fit.regressor_names[static_cast<std::size_t>(j)];
    r.estimate = fit.coefficients(j);
    r.std_error = std::sqrt(std::max(0.0, fit.covariance(j, j)));
    r.stat = r.std_error > 0.0 ? r.estimate / r.std_error
                               : std::numeric_limits<double>::infinity();
    r.p = r.std_error > 0.0 ? t_two_sided_p(r.stat, static_cast<double>(fit.df_resid)) : 0.0;
    rows.push_back(r);
    report.push_back(coef_line(r.term, r.estimate, r.std_error, r.p));
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "  F = %.4g   Prob>F = %.4g   R^2(within) = %.4f", fit.f_stat,
                fit.f_p, fit.r_squared);
  report.push_back(buf);
  report.push_back("");
}

int cmd_estimate(RunContext& ctx, const std::string& mode_flag) {
  const std::string mode = mode_flag.empty() ? ctx.cfg.estimator.mode : mode_flag;
  std::vector<CoefRow> rows;
  std::vector<std::string> report;
  std::vector<std::string> extra_outputs;

  if (mode == "sfa") {
    PanelMatrix pm = load_estimation_panel(ctx, false);
    SfaOptions opt;
    opt.estimate_mu_trunc = ctx.cfg.estimator.estimate_mu_trunc;
    opt.max_iter = ctx.cfg.estimator.max_iter;
    opt.tol = ctx.cfg.estimator.tol;
    opt.n_starts = ctx.cfg.estimator.n_starts;
    opt.seed = ctx.cfg.seed;
    SfaFit fit = sfa_fit(pm, opt);
    report.push_back("Stochastic frontier (time-varying decay), maximum likelihood");
    Eigen::VectorXd values(fit.param_names.size());
    values.head(fit.params.beta.size()) = fit.params.beta;
    Eigen::Index at = fit.params.beta.size();
    values(at++) = fit.params.sigma_sq;
    values(at++) = fit.params.gamma_var;
    values(at++) = fit.params.eta;
    if (at < values.size()) values(at) = fit.params.mu_trunc;
    // report order mirrors the tables: slopes, constant, then the frontier
    // parameters
    std::vector<std::size_t> order;
    for (std::size_t j = 1; j < static_cast<std::size_t>(fit.params.beta.size()); ++j) order.push_back(j);
    order.push_back(0);
    for (std::size_t j = static_cast<std::size_t>(fit.params.beta.size());
         j < fit.param_names.size(); ++j) order.push_back(j);
    for (std::size_t j : order) {
      CoefRow r;
      r.model = "sfa";
      r.term = fit.param_names[j] == "const" ? "Constant" : fit.param_names[j];
      r.estimate = values(static_cast<Eigen::Index>(j));
      r.std_error = fit.std_errors(static_cast<Eigen::Index>(j));
      if (!std::isnan(r.std_error) && r.std_error > 0.0) {
        r.stat = r.estimate / r.std_error;
        r.p = normal_two_sided_p(r.stat);
      }
      rows.push_back(r);
      report.push_back(coef_line(r.term, r.estimate, r.std_error, r.p));
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "  log-likelihood = %.6f   evaluations = %ld", fit.loglik,
                  fit.n_evals);
    report.push_back(buf);
    report.push_back("");

    // conditional-mean inefficiency estimates per (region, year)
    Eigen::MatrixXd scores = efficiency_scores(fit, pm);
    const std::string eff_path = ctx.out_path("efficiency.csv");
    csv::Writer eff(eff_path);
    eff.row({"region", "year", "inefficiency"});
    for (Eigen::Index i = 0; i < pm.n_regions(); ++i) {
      for (Eigen::Index t = 0; t < pm.n_periods(); ++t) {
        eff.row({pm.region_ids[static_cast<std::size_t>(i)],
                 std::to_string(pm.years[static_cast<std::size_t>(t)]),
                 csv::format_double(scores(i, t))});
      }
    }
    extra_outputs.push_back(eff_path);
  } else if (mode == "fe") {
    PanelMatrix pm = load_estimation_panel(ctx, false);
    append_fe_rows(rows, report, "fe", fe_within(pm));
  } else if (mode == "re") {
    PanelMatrix pm = load_estimation_panel(ctx, false);
    ReFit fit = re_gls(pm);
    report.push_back("re (random effects, Swamy-Arora GLS)");
    {
      CoefRow r;
      r.model = "re";
      r.term = "Constant";
      r.estimate = fit.intercept;
      r.std_error = fit.intercept_se;
      if (r.std_error > 0.0) {
        r.stat = r.estimate / r.std_error;
        r.p = normal_two_sided_p(r.stat);
      }
      rows.push_back(r);
      report.push_back(coef_line(r.term, r.estimate, r.std_error, r.p));
    }
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
      CoefRow r;
      r.model = "re";
      r.term = fit.regressor_names[static_cast<std::size_t>(j)];
      r.estimate = fit.coefficients(j);
      r.std_error = std::sqrt(std::max(0.0, fit.covariance(j, j)));
      if (r.std_error > 0.0) {
        r.stat = r.estimate / r.std_error;
        r.p = normal_two_sided_p(r.stat);
      }
      rows.push_back(r);
      report.push_back(coef_line(r.term, r.estimate, r.std_error, r.p));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "  sigma_alpha^2 = %.6g   sigma_eps^2 = %.6g   theta = %.4f   R^2 = %.4f%s",
                  fit.sigma_alpha2, fit.sigma_eps2, fit.theta_hat, fit.r_squared,
                  fit.variance_clamped ? "   (variance component clamped at 0)" : "");
    report.push_back(buf);
    report.push_back("");
  } else if (mode == "hausman") {
    PanelMatrix pm = load_estimation_panel(ctx, false);
    FeFit fe = fe_within(pm);
    ReFit re = re_gls(pm);
    HausmanResult h = hausman(fe, re);
    append_fe_rows(rows, report, "fe", fe);
    CoefRow r;
    r.model = "hausman";
    r.term = "H";
    r.estimate = h.statistic;
    r.stat = static_cast<double>(h.df);
    r.p = h.p;
    rows.push_back(r);
    char buf[200];
    std::snprintf(buf, sizeof(buf), "Hausman test: chi2(%d) = %.4f, p = %.6g%s", h.df,
                  h.statistic, h.p, h.regularized ? " (pseudo-inverse)" : "");
    report.push_back(buf);
    report.push_back(h.p < 0.01
                         ? "Conclusion: RNH at the 1% level -> fixed-effects model"
                         : "Conclusion: cannot reject at the 1% level -> random-effects model");
    report.push_back("");
  } else if (mode == "bands") {
    PanelMatrix pm = load_estimation_panel(ctx, true);
    auto [base_cols, band_cols] = split_band_columns(pm);
    detail::require(!band_cols.empty(), ErrorCode::ConfigError,
                    "bands mode needs band spillover columns (w1lnA, w2lnA, ...)");
    for (std::size_t j = 1; j <= band_cols.size(); ++j) {
      std::vector<std::size_t> cols = base_cols;
      cols.insert(cols.end(), band_cols.begin(), band_cols.begin() + static_cast<long>(j));
      PanelMatrix sub = subset_panel(pm, cols);
      append_fe_rows(rows, report, "model" + std::to_string(j), fe_within(sub));
    }
  } else {
    detail::fail(ErrorCode::ConfigError, "unknown estimate mode '" + mode + "'");
  }

  const std::string est_path = ctx.out_path("estimates.csv");
  write_estimates_csv(est_path, rows);
  const std::string report_path = ctx.out_path("report.txt");
  {
    std::ofstream out(report_path);
    detail::require(out.good(), ErrorCode::IoError, "cannot write " + report_path);
    for (const auto& line : report) out << line << '\n';
    out << kStarsLegend << '\n';
  }
  std::vector<std::string> outputs{est_path, report_path};
  outputs.insert(outputs.end(), extra_outputs.begin(), extra_outputs.end());
  finish(ctx, outputs);
  return 0;
}

// --------------------------------------------------------------------------
// convergence
// --------------------------------------------------------------------------

int cmd_convergence(RunContext& ctx, double gstar_flag) {
  detail::require(ctx.cfg.panel.raw_path.has_value(), ErrorCode::ConfigError,
                  "convergence needs $.panel.raw (a raw panel CSV, e.g. synth output)");
  RawPanel raw = load_raw(ctx.input(*ctx.cfg.panel.raw_path));
  detail::require(raw.n_regions() >= 2, ErrorCode::DimensionMismatch,
                  "convergence analysis needs at least two regions");

  const std::string sigma_path = ctx.out_path("sigma.csv");
  const std::string svg_path = ctx.out_path("sigma.svg");
  std::optional<double> gstar;
  if (gstar_flag == gstar_flag) gstar = gstar_flag;  // NaN marks "not passed"
  if (!gstar && ctx.cfg.convergence.gstar) gstar = *ctx.cfg.convergence.gstar;

  if (raw.n_periods() < 2) {
    ctx.warn("single-year panel: growth rates undefined, emitting header-only sigma.csv");
    csv::Writer out(sigma_path);
    out.row({"year", "mean_g", "sigma"});
    svg::Chart chart;
    chart.title = "Knowledge growth: mean and dispersion";
    chart.x_label = "year";
    chart.y_label = "g";
    svg::write_chart(svg_path, chart);
    finish(ctx, {sigma_path, svg_path});
    return 0;
  }

  std::pair<int, int> span = ctx.cfg.stocks.growth_span.value_or(
      std::make_pair(raw.years.front(), raw.years.back()));
  StockSeries stocks = build_stocks(raw, ctx.cfg.stocks.delta, ctx.cfg.stocks.tau, span);
  GrowthPanel growth = growth_rates_empirical(raw.patents, stocks.a, raw.region_ids, raw.years);
  SigmaSeries sigma = sigma_series(growth);

  const std::string stocks_path = ctx.out_path("stocks.csv");
  write_stock_series(stocks_path, stocks);
  const std::string growth_path = ctx.out_path("growth.csv");
  write_growth_panel(growth_path, growth);
  write_sigma_series(sigma_path, sigma);

  svg::Chart chart;
  chart.title = "Knowledge growth: mean and dispersion";
  chart.x_label = "year";
  chart.y_label = "g";
  svg::Series mean_series, sigma_series_line;
  mean_series.label = "mean g";
  sigma_series_line.label = "sigma";
  sigma_series_line.color = "#d62728";
  for (std::size_t t = 0; t < sigma.years.size(); ++t) {
    mean_series.x.push_back(sigma.years[t]);
    mean_series.y.push_back(sigma.mean_g[t]);
    sigma_series_line.x.push_back(sigma.years[t]);
    sigma_series_line.y.push_back(sigma.sigma[t]);
  }
  chart.series.push_back(mean_series);
  chart.series.push_back(sigma_series_line);
  if (gstar) chart.h_lines.push_back({*gstar, "g* = " + csv::format_double(*gstar)});
  svg::write_chart(svg_path, chart);

  finish(ctx, {stocks_path, growth_path, sigma_path, svg_path});
  return 0;
}

// --------------------------------------------------------------------------
// synth
// --------------------------------------------------------------------------

int cmd_synth(RunContext& ctx, const std::string& mode_flag) {
  const std::string mode = mode_flag.empty() ? ctx.cfg.synth.mode : mode_flag;
  if (mode == "dynamics") {
    SpatialInputs sp = load_spatial(ctx);
    EconomyConfig econ = economy_from_config(ctx, sp.weights);
    EconomyState s0 = initial_state(ctx, econ.n_regions());
    const SynthDynamicsConfig& sd = ctx.cfg.synth.dynamics;
    RawPanel data = synth_dynamics(econ, s0, sd.dt, sd.horizon_years, sd.obs_noise_sd,
                                   ctx.cfg.seed);
    const std::string path = ctx.out_path("synth_panel.csv");
    write_raw_panel(path, data);
    finish(ctx, {path});
    return 0;
  }
  if (mode == "sfa") {
    const SynthSfaConfig& ss = ctx.cfg.synth.sfa;
    SfaParams p;
    p.beta = Eigen::Map<const Eigen::VectorXd>(ss.beta.data(),
                                               static_cast<Eigen::Index>(ss.beta.size()));
    p.sigma_sq = ss.sigma_sq;
    p.gamma_var = ss.gamma_var;
    p.eta = ss.eta;
    p.mu_trunc = ss.mu_trunc;
    SfaDesign design;
    design.x_mean = Eigen::Map<const Eigen::VectorXd>(ss.x_mean.data(),
                                                      static_cast<Eigen::Index>(ss.x_mean.size()));
    design.x_sd = Eigen::Map<const Eigen::VectorXd>(ss.x_sd.data(),
                                                    static_cast<Eigen::Index>(ss.x_sd.size()));
    PanelMatrix pm = synth_sfa(p, ss.n_regions, ss.t_periods, design, ctx.cfg.seed);
    const std::string path = ctx.out_path("synth_sfa_panel.csv");
    write_panel_matrix(path, pm);
    finish(ctx, {path});
    return 0;
  }
  detail::fail(ErrorCode::ConfigError, "unknown synth mode '" + mode + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regiosim: regional innovation growth with spatial knowledge spillovers"};
  app.require_subcommand(1);

  GlobalArgs args;
  app.add_option("--config", args.config_path, "run configuration JSON")->required();
  app.add_option("--out", args.out_dir, "output directory (default: $REGIOSIM_OUT or ./out)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
  app.add_flag("--quiet", args.quiet, "suppress progress notes");

  // global flags may trail the subcommand
  auto* sim = app.add_subcommand("simulate", "integrate the growth model and chart convergence");
  sim->fallthrough();
  auto* eq = app.add_subcommand("equilibrium", "solve steady growth rates (LU/closed form/Neumann)");
  eq->fallthrough();
  auto* wts = app.add_subcommand("weights", "emit distance, weight and band matrices");
  wts->fallthrough();
  auto* moran = app.add_subcommand("moran", "Moran's I per year with significance tests");
  moran->fallthrough();
  std::string moran_method;
  int moran_perms = 0;
  moran->add_option("--method", moran_method, "analytic | permutation");
  moran->add_option("--permutations", moran_perms, "permutation count (>= 99)");
  auto* est = app.add_subcommand("estimate", "frontier and panel estimators");
  est->fallthrough();
  std::string est_mode;
  est->add_option("--mode", est_mode, "sfa | fe | re | hausman | bands");
  auto* conv = app.add_subcommand("convergence", "sigma-convergence of knowledge growth rates");
  conv->fallthrough();
  double gstar_flag = std::numeric_limits<double>::quiet_NaN();
  conv->add_option("--gstar", gstar_flag, "reference steady growth rate line");
  auto* synth = app.add_subcommand("synth", "generate seeded synthetic datasets");
  synth->fallthrough();
  std::string synth_mode;
  synth->add_option("--mode", synth_mode, "dynamics | sfa");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (seed_opt->count() > 0) args.seed_override = seed_value;

  try {
    RunContext ctx = make_context(args, app.get_subcommands().front()->get_name());
    if (sim->parsed()) return cmd_simulate(ctx);
    if (eq->parsed()) return cmd_equilibrium(ctx);
    if (wts->parsed()) return cmd_weights(ctx);
    if (moran->parsed()) return cmd_moran(ctx, moran_method, moran_perms);
    if (est->parsed()) return cmd_estimate(ctx, est_mode);
    if (conv->parsed()) return cmd_convergence(ctx, gstar_flag);
    if (synth->parsed()) return cmd_synth(ctx, synth_mode);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.input_error() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
