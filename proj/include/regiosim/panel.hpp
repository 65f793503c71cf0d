#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "regiosim/csv.hpp"
#include "regiosim/dynamics.hpp"
#include "regiosim/econometrics.hpp"
#include "regiosim/errors.hpp"
#include "regiosim/model.hpp"
#include "regiosim/rng.hpp"
#include "regiosim/spatial.hpp"
#include "regiosim/stats.hpp"

namespace regiosim {

inline constexpr double kCapitalDepreciation = 0.10;     // delta for R&D capital
inline constexpr double kKnowledgeDepreciation = 0.0714; // tau = 1/14 service years

/// Raw observed panel: authorized patents, nominal R&D expense, R&D
/// personnel and the GDP deflator per (region, year). Balanced, consecutive
/// years.
struct RawPanel {
  std::vector<std::string> region_ids;  // N, first-appearance order
  std::vector<int> years;               // T, consecutive
  Eigen::MatrixXd patents;              // N x T, >= 0
  Eigen::MatrixXd rnd_expense;          // N x T, >= 0
  Eigen::MatrixXd personnel;            // N x T, > 0
  Eigen::MatrixXd deflator;             // N x T, > 0

  Eigen::Index n_regions() const { return static_cast<Eigen::Index>(region_ids.size()); }
  Eigen::Index n_periods() const { return static_cast<Eigen::Index>(years.size()); }
};

/// Derived stocks per (region, year): R&D capital by perpetual inventory,
/// knowledge stock from depreciated cumulative patent flows.
struct StockSeries {
  std::vector<std::string> region_ids;
  std::vector<int> years;
  Eigen::MatrixXd k_r;
  Eigen::MatrixXd a;
};

/// Empirical knowledge growth rates g_it = P_i(t) / A_i(t-1), defined from
/// the second panel year on.
struct GrowthPanel {
  std::vector<std::string> region_ids;
  std::vector<int> years;  // T-1 entries
  Eigen::MatrixXd g;       // N x (T-1)
};

struct SigmaSeries {
  std::vector<int> years;
  std::vector<double> mean_g;
  std::vector<double> sigma;  // population standard deviation across regions
};

// ---------------------------------------------------------------------------
// ingestion
// ---------------------------------------------------------------------------

/// Loads and validates a raw panel CSV with header
/// region,year,patents,rnd_expense,personnel,deflator. Rows may arrive in any
/// order; the grid must be complete (every region observed in every year).
inline RawPanel load_raw(const std::string& path) {
  CsvTable t = csv::read(path);
  const std::vector<std::string> expect{"region", "year",      "patents",
                                        "rnd_expense", "personnel", "deflator"};
  detail::require(t.header == expect, ErrorCode::SchemaError,
                  path + ": header must be region,year,patents,rnd_expense,personnel,deflator");

  struct Cell {
    double p, r, l, d;
  };
  std::vector<std::string> regions;
  std::map<std::string, std::size_t> region_index;
  std::map<std::pair<std::size_t, int>, Cell> cells;
  int year_min = 0, year_max = 0;
  bool first = true;
  for (std::size_t rix = 0; rix < t.rows.size(); ++rix) {
    const auto& row = t.rows[rix];
    const std::string where = path + ":row " + std::to_string(rix + 2);
    const std::string& region = row[0];
    const int year = static_cast<int>(csv::parse_int(row[1], where));
    auto [it, inserted] = region_index.try_emplace(region, regions.size());
    if (inserted) regions.push_back(region);
    Cell c{csv::parse_double(row[2], where), csv::parse_double(row[3], where),
           csv::parse_double(row[4], where), csv::parse_double(row[5], where)};
    detail::require(c.p >= 0.0, ErrorCode::NonPositive, where + ": patents must be >= 0");
    detail::require(c.r >= 0.0, ErrorCode::NonPositive, where + ": rnd_expense must be >= 0");
    detail::require(c.l > 0.0, ErrorCode::NonPositive, where + ": personnel must be > 0");
    detail::require(c.d > 0.0, ErrorCode::NonPositive, where + ": deflator must be > 0");
    const bool fresh = cells.emplace(std::make_pair(it->second, year), c).second;
    detail::require(fresh, ErrorCode::SchemaError,
                    where + ": duplicate (region, year) = (" + region + ", " +
                        std::to_string(year) + ")");
    if (first || year < year_min) year_min = year;
    if (first || year > year_max) year_max = year;
    first = false;
  }
  detail::require(!regions.empty(), ErrorCode::SchemaError, path + ": no data rows");

  RawPanel out;
  out.region_ids = regions;
  for (int y = year_min; y <= year_max; ++y) out.years.push_back(y);
  const auto n = static_cast<Eigen::Index>(regions.size());
  const auto tt = static_cast<Eigen::Index>(out.years.size());
  out.patents.resize(n, tt);
  out.rnd_expense.resize(n, tt);
  out.personnel.resize(n, tt);
  out.deflator.resize(n, tt);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (Eigen::Index ty = 0; ty < tt; ++ty) {
      const int year = out.years[static_cast<std::size_t>(ty)];
      auto it = cells.find({i, year});
      detail::require(it != cells.end(), ErrorCode::UnbalancedPanel,
                      path + ": region '" + regions[i] + "' missing year " +
                          std::to_string(year));
      const Eigen::Index ei = static_cast<Eigen::Index>(i);
      out.patents(ei, ty) = it->second.p;
      out.rnd_expense(ei, ty) = it->second.r;
      out.personnel(ei, ty) = it->second.l;
      out.deflator(ei, ty) = it->second.d;
    }
  }
  return out;
}

/// Deflated R&D expense, R_real(t) = R(t) / deflator(t).
inline Eigen::MatrixXd real_expense(const RawPanel& raw) {
  return raw.rnd_expense.array() / raw.deflator.array();
}

namespace detail_panel {

/// Geometric average annual growth of a positive series over [span_first,
/// span_last]: (x_last / x_first)^(1/years) - 1.
inline double geometric_growth(const Eigen::MatrixXd& flows, const std::vector<int>& years,
                               Eigen::Index region, std::pair<int, int> span) {
  detail::require(span.first < span.second, ErrorCode::ParameterOutOfRange,
                  "growth span must cover at least one year");
  auto locate = [&](int y) -> Eigen::Index {
    for (std::size_t j = 0; j < years.size(); ++j) {
      if (years[j] == y) return static_cast<Eigen::Index>(j);
    }
    detail::fail(ErrorCode::ParameterOutOfRange,
                 "growth span year " + std::to_string(y) + " not in the panel");
  };
  const Eigen::Index j0 = locate(span.first);
  const Eigen::Index j1 = locate(span.second);
  const double x0 = flows(region, j0);
  const double x1 = flows(region, j1);
  detail::require(x0 > 0.0 && x1 > 0.0, ErrorCode::NonPositiveInitialGrowth,
                  "growth-span endpoints must be positive flows");
  return std::pow(x1 / x0, 1.0 / static_cast<double>(span.second - span.first)) - 1.0;
}

/// Perpetual-inventory recursion with Griliches-style initialization:
/// S_0 = flow_0 / (g_i + rate), then S_t = (1 - rate) S_{t-1} + flow_t.
inline Eigen::MatrixXd stock_recursion(const Eigen::MatrixXd& flows, const std::vector<int>& years,
                                       double rate, std::pair<int, int> growth_span) {
  detail::require(rate > 0.0 && rate <= 1.0, ErrorCode::ParameterOutOfRange,
                  "depreciation rate must lie in (0, 1]");
  Eigen::MatrixXd stocks(flows.rows(), flows.cols());
  for (Eigen::Index i = 0; i < flows.rows(); ++i) {
    const double g = geometric_growth(flows, years, i, growth_span);
    detail::require(g + rate > 0.0, ErrorCode::NonPositiveInitialGrowth,
                    "g_i + depreciation must be > 0 for region index " + std::to_string(i));
    stocks(i, 0) = flows(i, 0) / (g + rate);
    for (Eigen::Index t = 1; t < flows.cols(); ++t) {
      stocks(i, t) = (1.0 - rate) * stocks(i, t - 1) + flows(i, t);
    }
  }
  return stocks;
}

}  // namespace detail_panel

/// R&D capital stock from deflated expense flows.
inline Eigen::MatrixXd perpetual_inventory(const Eigen::MatrixXd& real_flows,
                                           const std::vector<int>& years, double delta,
                                           std::pair<int, int> growth_span) {
  return detail_panel::stock_recursion(real_flows, years, delta, growth_span);
}

/// Knowledge stock from patent flows; same recursion with rate tau
/// (default 0.0714, the reciprocal of a 14-year service life).
inline Eigen::MatrixXd knowledge_stock(const Eigen::MatrixXd& patents,
                                       const std::vector<int>& years,
                                       double tau = kKnowledgeDepreciation,
                                       std::pair<int, int> growth_span = {0, 0}) {
  if (growth_span.first == 0 && growth_span.second == 0) {
    growth_span = {years.front(), years.back()};
  }
  return detail_panel::stock_recursion(patents, years, tau, growth_span);
}

/// Convenience: both stocks at once, full-span growth by default.
inline StockSeries build_stocks(const RawPanel& raw, double delta = kCapitalDepreciation,
                                double tau = kKnowledgeDepreciation,
                                std::pair<int, int> growth_span = {0, 0}) {
  if (growth_span.first == 0 && growth_span.second == 0) {
    growth_span = {raw.years.front(), raw.years.back()};
  }
  StockSeries s;
  s.region_ids = raw.region_ids;
  s.years = raw.years;
  s.k_r = perpetual_inventory(real_expense(raw), raw.years, delta, growth_span);
  s.a = knowledge_stock(raw.patents, raw.years, tau, growth_span);
  return s;
}

/// Policy for zero patent counts in a lead year: error by default, or the
/// documented ln(P+1) substitution.
enum class ZeroPatentPolicy { Error, PlusOne };

/// Assembles the regression panel: response y_it = ln P_i(t+1) (the last
/// panel year is dropped), regressors lnKr, lnLr, lnA and one spillover
/// column sum_j w_ij ln A_j(t) per supplied weight matrix (named wlnA for a
/// single matrix, w1lnA.. for several).
inline PanelMatrix build_regression_panel(const RawPanel& raw, const StockSeries& stocks,
                                          const std::vector<SpatialWeights>& weights,
                                          ZeroPatentPolicy policy = ZeroPatentPolicy::Error) {
  detail::require(raw.n_periods() >= 2, ErrorCode::DimensionMismatch,
                  "need at least two years to form the lead response");
  detail::require(stocks.region_ids == raw.region_ids && stocks.years == raw.years,
                  ErrorCode::DimensionMismatch, "stocks do not match the raw panel");
  detail::require(!weights.empty(), ErrorCode::DimensionMismatch,
                  "need at least one weight matrix");
  for (const auto& w : weights) {
    detail::require(w.size() == raw.n_regions(), ErrorCode::DimensionMismatch,
                    "weight matrix dimension does not match the panel");
    detail::require(w.labels == raw.region_ids, ErrorCode::DimensionMismatch,
                    "weight matrix labels must match the panel regions in order");
  }

  const Eigen::Index n = raw.n_regions();
  const Eigen::Index t_out = raw.n_periods() - 1;

  PanelMatrix pm;
  pm.region_ids = raw.region_ids;
  pm.years.assign(raw.years.begin(), raw.years.end() - 1);
  pm.y.resize(n, t_out);

  Eigen::MatrixXd ln_a(n, raw.n_periods());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < raw.n_periods(); ++t) {
      detail::require(stocks.a(i, t) > 0.0 && stocks.k_r(i, t) > 0.0, ErrorCode::NonPositive,
                      "stocks must be strictly positive to take logs");
      ln_a(i, t) = std::log(stocks.a(i, t));
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index t = 0; t < t_out; ++t) {
      const double lead = raw.patents(i, t + 1);
      if (lead <= 0.0) {
        detail::require(policy == ZeroPatentPolicy::PlusOne, ErrorCode::ZeroResponse,
                        "zero patents in lead year " +
                            std::to_string(raw.years[static_cast<std::size_t>(t + 1)]) +
                            " for region '" + raw.region_ids[static_cast<std::size_t>(i)] +
                            "' (use the ln(P+1) substitution to proceed)");
      }
      pm.y(i, t) = policy == ZeroPatentPolicy::PlusOne ? std::log(lead + 1.0) : std::log(lead);
    }
  }

  pm.regressor_names = {"lnKr", "lnLr", "lnA"};
  pm.X.push_back(stocks.k_r.leftCols(t_out).array().log().matrix());
  pm.X.push_back(raw.personnel.leftCols(t_out).array().log().matrix());
  pm.X.push_back(ln_a.leftCols(t_out));
  for (std::size_t m = 0; m < weights.size(); ++m) {
    Eigen::MatrixXd spill = weights[m].w * ln_a.leftCols(t_out);
    pm.X.push_back(spill);
    pm.regressor_names.push_back(weights.size() == 1 ? "wlnA"
                                                     : "w" + std::to_string(m + 1) + "lnA");
  }
  pm.check();
  return pm;
}

/// g_it = P_i(t) / A_i(t-1) from the second panel year on.
inline GrowthPanel growth_rates_empirical(const Eigen::MatrixXd& patents,
                                          const Eigen::MatrixXd& knowledge,
                                          const std::vector<std::string>& region_ids,
                                          const std::vector<int>& years) {
  detail::require(patents.rows() == knowledge.rows() && patents.cols() == knowledge.cols(),
                  ErrorCode::DimensionMismatch, "patents/knowledge dimension mismatch");
  detail::require(patents.cols() >= 2, ErrorCode::DimensionMismatch,
                  "need at least two years for growth rates");
  GrowthPanel out;
  out.region_ids = region_ids;
  out.years.assign(years.begin() + 1, years.end());
  out.g.resize(patents.rows(), patents.cols() - 1);
  for (Eigen::Index i = 0; i < patents.rows(); ++i) {
    for (Eigen::Index t = 1; t < patents.cols(); ++t) {
      detail::require(knowledge(i, t - 1) > 0.0, ErrorCode::NonPositive,
                      "knowledge stock must be positive");
      out.g(i, t - 1) = patents(i, t) / knowledge(i, t - 1);
    }
  }
  return out;
}

/// Cross-region mean and population standard deviation of g_it per year.
inline SigmaSeries sigma_series(const GrowthPanel& g) {
  detail::require(g.g.rows() >= 2, ErrorCode::DimensionMismatch,
                  "sigma series needs at least two regions");
  SigmaSeries out;
  out.years = g.years;
  const double n = static_cast<double>(g.g.rows());
  for (Eigen::Index t = 0; t < g.g.cols(); ++t) {
    const double mean = g.g.col(t).mean();
    const double var = (g.g.col(t).array() - mean).square().sum() / n;
    out.mean_g.push_back(mean);
    out.sigma.push_back(std::sqrt(var));
  }
  return out;
}

// ---------------------------------------------------------------------------
// synthetic data
// ---------------------------------------------------------------------------

/// Simulates the growth model and samples an annual RawPanel-shaped dataset:
/// P(t) = Adot(t-1) (evaluated analytically at the year mark), R(t) = a_K K(t),
/// Lr(t) = a_L L(t), deflator = 1. Optional multiplicative lognormal
/// observation noise exp(sd * Z) on P, R and Lr. Deterministic per seed.
inline RawPanel synth_dynamics(const EconomyConfig& config, const EconomyState& initial,
                               double dt, int horizon_years, double obs_noise_sd,
                               std::uint64_t seed) {
  validate_config(config);
  detail::require(config.params.a_K > 0.0 && config.params.a_L > 0.0,
                  ErrorCode::ParameterOutOfRange,
                  "synthetic dynamics data needs positive R&D shares a_K, a_L");
  detail::require(dt > 0.0 && dt <= 1.0, ErrorCode::ParameterOutOfRange,
                  "dt must lie in (0, 1]");
  detail::require(horizon_years >= 2, ErrorCode::ParameterOutOfRange,
                  "need at least two sampled years");
  detail::require(obs_noise_sd >= 0.0, ErrorCode::ParameterOutOfRange,
                  "obs_noise_sd must be >= 0");

  const Eigen::Index n = config.n_regions();
  const int n_sub = std::max(1, static_cast<int>(std::ceil(1.0 / dt)));
  const double h = 1.0 / static_cast<double>(n_sub);

  // A, K, L and Adot at integer marks 0..horizon
  std::vector<Eigen::VectorXd> level_a, adot;
  std::vector<EconomyState> marks;
  EconomyState s = initial;
  for (int year = 0; year <= horizon_years; ++year) {
    GrowthRates g = growth_rates(s, config);
    Eigen::VectorXd a = s.ln_A.array().exp();
    marks.push_back(s);
    level_a.push_back(a);
    adot.push_back(g.g_A.cwiseProduct(a));
    for (int k = 0; k < n_sub; ++k) s = step(s, config, h);
  }

  RawPanel out;
  for (Eigen::Index i = 0; i < n; ++i) out.region_ids.push_back("r" + std::to_string(i + 1));
  for (int year = 1; year <= horizon_years; ++year) out.years.push_back(year);
  const auto t_len = static_cast<Eigen::Index>(out.years.size());
  out.patents.resize(n, t_len);
  out.rnd_expense.resize(n, t_len);
  out.personnel.resize(n, t_len);
  out.deflator = Eigen::MatrixXd::Ones(n, t_len);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto eng = engine_for(seed, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> z(0.0, 1.0);
    for (Eigen::Index t = 0; t < t_len; ++t) {
      const std::size_t year = static_cast<std::size_t>(t) + 1;
      double p = adot[year - 1](i);  // new knowledge produced over the previous year
      double r = config.params.a_K * std::exp(marks[year].ln_K(i));
      double l = config.params.a_L * std::exp(marks[year].ln_L(i));
      if (obs_noise_sd > 0.0) {
        p *= std::exp(obs_noise_sd * z(eng));
        r *= std::exp(obs_noise_sd * z(eng));
        l *= std::exp(obs_noise_sd * z(eng));
      }
      out.patents(i, t) = p;
      out.rnd_expense(i, t) = r;
      out.personnel(i, t) = l;
    }
  }
  return out;
}

/// Regressor design for the stochastic-frontier generator: k regressors
/// drawn independently as N(mean_j, sd_j^2).
struct SfaDesign {
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_sd;

  Eigen::Index k() const { return x_mean.size(); }
};

/// Draws a panel exactly from the time-varying decay frontier model:
/// y = X beta + v - exp(-eta (t - T)) u_i, u_i ~ N+(mu, sigma_u^2) via the
/// inverse-CDF transform, v ~ N(0, sigma_v^2). Deterministic per seed.
inline PanelMatrix synth_sfa(const SfaParams& true_params, int n_regions, int n_periods,
                             const SfaDesign& design, std::uint64_t seed) {
  true_params.check();
  detail::require(n_regions >= 2 && n_periods >= 2, ErrorCode::ParameterOutOfRange,
                  "need N >= 2 and T >= 2");
  detail::require(design.x_mean.size() == design.x_sd.size() && design.k() >= 1,
                  ErrorCode::ParameterOutOfRange, "design means/sds mismatch");
  detail::require(true_params.beta.size() == design.k() + 1, ErrorCode::ParameterOutOfRange,
                  "beta length must be k+1");
  detail::require((design.x_sd.array() > 0.0).all(), ErrorCode::ParameterOutOfRange,
                  "design sds must be positive");

  const double sigma_u = std::sqrt(true_params.gamma_var * true_params.sigma_sq);
  const double sigma_v = std::sqrt((1.0 - true_params.gamma_var) * true_params.sigma_sq);

  PanelMatrix pm;
  for (int i = 0; i < n_regions; ++i) pm.region_ids.push_back("r" + std::to_string(i + 1));
  for (int t = 0; t < n_periods; ++t) pm.years.push_back(t + 1);
  const Eigen::Index k = design.k();
  pm.y.resize(n_regions, n_periods);
  for (Eigen::Index j = 0; j < k; ++j) {
    pm.X.emplace_back(n_regions, n_periods);
    pm.regressor_names.push_back("x" + std::to_string(j + 1));
  }

  auto eng_x = engine_for(seed, 0);
  auto eng_u = engine_for(seed, 1);
  auto eng_v = engine_for(seed, 2);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (Eigen::Index i = 0; i < n_regions; ++i) {
    double u_i = 0.0;
    if (sigma_u > 0.0) {
      const double p0 = norm_cdf(-true_params.mu_trunc / sigma_u);
      double arg = p0 + unif(eng_u) * (1.0 - p0);
      arg = std::min(arg, 1.0 - 1e-16);
      u_i = true_params.mu_trunc + sigma_u * norm_quantile(arg);
      u_i = std::max(u_i, 0.0);
    }
    for (Eigen::Index t = 0; t < n_periods; ++t) {
      double xb = true_params.beta(0);
      for (Eigen::Index j = 0; j < k; ++j) {
        const double x = design.x_mean(j) + design.x_sd(j) * z(eng_x);
        pm.X[static_cast<std::size_t>(j)](i, t) = x;
        xb += true_params.beta(j + 1) * x;
      }
      const double decay = std::exp(-true_params.eta *
                                    static_cast<double>(pm.years[static_cast<std::size_t>(t)] -
                                                        pm.years.back()));
      pm.y(i, t) = xb + sigma_v * z(eng_v) - decay * u_i;
    }
  }
  return pm;
}

// ---------------------------------------------------------------------------
// CSV interfaces
// ---------------------------------------------------------------------------

inline void write_raw_panel(const std::string& path, const RawPanel& raw) {
  csv::Writer out(path);
  out.row({"region", "year", "patents", "rnd_expense", "personnel", "deflator"});
  for (Eigen::Index i = 0; i < raw.n_regions(); ++i) {
    for (Eigen::Index t = 0; t < raw.n_periods(); ++t) {
      out.row({raw.region_ids[static_cast<std::size_t>(i)],
               std::to_string(raw.years[static_cast<std::size_t>(t)]),
               csv::format_double(raw.patents(i, t)), csv::format_double(raw.rnd_expense(i, t)),
               csv::format_double(raw.personnel(i, t)), csv::format_double(raw.deflator(i, t))});
    }
  }
}

inline void write_stock_series(const std::string& path, const StockSeries& s) {
  csv::Writer out(path);
  out.row({"region", "year", "k_r", "a"});
  for (Eigen::Index i = 0; i < s.k_r.rows(); ++i) {
    for (Eigen::Index t = 0; t < s.k_r.cols(); ++t) {
      out.row({s.region_ids[static_cast<std::size_t>(i)],
               std::to_string(s.years[static_cast<std::size_t>(t)]),
               csv::format_double(s.k_r(i, t)), csv::format_double(s.a(i, t))});
    }
  }
}

inline void write_growth_panel(const std::string& path, const GrowthPanel& g) {
  csv::Writer out(path);
  out.row({"region", "year", "g"});
  for (Eigen::Index i = 0; i < g.g.rows(); ++i) {
    for (Eigen::Index t = 0; t < g.g.cols(); ++t) {
      out.row({g.region_ids[static_cast<std::size_t>(i)],
               std::to_string(g.years[static_cast<std::size_t>(t)]),
               csv::format_double(g.g(i, t))});
    }
  }
}

inline void write_sigma_series(const std::string& path, const SigmaSeries& s) {
  csv::Writer out(path);
  out.row({"year", "mean_g", "sigma"});
  for (std::size_t t = 0; t < s.years.size(); ++t) {
    out.row({std::to_string(s.years[t]), csv::format_double(s.mean_g[t]),
             csv::format_double(s.sigma[t])});
  }
}

/// Long-format prebuilt regression panel: region,year,y,<regressor names...>.
inline void write_panel_matrix(const std::string& path, const PanelMatrix& pm) {
  csv::Writer out(path);
  std::vector<std::string> header{"region", "year", "y"};
  header.insert(header.end(), pm.regressor_names.begin(), pm.regressor_names.end());
  out.row(header);
  for (Eigen::Index i = 0; i < pm.n_regions(); ++i) {
    for (Eigen::Index t = 0; t < pm.n_periods(); ++t) {
      std::vector<std::string> row{pm.region_ids[static_cast<std::size_t>(i)],
                                   std::to_string(pm.years[static_cast<std::size_t>(t)]),
                                   csv::format_double(pm.y(i, t))};
      for (const auto& x : pm.X) row.push_back(csv::format_double(x(i, t)));
      out.row(row);
    }
  }
}

inline PanelMatrix load_panel_matrix(const std::string& path) {
  CsvTable t = csv::read(path);
  detail::require(t.header.size() >= 4 && t.header[0] == "region" && t.header[1] == "year" &&
                      t.header[2] == "y",
                  ErrorCode::SchemaError,
                  path + ": header must start region,year,y followed by regressors");
  const std::size_t k = t.header.size() - 3;

  std::vector<std::string> regions;
  std::map<std::string, std::size_t> region_index;
  std::map<std::pair<std::size_t, int>, std::vector<double>> cells;
  int ymin = 0, ymax = 0;
  bool first = true;
  for (std::size_t rix = 0; rix < t.rows.size(); ++rix) {
    const auto& row = t.rows[rix];
    const std::string where = path + ":row " + std::to_string(rix + 2);
    auto [it, inserted] = region_index.try_emplace(row[0], regions.size());
    if (inserted) regions.push_back(row[0]);
    const int year = static_cast<int>(csv::parse_int(row[1], where));
    std::vector<double> vals;
    for (std::size_t j = 2; j < row.size(); ++j) vals.push_back(csv::parse_double(row[j], where));
    detail::require(cells.emplace(std::make_pair(it->second, year), vals).second,
                    ErrorCode::SchemaError, where + ": duplicate (region, year)");
    if (first || year < ymin) ymin = year;
    if (first || year > ymax) ymax = year;
    first = false;
  }
  detail::require(!regions.empty(), ErrorCode::SchemaError, path + ": no data rows");

  PanelMatrix pm;
  pm.region_ids = regions;
  for (int y = ymin; y <= ymax; ++y) pm.years.push_back(y);
  pm.regressor_names.assign(t.header.begin() + 3, t.header.end());
  const auto n = static_cast<Eigen::Index>(regions.size());
  const auto tt = static_cast<Eigen::Index>(pm.years.size());
  pm.y.resize(n, tt);
  for (std::size_t j = 0; j < k; ++j) pm.X.emplace_back(n, tt);
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (Eigen::Index ty = 0; ty < tt; ++ty) {
      auto it = cells.find({i, pm.years[static_cast<std::size_t>(ty)]});
      detail::require(it != cells.end(), ErrorCode::UnbalancedPanel,
                      path + ": region '" + regions[i] + "' missing year " +
                          std::to_string(pm.years[static_cast<std::size_t>(ty)]));
      pm.y(static_cast<Eigen::Index>(i), ty) = it->second[0];
      for (std::size_t j = 0; j < k; ++j) {
        pm.X[j](static_cast<Eigen::Index>(i), ty) = it->second[j + 1];
      }
    }
  }
  pm.check();
  return pm;
}

/// Long-format values file for spatial statistics: region,year,value.
struct ValuesPanel {
  std::vector<std::string> region_ids;
  std::vector<int> years;
  Eigen::MatrixXd values;  // N x T
};

inline ValuesPanel load_values_panel(const std::string& path) {
  CsvTable t = csv::read(path);
  const std::vector<std::string> expect{"region", "year", "value"};
  detail::require(t.header == expect, ErrorCode::SchemaError,
                  path + ": header must be region,year,value");
  std::vector<std::string> regions;
  std::map<std::string, std::size_t> region_index;
  std::map<std::pair<std::size_t, int>, double> cells;
  std::vector<int> years;
  for (std::size_t rix = 0; rix < t.rows.size(); ++rix) {
    const auto& row = t.rows[rix];
    const std::string where = path + ":row " + std::to_string(rix + 2);
    auto [it, inserted] = region_index.try_emplace(row[0], regions.size());
    if (inserted) regions.push_back(row[0]);
    const int year = static_cast<int>(csv::parse_int(row[1], where));
    if (std::find(years.begin(), years.end(), year) == years.end()) years.push_back(year);
    detail::require(
        cells.emplace(std::make_pair(it->second, year), csv::parse_double(row[2], where)).second,
        ErrorCode::SchemaError, where + ": duplicate (region, year)");
  }
  detail::require(!regions.empty(), ErrorCode::SchemaError, path + ": no data rows");
  std::sort(years.begin(), years.end());
  ValuesPanel out;
  out.region_ids = regions;
  out.years = years;
  out.values.resize(static_cast<Eigen::Index>(regions.size()),
                    static_cast<Eigen::Index>(years.size()));
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t ty = 0; ty < years.size(); ++ty) {
      auto it = cells.find({i, years[ty]});
      detail::require(it != cells.end(), ErrorCode::UnbalancedPanel,
                      path + ": region '" + regions[i] + "' missing year " +
                          std::to_string(years[ty]));
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(ty)) = it->second;
    }
  }
  return out;
}

}  // namespace regiosim
