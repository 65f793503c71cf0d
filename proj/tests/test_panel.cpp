#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "regiosim/panel.hpp"
#include "regiosim/stats.hpp"
#include "testutil.hpp"

using namespace regiosim;
using Catch::Approx;

namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

RawPanel small_raw() {
  RawPanel raw;
  raw.region_ids = {"a", "b"};
  raw.years = {2000, 2001, 2002};
  raw.patents.resize(2, 3);
  raw.patents << 100, 110, 121, 50, 60, 72;
  raw.rnd_expense.resize(2, 3);
  raw.rnd_expense << 100, 110, 121, 80, 88, 96.8;
  raw.personnel.resize(2, 3);
  raw.personnel << 10, 11, 12, 5, 6, 7;
  raw.deflator = Eigen::MatrixXd::Ones(2, 3);
  return raw;
}

}  // namespace

TEST_CASE("load_raw happy path") {
  const std::string path = temp_file("rs_raw_ok.csv");
  write_text(path,
             "region,year,patents,rnd_expense,personnel,deflator\n"
             "a,2000,10,100,5,1\n"
             "a,2001,12,110,6,1.02\n"
             "a,2002,13,120,6,1.05\n"
             "a,2003,15,130,7,1.06\n"
             "b,2001,9,90,4,1.02\n"
             "b,2000,8,80,4,1\n"
             "b,2002,11,95,5,1.05\n"
             "b,2003,12,99,5,1.06\n"
             "c,2000,3,30,2,1\n"
             "c,2001,4,31,2,1.02\n"
             "c,2002,5,33,3,1.05\n"
             "c,2003,6,35,3,1.06\n");
  RawPanel raw = load_raw(path);
  REQUIRE(raw.n_regions() == 3);
  REQUIRE(raw.n_periods() == 4);
  REQUIRE(raw.patents(1, 0) == 8.0);  // out-of-order rows land correctly
  std::filesystem::remove(path);
}

TEST_CASE("load_raw flags a missing year with region and year") {
  const std::string path = temp_file("rs_raw_gap.csv");
  write_text(path,
             "region,year,patents,rnd_expense,personnel,deflator\n"
             "a,2000,10,100,5,1\n"
             "a,2001,12,110,6,1\n"
             "b,2000,8,80,4,1\n");
  try {
    load_raw(path);
    FAIL("expected UnbalancedPanel");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::UnbalancedPanel);
    REQUIRE(std::string(e.what()).find("'b'") != std::string::npos);
    REQUIRE(std::string(e.what()).find("2001") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("load_raw rejects nonpositive personnel with a row reference") {
  const std::string path = temp_file("rs_raw_zero.csv");
  write_text(path,
             "region,year,patents,rnd_expense,personnel,deflator\n"
             "a,2000,10,100,0,1\n");
  try {
    load_raw(path);
    FAIL("expected NonPositive");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::NonPositive);
    REQUIRE(std::string(e.what()).find("row 2") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("load_raw rejects a malformed header") {
  const std::string path = temp_file("rs_raw_header.csv");
  write_text(path, "region,year,patents\n" "a,2000,10\n");
  REQUIRE_THROWS_AS(load_raw(path), Error);
  std::filesystem::remove(path);
}

TEST_CASE("real expense deflation") {
  RawPanel raw = small_raw();
  Eigen::MatrixXd real0 = real_expense(raw);
  REQUIRE((real0 - raw.rnd_expense).cwiseAbs().maxCoeff() == 0.0);  // deflator = 1

  raw.deflator *= 2.0;
  Eigen::MatrixXd real1 = real_expense(raw);
  REQUIRE((real1 * 2.0 - raw.rnd_expense).cwiseAbs().maxCoeff() < 1e-12);

  auto eng = std::mt19937_64(7);
  std::uniform_real_distribution<double> u(0.8, 2.0);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index t = 0; t < 3; ++t) raw.deflator(i, t) = u(eng);
  Eigen::MatrixXd real2 = real_expense(raw);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index t = 0; t < 3; ++t)
      REQUIRE(real2(i, t) == Approx(raw.rnd_expense(i, t) / raw.deflator(i, t)));
}

TEST_CASE("perpetual inventory matches the hand-computed example") {
  Eigen::MatrixXd flows(1, 3);
  flows << 100, 110, 121;
  std::vector<int> years{2000, 2001, 2002};
  Eigen::MatrixXd k = perpetual_inventory(flows, years, 0.10, {2000, 2002});
  // g_i = (121/100)^(1/2) - 1 = 0.10, K0 = 100/0.2 = 500, then 560, 625
  REQUIRE(k(0, 0) == Approx(500.0).epsilon(1e-12));
  REQUIRE(k(0, 1) == Approx(560.0).epsilon(1e-12));
  REQUIRE(k(0, 2) == Approx(625.0).epsilon(1e-12));
}

TEST_CASE("zero interior flows decay the stock geometrically") {
  Eigen::MatrixXd flows(1, 4);
  flows << 100, 0, 0, 100;
  std::vector<int> years{2000, 2001, 2002, 2003};
  Eigen::MatrixXd k = perpetual_inventory(flows, years, 0.10, {2000, 2003});
  REQUIRE(k(0, 1) == Approx(0.9 * k(0, 0)));
  REQUIRE(k(0, 2) == Approx(0.81 * k(0, 0)));
}

TEST_CASE("full depreciation keeps only the current flow") {
  Eigen::MatrixXd flows(1, 3);
  flows << 50, 70, 90;
  std::vector<int> years{2000, 2001, 2002};
  Eigen::MatrixXd k = perpetual_inventory(flows, years, 1.0, {2000, 2002});
  REQUIRE(k(0, 1) == 70.0);
  REQUIRE(k(0, 2) == 90.0);
}

TEST_CASE("negative initial growth beyond the rate is rejected") {
  Eigen::MatrixXd flows(1, 3);
  flows << 100, 10, 1;  // g = -0.9, g + 0.1 <= 0
  std::vector<int> years{2000, 2001, 2002};
  try {
    perpetual_inventory(flows, years, 0.10, {2000, 2002});
    FAIL("expected NonPositiveInitialGrowth");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::NonPositiveInitialGrowth);
  }
}

TEST_CASE("knowledge stock default depreciation is one fourteenth") {
  REQUIRE(std::fabs(kKnowledgeDepreciation - 1.0 / 14.0) < 1e-3);
}

TEST_CASE("constant patents sit at the recursion fixed point") {
  Eigen::MatrixXd flows = Eigen::MatrixXd::Constant(1, 5, 70.0);
  std::vector<int> years{2000, 2001, 2002, 2003, 2004};
  Eigen::MatrixXd a = knowledge_stock(flows, years, 0.0714, {2000, 2004});
  const double fixed_point = 70.0 / 0.0714;
  for (int t = 0; t < 5; ++t) REQUIRE(a(0, t) == Approx(fixed_point).epsilon(1e-12));
}

TEST_CASE("knowledge stock matches an independent spreadsheet-style recursion") {
  auto eng = std::mt19937_64(9);
  std::uniform_real_distribution<double> noise(0.8, 1.25);
  Eigen::MatrixXd flows(2, 6);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index t = 0; t < 6; ++t)
      flows(i, t) = 50.0 * std::pow(1.05, static_cast<double>(t)) * noise(eng);
  std::vector<int> years{2000, 2001, 2002, 2003, 2004, 2005};
  const double tau = 0.0714;
  Eigen::MatrixXd a = knowledge_stock(flows, years, tau, {2000, 2005});
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double g = std::pow(flows(i, 5) / flows(i, 0), 1.0 / 5.0) - 1.0;
    double stock = flows(i, 0) / (g + tau);
    REQUIRE(a(i, 0) == Approx(stock).epsilon(1e-12));
    for (Eigen::Index t = 1; t < 6; ++t) {
      stock = (1.0 - tau) * stock + flows(i, t);
      REQUIRE(a(i, t) == Approx(stock).epsilon(1e-12));
    }
  }
}

TEST_CASE("stocks are linear in the flow series") {
  Eigen::MatrixXd flows(1, 4);
  flows << 30, 45, 60, 80;
  std::vector<int> years{2000, 2001, 2002, 2003};
  Eigen::MatrixXd base = perpetual_inventory(flows, years, 0.1, {2000, 2003});
  Eigen::MatrixXd scaled = perpetual_inventory(3.0 * flows, years, 0.1, {2000, 2003});
  REQUIRE((scaled - 3.0 * base).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE((base.array() > 0.0).all());
}

TEST_CASE("regression panel with a single weight matrix") {
  RawPanel raw = small_raw();
  StockSeries stocks = build_stocks(raw);
  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  SpatialWeights w = testutil::weights_from(swap, true);
  w.labels = raw.region_ids;
  PanelMatrix pm = build_regression_panel(raw, stocks, {w});
  REQUIRE(pm.regressor_names == std::vector<std::string>{"lnKr", "lnLr", "lnA", "wlnA"});
  REQUIRE(pm.n_periods() == 2);  // last year dropped
  // response is the lead log patents
  REQUIRE(pm.y(0, 0) == Approx(std::log(raw.patents(0, 1))));
  REQUIRE(pm.y(0, 1) == Approx(std::log(raw.patents(0, 2))));
  // swap matrix: spillover for region 1 is exactly ln A_2
  REQUIRE(pm.X[3](0, 0) == Approx(std::log(stocks.a(1, 0))).margin(1e-14));
  REQUIRE(pm.X[3](1, 1) == Approx(std::log(stocks.a(0, 1))).margin(1e-14));
}

TEST_CASE("regression panel with five band matrices") {
  auto eng = std::mt19937_64(10);
  std::uniform_real_distribution<double> coord(20.0, 50.0);
  const int n = 6;
  RawPanel raw;
  raw.region_ids = testutil::labels(n);
  raw.years = {2000, 2001, 2002};
  raw.patents = Eigen::MatrixXd::Constant(n, 3, 40.0);
  raw.patents.col(1) *= 1.2;
  raw.patents.col(2) *= 1.5;
  raw.rnd_expense = Eigen::MatrixXd::Constant(n, 3, 100.0);
  raw.rnd_expense.col(1) *= 1.1;
  raw.rnd_expense.col(2) *= 1.21;
  raw.personnel = Eigen::MatrixXd::Constant(n, 3, 10.0);
  raw.deflator = Eigen::MatrixXd::Ones(n, 3);
  StockSeries stocks = build_stocks(raw);

  std::vector<Coordinates> coords;
  for (int i = 0; i < n; ++i)
    coords.push_back({raw.region_ids[static_cast<std::size_t>(i)], coord(eng), 70.0 + 10.0 * i});
  DistanceMatrix dm = haversine_distances(coords);
  SpatialWeights w = row_standardize(inverse_square_weights(dm));
  auto bands = band_partition(w, dm, {1000, 2000, 3000, 4000});
  PanelMatrix pm = build_regression_panel(raw, stocks, bands);
  REQUIRE(pm.n_regressors() == 8);
  REQUIRE(pm.regressor_names[3] == "w1lnA");
  REQUIRE(pm.regressor_names[7] == "w5lnA");
}

TEST_CASE("zero lead patents: error by default, ln(P+1) on request") {
  RawPanel raw = small_raw();
  raw.patents(1, 2) = 0.0;
  // growth span avoids the zero final-year flow
  StockSeries stocks = build_stocks(raw, kCapitalDepreciation, kKnowledgeDepreciation,
                                     {2000, 2001});
  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  std::vector<SpatialWeights> w{testutil::weights_from(swap, true)};
  w[0].labels = raw.region_ids;
  try {
    build_regression_panel(raw, stocks, w);
    FAIL("expected ZeroResponse");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::ZeroResponse);
  }
  PanelMatrix pm = build_regression_panel(raw, stocks, w, ZeroPatentPolicy::PlusOne);
  REQUIRE(pm.y(1, 1) == Approx(std::log(1.0)));
}

TEST_CASE("spillover columns shift by exactly the common log constant") {
  RawPanel raw = small_raw();
  StockSeries stocks = build_stocks(raw);
  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  std::vector<SpatialWeights> w{testutil::weights_from(swap, true)};
  w[0].labels = raw.region_ids;
  PanelMatrix base = build_regression_panel(raw, stocks, w);
  const double c = 0.37;
  StockSeries scaled = stocks;
  scaled.a *= std::exp(c);
  PanelMatrix moved = build_regression_panel(raw, scaled, w);
  // row-stochastic weights pass the constant through untouched
  REQUIRE(((moved.X[3] - base.X[3]).array() - c).abs().maxCoeff() < 1e-12);
}

TEST_CASE("empirical growth rates") {
  Eigen::MatrixXd p(1, 2), a(1, 2);
  p << 5, 10;
  a << 100, 110;
  GrowthPanel g = growth_rates_empirical(p, a, {"r1"}, {2000, 2001});
  REQUIRE(g.g(0, 0) == Approx(0.1));
  REQUIRE(g.years == std::vector<int>{2001});

  Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(1, 2);
  GrowthPanel gz = growth_rates_empirical(zeros, a, {"r1"}, {2000, 2001});
  REQUIRE(gz.g(0, 0) == 0.0);

  auto eng = std::mt19937_64(11);
  std::uniform_real_distribution<double> u(1.0, 50.0);
  Eigen::MatrixXd pr(3, 5), ar(3, 5);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index t = 0; t < 5; ++t) {
      pr(i, t) = u(eng);
      ar(i, t) = u(eng) + 10.0;
    }
  GrowthPanel gr = growth_rates_empirical(pr, ar, testutil::labels(3),
                                          {2000, 2001, 2002, 2003, 2004});
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index t = 1; t < 5; ++t)
      REQUIRE(gr.g(i, t - 1) == pr(i, t) / ar(i, t - 1));
}

TEST_CASE("sigma series basics") {
  GrowthPanel g;
  g.region_ids = {"a", "b"};
  g.years = {2001, 2002};
  g.g.resize(2, 2);
  g.g << 0.1, 0.2, 0.3, 0.2;
  SigmaSeries s = sigma_series(g);
  REQUIRE(s.mean_g[0] == Approx(0.2));
  REQUIRE(s.sigma[0] == Approx(0.1));   // population SD of {0.1, 0.3}
  REQUIRE(s.sigma[1] == Approx(0.0));   // identical growth

  // two-pass oracle on a random panel
  auto eng = std::mt19937_64(12);
  std::normal_distribution<double> z(0.1, 0.05);
  GrowthPanel gr;
  gr.region_ids = testutil::labels(5);
  gr.years = {2001, 2002, 2003};
  gr.g.resize(5, 3);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index t = 0; t < 3; ++t) gr.g(i, t) = z(eng);
  SigmaSeries sr = sigma_series(gr);
  for (Eigen::Index t = 0; t < 3; ++t) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < 5; ++i) mean += gr.g(i, t);
    mean /= 5.0;
    double var = 0.0;
    for (Eigen::Index i = 0; i < 5; ++i) var += (gr.g(i, t) - mean) * (gr.g(i, t) - mean);
    var /= 5.0;
    REQUIRE(sr.mean_g[static_cast<std::size_t>(t)] == Approx(mean).margin(1e-14));
    REQUIRE(sr.sigma[static_cast<std::size_t>(t)] == Approx(std::sqrt(var)).margin(1e-14));
  }
}

namespace {

EconomyConfig synth_config(double mu, double n_growth, int n_regions, std::uint64_t seed) {
  ModelParams p;
  p.alpha = 0.5;
  p.beta = 0.1;
  p.gamma = 0.3;
  p.theta = 0.4;
  p.B = 1.0;
  p.a_K = 0.15;
  p.a_L = 0.15;
  auto eng = std::mt19937_64(seed);
  auto w = testutil::random_row_stochastic(n_regions, eng);
  return testutil::homogeneous_config(p, mu, 0.25, n_growth, w);
}

EconomyState dispersed_state(int n, double spread, std::uint64_t seed) {
  auto eng = std::mt19937_64(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  EconomyState s;
  s.ln_A.resize(n);
  s.ln_K.resize(n);
  s.ln_L.resize(n);
  for (int i = 0; i < n; ++i) {
    s.ln_A(i) = u(eng);
    s.ln_K(i) = u(eng);
    s.ln_L(i) = u(eng);
  }
  return s;
}

}  // namespace

TEST_CASE("synthetic dynamics data is deterministic per seed") {
  EconomyConfig cfg = synth_config(0.2, 0.02, 3, 21);
  EconomyState s0 = dispersed_state(3, 0.3, 22);
  RawPanel a = synth_dynamics(cfg, s0, 0.25, 12, 0.05, 77);
  RawPanel b = synth_dynamics(cfg, s0, 0.25, 12, 0.05, 77);
  REQUIRE((a.patents - b.patents).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((a.rnd_expense - b.rnd_expense).cwiseAbs().maxCoeff() == 0.0);
  RawPanel c = synth_dynamics(cfg, s0, 0.25, 12, 0.05, 78);
  REQUIRE((a.patents - c.patents).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("synthetic dynamics data round-trips through load_raw") {
  EconomyConfig cfg = synth_config(0.15, 0.02, 3, 23);
  RawPanel out = synth_dynamics(cfg, dispersed_state(3, 0.2, 24), 0.25, 10, 0.0, 5);
  const std::string path = temp_file("rs_synth_roundtrip.csv");
  write_raw_panel(path, out);
  RawPanel back = load_raw(path);
  REQUIRE(back.n_regions() == 3);
  REQUIRE(back.n_periods() == 10);
  REQUIRE((back.patents - out.patents).cwiseAbs().maxCoeff() < 1e-6);
  std::filesystem::remove(path);
}

TEST_CASE("decoupled synthetic regions approach their closed-form limits") {
  EconomyConfig cfg = synth_config(0.0, 0.0, 3, 25);
  cfg.regions[0].n = 0.03;
  cfg.regions[1].n = 0.045;
  cfg.regions[2].n = 0.06;
  RawPanel data = synth_dynamics(cfg, dispersed_state(3, 0.2, 26), 0.25, 600, 0.0, 6);
  // reconstruct knowledge with a tiny depreciation and compare the final
  // empirical growth rate against the per-region closed form
  Eigen::MatrixXd a_hat = knowledge_stock(data.patents, data.years, 1e-4,
                                          {data.years.front(), data.years.back()});
  GrowthPanel g = growth_rates_empirical(data.patents, a_hat, data.region_ids, data.years);
  for (int i = 0; i < 3; ++i) {
    const auto [g_star, g_k] = equilibrium_closed_form(
        cfg.params, 0.0, cfg.regions[static_cast<std::size_t>(i)].n);
    // annual sampling compounds the instantaneous rate: the empirical limit
    // is exp(g*) - 1 + tau
    REQUIRE(g.g(i, g.g.cols() - 1) == Approx(std::expm1(g_star) + 1e-4).margin(2e-4));
  }
}

TEST_CASE("noiseless synthetic panels show sigma convergence") {
  EconomyConfig cfg = synth_config(0.2, 0.02, 4, 27);
  RawPanel data = synth_dynamics(cfg, dispersed_state(4, 0.4, 28), 0.25, 200, 0.0, 7);
  Eigen::MatrixXd a_hat = knowledge_stock(data.patents, data.years, 1e-4,
                                          {data.years.front(), data.years.back()});
  GrowthPanel g = growth_rates_empirical(data.patents, a_hat, data.region_ids, data.years);
  SigmaSeries s = sigma_series(g);
  const std::size_t last = s.sigma.size() - 1;
  REQUIRE(s.sigma[last] < 0.02 * s.sigma[2]);  // collapses toward zero
  // strictly declining over the trailing half
  for (std::size_t t = s.sigma.size() / 2; t < last; ++t) {
    if (s.sigma[t] > 1e-12) REQUIRE(s.sigma[t + 1] < s.sigma[t]);
  }
}

TEST_CASE("SFA generator: no inefficiency means plain Gaussian regression") {
  SfaParams p;
  p.beta.resize(2);
  p.beta << 0.5, 2.0;
  p.sigma_sq = 0.09;
  p.gamma_var = 0.0;
  SfaDesign design{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  PanelMatrix pm = synth_sfa(p, 200, 5, design, 13);
  Eigen::VectorXd resid = pm.y_stacked() - pm.x_stacked(true) * p.beta;
  const double mean = resid.mean();
  const double sd = std::sqrt((resid.array() - mean).square().mean());
  REQUIRE(std::fabs(mean) < 0.02);        // no one-sided shift
  REQUIRE(sd == Approx(0.3).margin(0.02));  // sigma_v = sqrt(0.09)
}

TEST_CASE("SFA generator: inefficiency decays over time for positive eta") {
  SfaParams p;
  p.beta.resize(2);
  p.beta << 0.0, 1.0;
  p.sigma_sq = 1.0;
  p.gamma_var = 0.999;  // nearly all variance from the inefficiency
  p.eta = 0.15;
  p.mu_trunc = 1.0;
  SfaDesign design{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  PanelMatrix pm = synth_sfa(p, 400, 6, design, 17);
  Eigen::VectorXd mean_ineff(6);
  for (Eigen::Index t = 0; t < 6; ++t) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < 400; ++i) {
      acc += p.beta(0) + p.beta(1) * pm.X[0](i, t) - pm.y(i, t);
    }
    mean_ineff(t) = acc / 400.0;
  }
  for (Eigen::Index t = 1; t < 6; ++t) REQUIRE(mean_ineff(t) < mean_ineff(t - 1));
}

TEST_CASE("SFA generator: drawn inefficiencies match the truncated-normal mean") {
  SfaParams p;
  p.beta.resize(2);
  p.beta << 0.0, 0.0;  // y = v - u, so u = -y + v
  p.sigma_sq = 1.0 + 1e-9;
  p.gamma_var = 1.0 / (1.0 + 1e-9);  // sigma_u = 1, sigma_v ~ 3e-5
  p.eta = 0.0;
  p.mu_trunc = 0.5;
  SfaDesign design{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  const int n = 10000;
  PanelMatrix pm = synth_sfa(p, n, 2, design, 19);
  // u_i ~= -y_i1 up to the tiny v noise
  double sum = 0.0, sumsq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = -pm.y(i, 0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sumsq / n - mean * mean);
  const double expect = truncated_normal_mean(0.5, 1.0);
  REQUIRE(std::fabs(mean - expect) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("panel matrix CSV round trip") {
  SfaParams p;
  p.beta.resize(3);
  p.beta << 0.5, 1.0, -1.0;
  p.sigma_sq = 0.5;
  p.gamma_var = 0.5;
  SfaDesign design{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  PanelMatrix pm = synth_sfa(p, 4, 3, design, 23);
  const std::string path = temp_file("rs_panel_roundtrip.csv");
  write_panel_matrix(path, pm);
  PanelMatrix back = load_panel_matrix(path);
  REQUIRE(back.regressor_names == pm.regressor_names);
  REQUIRE((back.y - pm.y).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE((back.X[1] - pm.X[1]).cwiseAbs().maxCoeff() < 1e-9);
  std::filesystem::remove(path);
}

TEST_CASE("values panel loader") {
  const std::string path = temp_file("rs_values.csv");
  write_text(path,
             "region,year,value\n"
             "a,2001,1.5\n"
             "b,2001,2.5\n"
             "a,2000,1.0\n"
             "b,2000,2.0\n");
  ValuesPanel v = load_values_panel(path);
  REQUIRE(v.years == std::vector<int>{2000, 2001});
  REQUIRE(v.values(0, 0) == 1.0);
  REQUIRE(v.values(1, 1) == 2.5);
  std::filesystem::remove(path);
}
