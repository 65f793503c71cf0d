#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "regiosim/model.hpp"
#include "testutil.hpp"

using namespace regiosim;
using Catch::Approx;

namespace {

SpatialWeights swap_matrix() {
  Eigen::MatrixXd w(2, 2);
  w << 0, 1, 1, 0;
  return testutil::weights_from(w, true);
}

EconomyConfig table2_config() {
  ModelParams p;
  p.alpha = 0.5;
  p.beta = 0.0921;
  p.gamma = 0.2418;
  p.theta = 0.7477;
  p.B = 1.0;
  p.a_K = 0.1;
  p.a_L = 0.1;
  return testutil::homogeneous_config(p, 0.1377, 0.2, 0.00843, swap_matrix());
}

EconomyState state_from_levels(const Eigen::VectorXd& A, const Eigen::VectorXd& K,
                               const Eigen::VectorXd& L) {
  EconomyState s;
  s.ln_A = A.array().log();
  s.ln_K = K.array().log();
  s.ln_L = L.array().log();
  return s;
}

}  // namespace

TEST_CASE("validate_config accepts the benchmark parameter set") {
  EconomyConfig cfg = table2_config();
  REQUIRE_NOTHROW(validate_config(cfg));
  // sum beta+theta+mu = 0.9775 < 1
  REQUIRE(cfg.params.beta + cfg.params.theta + cfg.regions[0].mu == Approx(0.9775));
}

TEST_CASE("validate_config rejects the divergent boundary") {
  ModelParams p;
  p.theta = 0.9;
  p.beta = 0.1;
  p.a_K = 0.1;
  p.a_L = 0.1;
  EconomyConfig cfg = testutil::homogeneous_config(p, 0.0, 0.2, 0.01, swap_matrix());
  // sum is exactly 1.0: the condition is strict
  REQUIRE_THROWS_AS(validate_config(cfg), Error);
  try {
    validate_config(cfg);
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::DivergentRegime);
  }
}

TEST_CASE("validate_config rejects open-interval bounds") {
  EconomyConfig cfg = table2_config();
  cfg.params.alpha = 1.0;
  try {
    validate_config(cfg);
    FAIL("expected ParameterOutOfRange");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::ParameterOutOfRange);
  }

  cfg = table2_config();
  cfg.params.B = 0.0;
  REQUIRE_THROWS_AS(validate_config(cfg), Error);
}

TEST_CASE("validate_config boundary fuzzing") {
  auto eng = std::mt19937_64(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    ModelParams p;
    p.alpha = u(eng);
    p.beta = u(eng) * 0.5;
    p.gamma = u(eng);
    p.theta = u(eng);
    p.B = u(eng) * 2.0;
    p.a_K = u(eng);
    p.a_L = u(eng);
    const double mu = u(eng) * 0.5;
    const double s = u(eng);
    const double n = u(eng) * 0.1;
    EconomyConfig cfg = testutil::homogeneous_config(p, mu, s, n, swap_matrix());
    const bool valid = p.alpha > 0 && p.alpha < 1 && p.theta < 1 && p.B > 0 && p.a_K < 1 &&
                       p.a_L < 1 && p.c_A() > 0 && s > 0 &&
                       p.beta + p.theta + mu < 1.0;
    if (valid) {
      REQUIRE_NOTHROW(validate_config(cfg));
    } else {
      REQUIRE_THROWS_AS(validate_config(cfg), Error);
    }
  }
}

TEST_CASE("validate_config flags dimension mismatches") {
  EconomyConfig cfg = table2_config();
  cfg.regions.push_back(cfg.regions[0]);  // 3 regions, 2x2 weights
  try {
    validate_config(cfg);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    REQUIRE(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("output at identity inputs") {
  ModelParams p;
  p.alpha = 0.5;
  EconomyConfig cfg = testutil::homogeneous_config(p, 0.0, 0.2, 0.01, swap_matrix());
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
  EconomyState s = state_from_levels(ones, ones, ones);
  Eigen::VectorXd y = output(s, cfg);
  REQUIRE(y(0) == Approx(1.0));
  REQUIRE(y(1) == Approx(1.0));

  // K=4 with A*L=1: Y = sqrt(4) = 2
  Eigen::VectorXd k4 = 4.0 * ones;
  y = output(state_from_levels(ones, k4, ones), cfg);
  REQUIRE(y(0) == Approx(2.0));
}

TEST_CASE("output matches direct level-space evaluation") {
  auto eng = std::mt19937_64(11);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  ModelParams p;
  p.alpha = 0.37;
  p.a_K = 0.15;
  p.a_L = 0.08;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 4;
    auto w = testutil::random_row_stochastic(n, eng);
    EconomyConfig cfg = testutil::homogeneous_config(p, 0.1, 0.25, 0.01, w);
    Eigen::VectorXd A(n), K(n), L(n);
    for (int i = 0; i < n; ++i) {
      A(i) = u(eng);
      K(i) = u(eng);
      L(i) = u(eng);
    }
    Eigen::VectorXd y = output(state_from_levels(A, K, L), cfg);
    for (int i = 0; i < n; ++i) {
      const double direct = std::pow((1 - p.a_K) * K(i), p.alpha) *
                            std::pow(A(i) * (1 - p.a_L) * L(i), 1 - p.alpha);
      REQUIRE(y(i) == Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("growth_rates single-region power law") {
  ModelParams p;
  p.alpha = 0.5;
  p.beta = 0.0;
  p.gamma = 0.0;
  p.theta = 0.5;
  p.B = 1.0;
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(1, 1);
  EconomyConfig cfg = testutil::homogeneous_config(p, 0.0, 0.2, 0.01,
                                                   testutil::weights_from(w1, true));
  Eigen::VectorXd A(1), K(1), L(1);
  A << 4.0;
  K << 2.0;
  L << 3.0;
  GrowthRates g = growth_rates(state_from_levels(A, K, L), cfg);
  REQUIRE(g.g_A(0) == Approx(0.5).epsilon(1e-14));  // 4^(-1/2)
}

TEST_CASE("growth_rates homogeneous-knowledge identity") {
  ModelParams p;
  p.alpha = 0.4;
  p.beta = 0.1;
  p.gamma = 0.2;
  p.theta = 0.5;
  p.B = 1.2;
  p.a_K = 0.1;
  p.a_L = 0.2;
  const double mu = 0.2;
  EconomyConfig cfg = testutil::homogeneous_config(p, mu, 0.3, 0.01, swap_matrix());
  EconomyConfig cfg_nomu = cfg;
  cfg_nomu.regions[0].mu = 0.0;
  cfg_nomu.regions[1].mu = 0.0;

  const double a_level = 2.7;
  Eigen::VectorXd A = Eigen::VectorXd::Constant(2, a_level);
  Eigen::VectorXd K(2), L(2);
  K << 1.5, 2.5;
  L << 0.8, 1.9;
  EconomyState s = state_from_levels(A, K, L);
  GrowthRates with = growth_rates(s, cfg);
  GrowthRates without = growth_rates(s, cfg_nomu);
  for (int i = 0; i < 2; ++i) {
    REQUIRE(with.g_A(i) == Approx(without.g_A(i) * std::pow(a_level, mu)).epsilon(1e-13));
  }
}

TEST_CASE("growth_rates matches level-space brute force") {
  auto eng = std::mt19937_64(23);
  std::uniform_real_distribution<double> u(0.3, 4.0);
  ModelParams p;
  p.alpha = 0.45;
  p.beta = 0.08;
  p.gamma = 0.25;
  p.theta = 0.6;
  p.B = 0.9;
  p.a_K = 0.12;
  p.a_L = 0.2;
  const int n = 5;
  for (int rep = 0; rep < 30; ++rep) {
    auto w = testutil::random_row_stochastic(n, eng);
    EconomyConfig cfg = testutil::homogeneous_config(p, 0.15, 0.22, 0.012, w);
    Eigen::VectorXd A(n), K(n), L(n);
    for (int i = 0; i < n; ++i) {
      A(i) = u(eng);
      K(i) = u(eng);
      L(i) = u(eng);
    }
    GrowthRates g = growth_rates(state_from_levels(A, K, L), cfg);
    const double c_A = p.B * std::pow(p.a_K, p.beta) * std::pow(p.a_L, p.gamma);
    for (int i = 0; i < n; ++i) {
      double spill = 1.0;
      for (int j = 0; j < n; ++j) spill *= std::pow(A(j), 0.15 * w.w(i, j));
      const double direct = c_A * std::pow(K(i), p.beta) * std::pow(L(i), p.gamma) *
                            std::pow(A(i), p.theta - 1.0) * spill;
      REQUIRE(g.g_A(i) == Approx(direct).epsilon(1e-10));
      const double c_K = 0.22 * std::pow(1 - p.a_K, p.alpha) * std::pow(1 - p.a_L, 1 - p.alpha);
      const double direct_k = c_K * std::pow(A(i) * L(i) / K(i), 1 - p.alpha);
      REQUIRE(g.g_K(i) == Approx(direct_k).epsilon(1e-10));
    }
  }
}

TEST_CASE("growth_rates homogeneity in the knowledge vector") {
  auto eng = std::mt19937_64(5);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  ModelParams p;
  p.alpha = 0.5;
  p.beta = 0.1;
  p.gamma = 0.3;
  p.theta = 0.55;
  p.B = 1.0;
  p.a_K = 0.2;
  p.a_L = 0.1;
  const int n = 4;
  auto w = testutil::random_row_stochastic(n, eng);
  EconomyConfig cfg = testutil::homogeneous_config(p, 0.2, 0.3, 0.02, w);
  // heterogeneous mu to exercise the per-region exponent
  cfg.regions[1].mu = 0.05;
  cfg.regions[3].mu = 0.31;
  Eigen::VectorXd A(n), K(n), L(n);
  for (int i = 0; i < n; ++i) {
    A(i) = u(eng);
    K(i) = u(eng);
    L(i) = u(eng);
  }
  EconomyState base = state_from_levels(A, K, L);
  const double c = 1.7;
  EconomyState scaled = state_from_levels(c * A, K, L);
  GrowthRates g0 = growth_rates(base, cfg);
  GrowthRates g1 = growth_rates(scaled, cfg);
  for (int i = 0; i < n; ++i) {
    const double mu_i = cfg.regions[static_cast<std::size_t>(i)].mu;
    REQUIRE(g1.g_A(i) == Approx(g0.g_A(i) * std::pow(c, p.theta - 1.0 + mu_i)).epsilon(1e-12));
    // capital growth has no cross terms and scales through own A only
    REQUIRE(g1.g_K(i) == Approx(g0.g_K(i) * std::pow(c, 1.0 - p.alpha)).epsilon(1e-12));
  }
}

TEST_CASE("g_K depends only on the region's own state") {
  auto eng = std::mt19937_64(29);
  ModelParams p;
  p.alpha = 0.5;
  p.beta = 0.1;
  p.gamma = 0.2;
  p.theta = 0.5;
  const int n = 3;
  auto w = testutil::random_row_stochastic(n, eng);
  EconomyConfig cfg = testutil::homogeneous_config(p, 0.2, 0.25, 0.015, w);
  Eigen::VectorXd A = Eigen::VectorXd::Constant(n, 2.0);
  Eigen::VectorXd K = Eigen::VectorXd::Constant(n, 1.5);
  Eigen::VectorXd L = Eigen::VectorXd::Constant(n, 1.0);
  GrowthRates g0 = growth_rates(state_from_levels(A, K, L), cfg);
  A(1) = 9.0;  // perturb a different region
  K(2) = 7.0;
  GrowthRates g1 = growth_rates(state_from_levels(A, K, L), cfg);
  REQUIRE(g1.g_K(0) == g0.g_K(0));
}

TEST_CASE("log representation round trip") {
  auto eng = std::mt19937_64(31);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  EconomyState s;
  s.ln_A.resize(6);
  s.ln_K.resize(6);
  s.ln_L.resize(6);
  for (int i = 0; i < 6; ++i) {
    s.ln_A(i) = u(eng);
    s.ln_K(i) = u(eng);
    s.ln_L(i) = u(eng);
  }
  Eigen::VectorXd back = s.ln_A.array().exp().log();
  for (int i = 0; i < 6; ++i) REQUIRE(back(i) == Approx(s.ln_A(i)).margin(1e-13));
}
