#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "regiosim/csv.hpp"
#include "regiosim/errors.hpp"
#include "regiosim/rng.hpp"
#include "regiosim/stats.hpp"

namespace regiosim {

inline constexpr double kEarthRadiusKm = 6371.0;

struct Coordinates {
  std::string region_id;
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

/// Symmetric pairwise distance matrix in kilometers, zero diagonal.
struct DistanceMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd d;

  Eigen::Index size() const { return d.rows(); }

  void check() const {
    detail::require(d.rows() == d.cols(), ErrorCode::DimensionMismatch,
                    "distance matrix must be square");
    detail::require(static_cast<Eigen::Index>(labels.size()) == d.rows(),
                    ErrorCode::DimensionMismatch, "labels/dimension mismatch");
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      detail::require(d(i, i) == 0.0, ErrorCode::SchemaError,
                      "distance diagonal must be zero (" + labels[static_cast<std::size_t>(i)] + ")");
      for (Eigen::Index j = 0; j < d.cols(); ++j) {
        detail::require(std::isfinite(d(i, j)) && d(i, j) >= 0.0, ErrorCode::SchemaError,
                        "distances must be finite and nonnegative");
        detail::require(d(i, j) == d(j, i), ErrorCode::SchemaError,
                        "distance matrix must be symmetric");
      }
    }
  }
};

/// N x N spatial interaction weights: zero diagonal, nonnegative entries.
/// After row_standardize every row sums to 1, except rows of isolated
/// regions (no positive interaction anywhere), which stay all-zero and are
/// listed in `isolated`.
struct SpatialWeights {
  std::vector<std::string> labels;
  Eigen::MatrixXd w;
  bool standardized = false;
  std::vector<Eigen::Index> isolated;

  Eigen::Index size() const { return w.rows(); }

  void check() const {
    detail::require(w.rows() == w.cols(), ErrorCode::DimensionMismatch,
                    "weight matrix must be square");
    detail::require(static_cast<Eigen::Index>(labels.size()) == w.rows(),
                    ErrorCode::DimensionMismatch, "labels/dimension mismatch");
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      detail::require(w(i, i) == 0.0, ErrorCode::SchemaError, "weight diagonal must be zero");
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        detail::require(std::isfinite(w(i, j)) && w(i, j) >= 0.0, ErrorCode::SchemaError,
                        "weights must be finite and nonnegative");
      }
      if (standardized) {
        const double s = w.row(i).sum();
        detail::require(std::fabs(s - 1.0) < 1e-9 || s == 0.0, ErrorCode::SchemaError,
                        "standardized rows must sum to 1 (or 0 when isolated)");
      }
    }
  }
};

struct MoranMethod {
  enum Kind { Analytic, Permutation };
};

struct MoranResult {
  double I = 0.0;
  double expected = 0.0;   // E[I] = -1/(n-1)
  double variance = 0.0;   // randomization variance (analytic) or permutation variance
  double z = 0.0;
  double p = 1.0;          // two-sided
  MoranMethod::Kind method = MoranMethod::Analytic;
  int n_perm = 0;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// construction
// ---------------------------------------------------------------------------

/// Great-circle distances on a sphere of radius 6371 km.
inline DistanceMatrix haversine_distances(const std::vector<Coordinates>& coords) {
  detail::require(coords.size() >= 2, ErrorCode::DimensionMismatch,
                  "need at least two regions");
  std::set<std::string> seen;
  for (const auto& c : coords) {
    detail::require(c.lat >= -90.0 && c.lat <= 90.0, ErrorCode::CoordinateOutOfRange,
                    c.region_id + ": latitude " + std::to_string(c.lat));
    detail::require(c.lon >= -180.0 && c.lon <= 180.0, ErrorCode::CoordinateOutOfRange,
                    c.region_id + ": longitude " + std::to_string(c.lon));
    detail::require(seen.insert(c.region_id).second, ErrorCode::DuplicateRegion,
                    "duplicate region id '" + c.region_id + "'");
  }
  const auto n = static_cast<Eigen::Index>(coords.size());
  const double deg = M_PI / 180.0;
  DistanceMatrix out;
  out.labels.reserve(coords.size());
  for (const auto& c : coords) out.labels.push_back(c.region_id);
  out.d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = coords[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& b = coords[static_cast<std::size_t>(j)];
      const double dphi = (b.lat - a.lat) * deg;
      const double dlam = (b.lon - a.lon) * deg;
      const double s = std::sin(0.5 * dphi) * std::sin(0.5 * dphi) +
                       std::cos(a.lat * deg) * std::cos(b.lat * deg) *
                           std::sin(0.5 * dlam) * std::sin(0.5 * dlam);
      const double dist = 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(s)));
      out.d(i, j) = dist;
      out.d(j, i) = dist;
    }
  }
  return out;
}

/// w*_ij = 1/d_ij^2 off the diagonal (inverse-squared-distance interaction).
inline SpatialWeights inverse_square_weights(const DistanceMatrix& dm) {
  dm.check();
  const Eigen::Index n = dm.size();
  SpatialWeights out;
  out.labels = dm.labels;
  out.w = Eigen::MatrixXd::Zero(n, n);
  out.standardized = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      detail::require(dm.d(i, j) > 0.0, ErrorCode::ZeroDistance,
                      "zero distance between '" + dm.labels[static_cast<std::size_t>(i)] +
                          "' and '" + dm.labels[static_cast<std::size_t>(j)] + "'");
      out.w(i, j) = 1.0 / (dm.d(i, j) * dm.d(i, j));
    }
  }
  return out;
}

/// Divides each row by its sum so rows become stochastic. All-zero rows are
/// kept as zeros and reported in `isolated` rather than rejected.
inline SpatialWeights row_standardize(const SpatialWeights& raw) {
  raw.check();
  SpatialWeights out = raw;
  out.standardized = true;
  out.isolated.clear();
  for (Eigen::Index i = 0; i < out.w.rows(); ++i) {
    const double s = out.w.row(i).sum();
    if (s > 0.0) {
      out.w.row(i) /= s;
    } else {
      out.isolated.push_back(i);
    }
  }
  return out;
}

/// Splits a standardized matrix into distance bands. Band 0 holds pairs with
/// d <= boundaries[0]; band b holds (boundaries[b-1], boundaries[b]]; the last
/// band is open above. Entries keep their parent values (no re-standardizing),
/// so the bands sum back to the parent matrix entrywise.
inline std::vector<SpatialWeights> band_partition(const SpatialWeights& w_std,
                                                  const DistanceMatrix& dm,
                                                  const std::vector<double>& boundaries) {
  detail::require(w_std.standardized, ErrorCode::SchemaError,
                  "band_partition expects a standardized matrix");
  detail::require(w_std.size() == dm.size(), ErrorCode::DimensionMismatch,
                  "weights/distances dimension mismatch");
  detail::require(!boundaries.empty(), ErrorCode::BoundaryNotIncreasing,
                  "need at least one boundary");
  for (std::size_t b = 0; b + 1 < boundaries.size(); ++b) {
    detail::require(boundaries[b] < boundaries[b + 1], ErrorCode::BoundaryNotIncreasing,
                    "boundaries must be strictly increasing");
  }
  const std::size_t n_bands = boundaries.size() + 1;
  std::vector<SpatialWeights> bands(n_bands);
  for (auto& b : bands) {
    b.labels = w_std.labels;
    b.w = Eigen::MatrixXd::Zero(w_std.size(), w_std.size());
    b.standardized = false;
  }
  for (Eigen::Index i = 0; i < w_std.size(); ++i) {
    for (Eigen::Index j = 0; j < w_std.size(); ++j) {
      if (i == j) continue;
      const double dist = dm.d(i, j);
      std::size_t b = 0;
      while (b < boundaries.size() && dist > boundaries[b]) ++b;
      bands[b].w(i, j) = w_std.w(i, j);
    }
  }
  return bands;
}

// ---------------------------------------------------------------------------
// Moran's I
// ---------------------------------------------------------------------------

/// Global Moran's I over a regional field:
///   I = sum_ij w_ij (y_i - ybar)(y_j - ybar) / (S^2 * sum_ij w_ij),
/// with S^2 the population variance of y.
inline double morans_i(const Eigen::VectorXd& values, const SpatialWeights& w) {
  const Eigen::Index n = values.size();
  detail::require(n >= 2, ErrorCode::DimensionMismatch, "need at least two values");
  detail::require(n == w.size(), ErrorCode::DimensionMismatch,
                  "values/weights dimension mismatch");
  const double mean = values.mean();
  Eigen::VectorXd z = values.array() - mean;
  const double s2 = z.squaredNorm() / static_cast<double>(n);
  detail::require(s2 > 0.0, ErrorCode::DegenerateField, "all values equal");
  const double w_sum = w.w.sum();
  detail::require(w_sum > 0.0, ErrorCode::DegenerateField, "weight matrix is all zero");
  const double num = z.dot(w.w * z);
  return num / (s2 * w_sum);
}

namespace detail_moran {

/// Cliff-Ord randomization (nonfree sampling) variance of I.
inline double randomization_variance(const Eigen::VectorXd& values, const SpatialWeights& w) {
  const auto n_i = values.size();
  const double n = static_cast<double>(n_i);
  const double mean = values.mean();
  Eigen::VectorXd z = values.array() - mean;
  const double m2 = z.squaredNorm() / n;
  const double m4 = z.array().pow(4).sum() / n;
  const double b2 = m4 / (m2 * m2);

  const double s0 = w.w.sum();
  double s1 = 0.0;
  for (Eigen::Index i = 0; i < n_i; ++i) {
    for (Eigen::Index j = 0; j < n_i; ++j) {
      const double ww = w.w(i, j) + w.w(j, i);
      s1 += ww * ww;
    }
  }
  s1 *= 0.5;
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < n_i; ++i) {
    const double rc = w.w.row(i).sum() + w.w.col(i).sum();
    s2 += rc * rc;
  }
  const double e = -1.0 / (n - 1.0);
  const double num = n * ((n * n - 3.0 * n + 3.0) * s1 - n * s2 + 3.0 * s0 * s0) -
                     b2 * ((n * n - n) * s1 - 2.0 * n * s2 + 6.0 * s0 * s0);
  const double den = (n - 1.0) * (n - 2.0) * (n - 3.0) * s0 * s0;
  return num / den - e * e;
}

}  // namespace detail_moran

/// Significance test for Moran's I. The analytic method uses E[I] = -1/(n-1)
/// and the randomization-assumption variance with a two-sided normal p-value
/// (requires n >= 4; the variance formula has an (n-3) factor). The
/// permutation method shuffles labels n_perm times; each shuffle is derived
/// from (seed, permutation index) and the statistics are combined in index
/// order, so the result is identical for any thread count.
inline MoranResult morans_test(const Eigen::VectorXd& values, const SpatialWeights& w,
                               MoranMethod::Kind method, int n_perm = 999,
                               std::uint64_t seed = 0, int n_threads = 1) {
  MoranResult r;
  r.method = method;
  r.I = morans_i(values, w);
  const double n = static_cast<double>(values.size());
  r.expected = -1.0 / (n - 1.0);

  if (method == MoranMethod::Analytic) {
    detail::require(values.size() >= 4, ErrorCode::DimensionMismatch,
                    "analytic Moran inference needs n >= 4; use the permutation method");
    r.variance = detail_moran::randomization_variance(values, w);
    r.z = (r.I - r.expected) / std::sqrt(r.variance);
    r.p = normal_two_sided_p(r.z);
    return r;
  }

  detail::require(n_perm >= 99, ErrorCode::InsufficientPermutations,
                  "permutation test needs n_perm >= 99");
  detail::require(n_threads >= 1, ErrorCode::ParameterOutOfRange, "n_threads must be >= 1");
  r.n_perm = n_perm;
  r.seed = seed;

  std::vector<double> perm_stats(static_cast<std::size_t>(n_perm));
  auto worker = [&](int first, int last) {
    Eigen::VectorXd shuffled = values;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
    for (int k = first; k < last; ++k) {
      auto eng = engine_for(seed, static_cast<std::uint64_t>(k));
      std::iota(idx.begin(), idx.end(), 0);
      // Fisher-Yates with the per-permutation engine
      for (std::size_t i = idx.size() - 1; i > 0; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i);
        std::swap(idx[i], idx[pick(eng)]);
      }
      for (std::size_t i = 0; i < idx.size(); ++i) {
        shuffled(static_cast<Eigen::Index>(i)) = values(idx[i]);
      }
      perm_stats[static_cast<std::size_t>(k)] = morans_i(shuffled, w);
    }
  };
  if (n_threads == 1) {
    worker(0, n_perm);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_perm + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int first = t * chunk;
      const int last = std::min(n_perm, first + chunk);
      if (first < last) pool.emplace_back(worker, first, last);
    }
    for (auto& th : pool) th.join();
  }

  // combine in index order: independent of the chunking above
  const double obs_dev = std::fabs(r.I - r.expected);
  long count = 0;
  double sum = 0.0, sumsq = 0.0;
  for (double ip : perm_stats) {
    sum += ip;
    sumsq += ip * ip;
    if (std::fabs(ip - r.expected) >= obs_dev) ++count;
  }
  const double mean_perm = sum / n_perm;
  r.variance = sumsq / n_perm - mean_perm * mean_perm;
  r.z = r.variance > 0.0 ? (r.I - r.expected) / std::sqrt(r.variance) : 0.0;
  r.p = static_cast<double>(1 + count) / static_cast<double>(n_perm + 1);
  return r;
}

// ---------------------------------------------------------------------------
// CSV interfaces
// ---------------------------------------------------------------------------

/// Reads coordinates CSV with columns region_id,lat,lon.
inline std::vector<Coordinates> load_coordinates(const std::string& path) {
  CsvTable t = csv::read(path);
  const int c_id = t.column("region_id");
  const int c_lat = t.column("lat");
  const int c_lon = t.column("lon");
  detail::require(c_id >= 0 && c_lat >= 0 && c_lon >= 0, ErrorCode::SchemaError,
                  path + ": expected columns region_id,lat,lon");
  std::vector<Coordinates> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path + ":row " + std::to_string(r + 2);
    out.push_back({row[static_cast<std::size_t>(c_id)],
                   csv::parse_double(row[static_cast<std::size_t>(c_lat)], where),
                   csv::parse_double(row[static_cast<std::size_t>(c_lon)], where)});
  }
  return out;
}

/// Reads an explicit square distance matrix: header row of region ids
/// (first cell is a corner label), one row per region with its id in the
/// first column, distances in kilometers.
inline DistanceMatrix load_distance_matrix(const std::string& path) {
  CsvTable t = csv::read(path);
  detail::require(t.header.size() >= 3, ErrorCode::SchemaError,
                  path + ": distance matrix needs at least two regions");
  const auto n = static_cast<Eigen::Index>(t.header.size() - 1);
  detail::require(static_cast<Eigen::Index>(t.rows.size()) == n, ErrorCode::SchemaError,
                  path + ": matrix must be square");
  DistanceMatrix out;
  out.labels.assign(t.header.begin() + 1, t.header.end());
  out.d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    detail::require(row[0] == out.labels[static_cast<std::size_t>(i)], ErrorCode::SchemaError,
                    path + ": row labels must match header order (row " +
                        std::to_string(i + 2) + ")");
    for (Eigen::Index j = 0; j < n; ++j) {
      out.d(i, j) = csv::parse_double(row[static_cast<std::size_t>(j + 1)],
                                      path + ":row " + std::to_string(i + 2));
    }
  }
  out.check();
  return out;
}

/// Writes a labeled square matrix (distances or weights) in the same layout
/// load_distance_matrix reads.
inline void write_labeled_matrix(const std::string& path, const std::string& corner,
                                 const std::vector<std::string>& labels,
                                 const Eigen::MatrixXd& m) {
  csv::Writer out(path);
  std::vector<std::string> header{corner};
  header.insert(header.end(), labels.begin(), labels.end());
  out.row(header);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row{labels[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(csv::format_double(m(i, j)));
    out.row(row);
  }
}

}  // namespace regiosim
