#include "geokrige/random_field.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <random>
#include <stdexcept>

#include "geokrige/rng.hpp"

namespace geokrige {

namespace {

constexpr int kCholeskyNodeCap = 4096;

// FFTW planning is not thread safe; execution of a finished plan is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

void fft2_forward_inplace(std::vector<std::complex<double>>& a, int m) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    auto* p = reinterpret_cast<fftw_complex*>(a.data());
    plan = fftw_plan_dft_2d(m, m, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
}

void check_model(const ExponentialVariogramModel& model) {
  if (!(model.psill > 0.0) || !(model.theta > 0.0) || model.c0 < 0.0)
    throw std::invalid_argument("simulation model needs psill > 0, theta > 0, c0 >= 0");
}

int grid_side(double extent_m, double resolution_m) {
  if (!(extent_m > 0.0) || !(resolution_m > 0.0) || extent_m < resolution_m)
    throw std::invalid_argument("grid needs extent >= resolution > 0");
  return static_cast<int>(std::floor(extent_m / resolution_m)) + 1;
}

std::vector<double> simulate_smooth_cholesky(int n, double res,
                                             const ExponentialVariogramModel& model,
                                             std::mt19937_64& engine) {
  const int nodes = n * n;
  Eigen::MatrixXd c(nodes, nodes);
  for (int a = 0; a < nodes; ++a) {
    const double ax = (a % n) * res, ay = (a / n) * res;
    for (int b = 0; b <= a; ++b) {
      const double dx = ax - (b % n) * res, dy = ay - (b / n) * res;
      const double v = model.psill * std::exp(-model.theta * std::sqrt(dx * dx + dy * dy));
      c(a, b) = v;
      c(b, a) = v;
    }
  }

  // The exponential kernel is positive definite; jitter covers borderline
  // conditioning on dense grids.
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 4; ++attempt) {
    llt.compute(attempt == 0 ? c
                             : Eigen::MatrixXd(c + jitter * Eigen::MatrixXd::Identity(
                                                               nodes, nodes)));
    if (llt.info() == Eigen::Success) break;
    jitter = jitter == 0.0 ? 1e-12 * model.psill : jitter * 100.0;
  }
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("covariance Cholesky failed despite jitter");

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd xi(nodes);
  for (int i = 0; i < nodes; ++i) xi(i) = normal(engine);
  const Eigen::VectorXd z = llt.matrixL() * xi;
  return {z.data(), z.data() + nodes};
}

// Dietrich-Newsam style circulant embedding on an m x m torus. Returns false
// when the embedding has meaningfully negative eigenvalues at this m.
bool try_embedding(int n, int m, double res, const ExponentialVariogramModel& model,
                   std::mt19937_64& engine, std::vector<double>& out) {
  const std::size_t big = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  std::vector<std::complex<double>> buf(big);
  for (int j = 0; j < m; ++j) {
    const double wj = static_cast<double>(std::min(j, m - j)) * res;
    for (int k = 0; k < m; ++k) {
      const double wk = static_cast<double>(std::min(k, m - k)) * res;
      const double d = std::sqrt(wj * wj + wk * wk);
      buf[static_cast<std::size_t>(j) * m + k] = model.psill * std::exp(-model.theta * d);
    }
  }
  fft2_forward_inplace(buf, m);

  double max_ev = 0.0, min_ev = 0.0;
  for (const auto& v : buf) {
    max_ev = std::max(max_ev, v.real());
    min_ev = std::min(min_ev, v.real());
  }
  if (min_ev < -1e-8 * max_ev) return false;

  // One complex draw with iid standard normal real and imaginary parts
  // carries two independent real fields at the target covariance; the real
  // part is kept so the draw count per node stays fixed.
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::complex<double>> noise(big);
  for (std::size_t q = 0; q < big; ++q) {
    const double a = normal(engine);
    const double b = normal(engine);
    noise[q] = std::complex<double>(a, b);
  }
  for (std::size_t q = 0; q < big; ++q)
    noise[q] *= std::sqrt(std::max(buf[q].real(), 0.0));
  fft2_forward_inplace(noise, m);

  const double scale = 1.0 / std::sqrt(static_cast<double>(big));
  out.resize(static_cast<std::size_t>(n) * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out[static_cast<std::size_t>(iy) * n + ix] =
          noise[static_cast<std::size_t>(iy) * m + ix].real() * scale;
  return true;
}

}  // namespace

FieldRealization simulate_grf(double extent_m, double resolution_m,
                              const ExponentialVariogramModel& model,
                              std::uint64_t seed) {
  check_model(model);
  const int n = grid_side(extent_m, resolution_m);
  const int nodes = n * n;

  FieldRealization field;
  field.extent_m = extent_m;
  field.resolution_m = resolution_m;
  field.n_side = n;
  field.model = model;
  field.seed = seed;

  std::mt19937_64 engine = make_engine(seed, rng_salt::field);
  if (nodes <= kCholeskyNodeCap) {
    field.smooth_values = simulate_smooth_cholesky(n, resolution_m, model, engine);
  } else {
    const int m0 = 2 * (n - 1);
    if (!try_embedding(n, m0, resolution_m, model, engine, field.smooth_values) &&
        !try_embedding(n, 2 * m0, resolution_m, model, engine, field.smooth_values))
      throw std::runtime_error(
          "circulant embedding stayed indefinite after one doubling and the grid (" +
          std::to_string(nodes) + " nodes) exceeds the " +
          std::to_string(kCholeskyNodeCap) + "-node dense Cholesky fallback");
  }

  field.values = field.smooth_values;
  if (model.c0 > 0.0) {
    std::mt19937_64 nugget_engine = make_engine(seed, rng_salt::nugget);
    std::normal_distribution<double> normal(0.0, std::sqrt(model.c0));
    for (auto& v : field.values) v += normal(nugget_engine);
  }
  return field;
}

MultiFieldRealization simulate_multivariate_grf(double extent_m, double resolution_m,
                                                const ExponentialVariogramModel& model,
                                                double r, std::uint64_t seed) {
  if (!(r >= 0.0) || r >= 1.0)
    throw std::invalid_argument("cross correlation must lie in [0, 1)");

  MultiFieldRealization multi;
  multi.r = r;
  multi.seed = seed;

  std::array<FieldRealization, 3> w;
  for (int k = 0; k < 3; ++k)
    w[static_cast<std::size_t>(k)] = simulate_grf(
        extent_m, resolution_m, model, mix_seed(seed, rng_salt::variable, static_cast<std::uint64_t>(k)));

  // Closed-form lower Cholesky of the equicorrelation matrix; rows have unit
  // norm, so marginals keep the input model.
  double a[3][3] = {{1.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}};
  a[1][0] = r;
  a[1][1] = std::sqrt(1.0 - r * r);
  a[2][0] = r;
  a[2][1] = a[1][1] > 0.0 ? (r - r * r) / a[1][1] : 0.0;
  a[2][2] = std::sqrt(std::max(0.0, 1.0 - a[2][0] * a[2][0] - a[2][1] * a[2][1]));

  for (int i = 0; i < 3; ++i) {
    FieldRealization& f = multi.fields[static_cast<std::size_t>(i)];
    f = w[0];
    f.seed = seed;
    const std::size_t nodes = f.values.size();
    for (std::size_t q = 0; q < nodes; ++q) {
      double s = 0.0, v = 0.0;
      for (int k = 0; k <= i; ++k) {
        s += a[i][k] * w[static_cast<std::size_t>(k)].smooth_values[q];
        v += a[i][k] * w[static_cast<std::size_t>(k)].values[q];
      }
      f.smooth_values[q] = s;
      f.values[q] = v;
    }
  }
  return multi;
}

std::vector<int> select_test_nodes(const FieldRealization& field, std::size_t n,
                                   std::uint64_t seed) {
  const std::size_t total = static_cast<std::size_t>(field.node_count());
  if (n > total)
    throw std::invalid_argument("more test points requested than grid nodes");

  std::vector<int> ids(total);
  for (std::size_t i = 0; i < total; ++i) ids[i] = static_cast<int>(i);

  std::mt19937_64 engine = make_engine(seed, rng_salt::test_points);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(ids[i], ids[pick(engine)]);
  }
  ids.resize(n);
  return ids;
}

SpatialDataset dataset_from_nodes(const FieldRealization& field,
                                  const std::vector<int>& nodes, int variable_id) {
  std::vector<ObservedPoint> pts;
  pts.reserve(nodes.size());
  for (int node : nodes) {
    if (node < 0 || node >= field.node_count())
      throw std::invalid_argument("node id outside the grid");
    pts.push_back({node, field.node_location(node),
                   field.values[static_cast<std::size_t>(node)], variable_id});
  }
  return SpatialDataset(std::move(pts));
}

SpatialDataset select_test_points(const FieldRealization& field, std::size_t n,
                                  std::uint64_t seed) {
  return dataset_from_nodes(field, select_test_nodes(field, n, seed));
}

SpatialDataset sample_observations(const FieldRealization& field, std::size_t n,
                                   std::uint64_t seed,
                                   const std::vector<int>& reserved_nodes,
                                   int variable_id) {
  const std::size_t total = static_cast<std::size_t>(field.node_count());
  std::vector<char> reserved(total, 0);
  for (int node : reserved_nodes)
    if (node >= 0 && node < field.node_count()) reserved[static_cast<std::size_t>(node)] = 1;

  std::vector<int> eligible;
  eligible.reserve(total);
  for (std::size_t i = 0; i < total; ++i)
    if (!reserved[i]) eligible.push_back(static_cast<int>(i));

  if (n > eligible.size())
    throw std::invalid_argument(
        "requested " + std::to_string(n) + " observations but only " +
        std::to_string(eligible.size()) + " non-reserved nodes exist");

  std::mt19937_64 engine = make_engine(seed, rng_salt::replication);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(engine)]);
  }
  eligible.resize(n);
  return dataset_from_nodes(field, eligible, variable_id);
}

}  // namespace geokrige
