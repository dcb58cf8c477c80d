#include "geokrige/lmc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace geokrige {

namespace {

struct CurvePoint {
  double h, gamma, w;
};

// Curve k covers matrix entry (row[k], col[k]); 0..2 direct, 3..5 cross.
constexpr int kRow[6] = {0, 1, 2, 0, 0, 1};
constexpr int kCol[6] = {0, 1, 2, 1, 2, 2};

using Curves = std::array<std::vector<CurvePoint>, 6>;

Curves collect_curves(const std::array<EmpiricalVariogram, 3>& direct,
                      const std::array<EmpiricalVariogram, 3>& cross) {
  Curves curves;
  for (int k = 0; k < 6; ++k) {
    const EmpiricalVariogram& emp = k < 3 ? direct[static_cast<std::size_t>(k)]
                                          : cross[static_cast<std::size_t>(k - 3)];
    for (const auto& b : emp.bins) {
      if (b.n_pairs > 0) {
        const double h = b.mean_dist > 0.0 ? b.mean_dist : b.lag_center;
        curves[static_cast<std::size_t>(k)].push_back(
            {h, b.gamma_hat, static_cast<double>(b.n_pairs) / (h * h)});
      }
    }
  }
  return curves;
}

double pooled_objective(const Curves& curves, const CoregionalizationModel& m) {
  double ss = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double bn = m.b_nugget[kRow[k]][kCol[k]];
    const double bs = m.b_structure[kRow[k]][kCol[k]];
    for (const auto& p : curves[static_cast<std::size_t>(k)]) {
      const double r = p.gamma - (bn + bs * (1.0 - std::exp(-m.theta * p.h)));
      ss += p.w * r * r;
    }
  }
  return ss;
}

// Per-entry linear WLS of gamma ~ bn + bs * g(h) at fixed theta.
void solve_entries(const Curves& curves, double theta, CoregionalizationModel& m) {
  for (int k = 0; k < 6; ++k) {
    const auto& pts = curves[static_cast<std::size_t>(k)];
    double bn = 0.0, bs = 0.0;
    if (pts.size() == 1) {
      const double g = 1.0 - std::exp(-theta * pts[0].h);
      bs = g != 0.0 ? pts[0].gamma / g : 0.0;
    } else if (!pts.empty()) {
      double s_w = 0, s_g = 0, s_gg = 0, s_y = 0, s_gy = 0;
      for (const auto& p : pts) {
        const double g = 1.0 - std::exp(-theta * p.h);
        s_w += p.w;
        s_g += p.w * g;
        s_gg += p.w * g * g;
        s_y += p.w * p.gamma;
        s_gy += p.w * g * p.gamma;
      }
      const double det = s_w * s_gg - s_g * s_g;
      if (std::abs(det) > 1e-14 * std::max(s_w * s_gg, 1.0)) {
        bn = (s_gg * s_y - s_g * s_gy) / det;
        bs = (s_w * s_gy - s_g * s_y) / det;
      } else {
        bs = s_gg > 0.0 ? s_gy / s_gg : 0.0;
      }
    }
    m.b_nugget[kRow[k]][kCol[k]] = m.b_nugget[kCol[k]][kRow[k]] = bn;
    m.b_structure[kRow[k]][kCol[k]] = m.b_structure[kCol[k]][kRow[k]] = bs;
  }
}

void project_psd(std::array<std::array<double, 3>, 3>& b) {
  Eigen::Matrix3d mat;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) mat(i, j) = b[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(mat);
  Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0);
  const Eigen::Matrix3d rebuilt =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b[i][j] = rebuilt(i, j);
}

// Coarse log-grid scan then golden-section refinement; deterministic.
double best_theta(const Curves& curves, CoregionalizationModel m, double theta) {
  const auto eval = [&](double t) {
    m.theta = t;
    return pooled_objective(curves, m);
  };

  const double lo0 = std::log(theta) - std::log(32.0);
  const double hi0 = std::log(theta) + std::log(32.0);
  double best_u = std::log(theta);
  double best_f = eval(theta);
  constexpr int kScan = 33;
  for (int i = 0; i < kScan; ++i) {
    const double u = lo0 + (hi0 - lo0) * i / (kScan - 1);
    const double f = eval(std::exp(u));
    if (f < best_f) {
      best_f = f;
      best_u = u;
    }
  }

  const double step = (hi0 - lo0) / (kScan - 1);
  double a = best_u - step, b = best_u + step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = eval(std::exp(x1)), f2 = eval(std::exp(x2));
  for (int i = 0; i < 80 && (b - a) > 1e-12; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = eval(std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = eval(std::exp(x2));
    }
  }
  return std::exp(f1 < f2 ? x1 : x2);
}

}  // namespace

CoregionalizationModel intrinsic_lmc(const ExponentialVariogramModel& m, double r) {
  if (!(r >= 0.0) || r >= 1.0)
    throw std::invalid_argument("cross correlation must lie in [0, 1)");
  CoregionalizationModel lmc;
  lmc.theta = m.theta;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double rho = i == j ? 1.0 : r;
      lmc.b_nugget[i][j] = m.c0 * rho;
      lmc.b_structure[i][j] = m.psill * rho;
    }
  }
  return lmc;
}

LmcFit fit_lmc(const std::array<EmpiricalVariogram, 3>& direct,
               const std::array<EmpiricalVariogram, 3>& cross,
               double theta_initial, int max_iterations) {
  if (!(theta_initial > 0.0))
    throw std::invalid_argument("theta_initial must be positive");
  for (const auto& emp : direct)
    if (emp.pairs_used() == 0)
      throw std::invalid_argument("every direct variogram needs a nonempty bin");

  const Curves curves = collect_curves(direct, cross);

  LmcFit out;
  out.model.theta = theta_initial;
  for (const auto& emp : cross)
    out.diag.cross_sill_extrapolated |= emp.cross_sill_extrapolated;

  // Absolute tolerance floor from the data scale: near a perfect fit the
  // objective sits at rounding noise where a relative test never triggers.
  double gamma_ss = 0.0;
  for (const auto& pts : curves)
    for (const auto& p : pts) gamma_ss += p.w * p.gamma * p.gamma;

  double prev = -1.0;
  CoregionalizationModel best = out.model;
  double best_obj = std::numeric_limits<double>::infinity();

  int it = 0;
  for (; it < max_iterations; ++it) {
    solve_entries(curves, out.model.theta, out.model);
    project_psd(out.model.b_nugget);
    project_psd(out.model.b_structure);
    out.model.theta = best_theta(curves, out.model, out.model.theta);

    const double obj = pooled_objective(curves, out.model);
    if (obj < best_obj) {
      best_obj = obj;
      best = out.model;
    }
    if (prev >= 0.0 &&
        std::abs(prev - obj) <= 1e-8 * prev + 1e-15 * gamma_ss) {
      out.diag.converged = true;
      ++it;
      break;
    }
    prev = obj;
  }

  out.model = best;
  out.diag.iterations = it;
  out.diag.objective = best_obj;
  return out;
}

}  // namespace geokrige
