#include "geokrige/variogram_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geokrige {

namespace {

struct FitPoint {
  double h, gamma, w;
};

std::vector<FitPoint> nonempty_points(const EmpiricalVariogram& emp) {
  std::vector<FitPoint> pts;
  for (const auto& b : emp.bins) {
    if (b.n_pairs > 0) {
      const double h = b.mean_dist > 0.0 ? b.mean_dist : b.lag_center;
      pts.push_back({h, b.gamma_hat, static_cast<double>(b.n_pairs) / (h * h)});
    }
  }
  return pts;
}

double first_nonempty_gamma(const EmpiricalVariogram& emp) {
  for (const auto& b : emp.bins)
    if (b.n_pairs > 0) return b.gamma_hat;
  return 0.0;
}

double last_nonempty_gamma(const EmpiricalVariogram& emp) {
  for (auto it = emp.bins.rbegin(); it != emp.bins.rend(); ++it)
    if (it->n_pairs > 0) return it->gamma_hat;
  return 0.0;
}

// c0 lives on a softplus scale so the fit can reach 0; psill and theta are
// strictly positive and live on a log scale.
double softplus(double u) {
  return u > 30.0 ? u : std::log1p(std::exp(u));
}
double softplus_inv(double v) {
  const double c = std::max(v, 1e-12);
  return c > 30.0 ? c : std::log(std::expm1(c));
}
double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

struct Params {
  double u_c0, u_psill, u_theta;
  ExponentialVariogramModel model() const {
    return {softplus(u_c0), std::exp(u_psill), std::exp(u_theta)};
  }
};

double objective(const std::vector<FitPoint>& pts, const ExponentialVariogramModel& m) {
  double ss = 0.0;
  for (const auto& p : pts) {
    const double r = p.gamma - model_gamma(m, p.h);
    ss += p.w * r * r;
  }
  return ss;
}

}  // namespace

ExponentialVariogramModel default_fit_initial(const EmpiricalVariogram& emp,
                                              double data_variance) {
  const double c0 = std::max(0.0, 0.5 * first_nonempty_gamma(emp));
  const double sill = std::max(data_variance, 1e-8);
  const double psill = std::max(sill - c0, 0.1 * sill);
  return {c0, psill, 3.0 / (emp.max_dist / 2.0)};
}

ExponentialVariogramModel fallback_fit_initial(const EmpiricalVariogram& emp,
                                               double data_variance) {
  const double sill = std::max({last_nonempty_gamma(emp), data_variance, 1e-8});
  return {0.0, sill, 3.0 / (emp.max_dist / 4.0)};
}

VariogramFit fit_exponential_wls(const EmpiricalVariogram& emp,
                                 const ExponentialVariogramModel& initial,
                                 bool fit_nugget, int max_iterations) {
  const std::vector<FitPoint> pts = nonempty_points(emp);
  if (pts.size() < 2)
    throw std::invalid_argument("variogram fit needs at least two nonempty bins");
  if (!(initial.psill > 0.0) || !(initial.theta > 0.0) || initial.c0 < 0.0)
    throw std::invalid_argument("invalid initial variogram model");

  Params p{softplus_inv(fit_nugget ? initial.c0 : 0.0), std::log(initial.psill),
           std::log(initial.theta)};
  if (!fit_nugget) p.u_c0 = -40.0;  // softplus(-40) is 0 to double precision

  double obj = objective(pts, p.model());
  Params best = p;
  double best_obj = obj;

  // Data scale for the absolute convergence floor: a perfect fit leaves the
  // objective at rounding noise, where relative-drop tests never trigger.
  double gamma_ss = 0.0;
  for (const auto& q : pts) gamma_ss += q.w * q.gamma * q.gamma;

  VariogramFit out;
  out.diag.n_bins_used = static_cast<int>(pts.size());

  double lambda = 1e-3;
  int it = 0;
  bool converged = false;
  for (; it < max_iterations && !converged; ++it) {
    const ExponentialVariogramModel m = p.model();

    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    for (const auto& q : pts) {
      const double e = std::exp(-m.theta * q.h);
      const double r = q.gamma - (m.c0 + m.psill * (1.0 - e));
      Eigen::Vector3d g;  // gradient of the model in transformed coordinates
      g << (fit_nugget ? sigmoid(p.u_c0) : 0.0), (1.0 - e) * m.psill,
          m.psill * q.h * e * m.theta;
      jtj.noalias() += q.w * g * g.transpose();
      jtr.noalias() += q.w * g * r;
    }
    if (!fit_nugget) jtj(0, 0) = 1.0;  // keep the frozen coordinate well posed

    bool stepped = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::Matrix3d damped = jtj;
      for (int k = 0; k < 3; ++k)
        damped(k, k) += lambda * std::max(jtj(k, k), 1e-12);
      const Eigen::Vector3d delta = damped.ldlt().solve(jtr);
      Params trial = p;
      if (fit_nugget) trial.u_c0 += delta(0);
      trial.u_psill = std::clamp(trial.u_psill + delta(1), -46.0, 46.0);
      trial.u_theta = std::clamp(trial.u_theta + delta(2), -46.0, 46.0);
      const double trial_obj = objective(pts, trial.model());
      if (trial_obj <= obj) {
        const double drop = obj - trial_obj;
        p = trial;
        obj = trial_obj;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (obj < best_obj) {
          best = p;
          best_obj = obj;
        }
        if (obj <= 1e-15 * gamma_ss || drop <= 1e-12 * obj + 1e-18 * gamma_ss ||
            delta.lpNorm<Eigen::Infinity>() < 1e-12)
          converged = true;
        break;
      }
      lambda *= 8.0;
    }
    if (!stepped) {
      converged = true;  // no descent direction left at any damping
      break;
    }
  }

  out.model = best.model();
  if (!fit_nugget) out.model.c0 = 0.0;
  out.diag.converged = converged;
  out.diag.iterations = it;
  out.diag.objective = best_obj;
  return out;
}

ModelValidation validate_model(const VariogramFit& fit,
                               const EmpiricalVariogram& emp,
                               double data_variance,
                               const ValidationLimits& limits) {
  ModelValidation v;
  const auto flag = [&v](const std::string& why) {
    v.valid = false;
    v.reasons.push_back(why);
  };

  if (!fit.diag.converged) flag("fit did not converge");

  const double r3 = range3(fit.model);
  const double bin_width = emp.max_dist / std::max(emp.n_bins, 1);
  if (r3 > limits.max_range_factor * emp.max_dist)
    flag("fitted range exceeds " + std::to_string(limits.max_range_factor) +
         "x the variogram cutoff");
  if (r3 < limits.min_range_bins * bin_width)
    flag("fitted range is below the lag bin width");

  const double sill = total_sill(fit.model);
  if (data_variance > 0.0 && sill > limits.max_sill_factor * data_variance)
    flag("fitted sill is more than " + std::to_string(limits.max_sill_factor) +
         "x the data variance");
  if (sill > 0.0 && fit.model.c0 > limits.max_nugget_share * sill)
    flag("nugget dominates the fitted sill");

  return v;
}

ScreenedFit fit_exponential_screened(const EmpiricalVariogram& emp,
                                     double data_variance, bool fit_nugget,
                                     const ValidationLimits& limits) {
  ScreenedFit out;
  out.fit = fit_exponential_wls(emp, default_fit_initial(emp, data_variance),
                                fit_nugget);
  out.valid = validate_model(out.fit, emp, data_variance, limits).valid;
  if (out.valid) return out;

  VariogramFit retry = fit_exponential_wls(
      emp, fallback_fit_initial(emp, data_variance), fit_nugget);
  retry.diag.fallback_init_used = true;
  out.refit_used = true;
  if (retry.diag.objective < out.fit.diag.objective) {
    out.fit = retry;
    out.valid = validate_model(retry, emp, data_variance, limits).valid;
  }
  return out;
}

}  // namespace geokrige
