#include "geokrige/kriging.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace geokrige {

namespace {

struct ObsRow {
  Location loc;
  double value;
  int variable;
};

// Relative residual of the solved augmented system; catches singular or
// numerically collapsed solves that LU with partial pivoting cannot flag.
bool solve_checked(const Eigen::MatrixXd& a, const Eigen::MatrixXd& rhs,
                   Eigen::MatrixXd& sol) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double resid = (a * sol - rhs).cwiseAbs().maxCoeff();
  return resid <= 1e-7 * scale;
}

std::vector<ObsRow> merge_duplicates(const std::vector<ObsRow>& rows) {
  std::vector<ObsRow> merged;
  std::vector<int> counts;
  for (const auto& r : rows) {
    bool found = false;
    for (std::size_t k = 0; k < merged.size(); ++k) {
      if (merged[k].variable == r.variable && same_location(merged[k].loc, r.loc)) {
        merged[k].value += r.value;
        ++counts[k];
        found = true;
        break;
      }
    }
    if (!found) {
      merged.push_back(r);
      counts.push_back(1);
    }
  }
  for (std::size_t k = 0; k < merged.size(); ++k)
    merged[k].value /= static_cast<double>(counts[k]);
  return merged;
}

KrigingPrediction solve_ordinary(const std::vector<ObsRow>& rows,
                                 const ExponentialVariogramModel& model,
                                 const Location& target, std::size_t n_selected) {
  const int k = static_cast<int>(rows.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd b(k + 1);
  for (int i = 0; i < k; ++i) {
    a(i, i) = covariance_from_variogram(model, 0.0);
    for (int j = i + 1; j < k; ++j) {
      const double c = signal_covariance(model, distance(rows[i].loc, rows[j].loc));
      a(i, j) = c;
      a(j, i) = c;
    }
    a(i, k) = 1.0;
    a(k, i) = 1.0;
    b(i) = signal_covariance(model, distance(target, rows[i].loc));
  }
  b(k) = 1.0;

  Eigen::MatrixXd sol;
  if (!solve_checked(a, b, sol))
    throw KrigingError("singular kriging system", rows.size());

  KrigingPrediction pred;
  pred.target = target;
  pred.variable_id = rows.front().variable;
  pred.n_neighbors_used = n_selected;
  pred.lagrange_multiplier = sol(k, 0);
  double z = 0.0, cv = 0.0;
  for (int i = 0; i < k; ++i) {
    z += sol(i, 0) * rows[i].value;
    cv += sol(i, 0) * b(i);
  }
  pred.predicted_value = z;
  pred.kriging_variance =
      std::max(0.0, covariance_from_variogram(model, 0.0) - cv - sol(k, 0));
  return pred;
}

bool has_duplicate_locations(const std::vector<ObsRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      if (rows[i].variable == rows[j].variable &&
          same_location(rows[i].loc, rows[j].loc))
        return true;
  return false;
}

}  // namespace

KrigingPrediction ordinary_krige(const SpatialIndex& obs,
                                 const ExponentialVariogramModel& model,
                                 const Location& target,
                                 const NeighborhoodSpec& nbhd) {
  const auto neighbors =
      obs.neighbors_within(target, nbhd.max_radius_m, nbhd.max_points);
  const std::size_t min_pts = std::max<std::size_t>(nbhd.min_points, 1);
  if (neighbors.size() < min_pts)
    throw KrigingError("only " + std::to_string(neighbors.size()) +
                           " neighbors within radius, need " + std::to_string(min_pts),
                       neighbors.size());

  std::vector<ObsRow> rows;
  rows.reserve(neighbors.size());
  for (const auto& nb : neighbors) {
    const auto& p = obs.dataset()[nb.index];
    rows.push_back({p.loc, p.value, p.variable_id});
  }

  try {
    return solve_ordinary(rows, model, target, neighbors.size());
  } catch (const KrigingError&) {
    if (!has_duplicate_locations(rows)) throw;
    return solve_ordinary(merge_duplicates(rows), model, target, neighbors.size());
  }
}

namespace {

struct CokrigeSystem {
  std::vector<ObsRow> rows;                 // grouped by variable, ascending
  std::array<std::size_t, 3> counts{};      // selected neighbors per variable
  std::vector<int> constrained;             // variables present in the system
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::MatrixXd a;
  bool factored = false;
};

CokrigeSystem build_cokrige_system(const std::array<const SpatialIndex*, 3>& obs,
                                   const CoregionalizationModel& model,
                                   const Location& target,
                                   const NeighborhoodSpec& nbhd) {
  CokrigeSystem sys;
  for (int v = 0; v < 3; ++v) {
    if (obs[static_cast<std::size_t>(v)] == nullptr) continue;
    const auto neighbors = obs[static_cast<std::size_t>(v)]->neighbors_within(
        target, nbhd.max_radius_m, nbhd.max_points);
    sys.counts[static_cast<std::size_t>(v)] = neighbors.size();
    if (neighbors.empty()) continue;
    sys.constrained.push_back(v);
    for (const auto& nb : neighbors) {
      const auto& p = obs[static_cast<std::size_t>(v)]->dataset()[nb.index];
      sys.rows.push_back({p.loc, p.value, v});
    }
  }
  if (sys.rows.empty()) return sys;

  const int k = static_cast<int>(sys.rows.size());
  const int c = static_cast<int>(sys.constrained.size());
  sys.a = Eigen::MatrixXd::Zero(k + c, k + c);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      const double cov = lmc_covariance(
          model, sys.rows[i].variable, sys.rows[j].variable,
          i == j ? 0.0 : distance(sys.rows[i].loc, sys.rows[j].loc), i == j);
      sys.a(i, j) = cov;
      sys.a(j, i) = cov;
    }
    for (int q = 0; q < c; ++q) {
      const double ind = sys.rows[i].variable == sys.constrained[static_cast<std::size_t>(q)] ? 1.0 : 0.0;
      sys.a(i, k + q) = ind;
      sys.a(k + q, i) = ind;
    }
  }
  sys.lu.compute(sys.a);
  sys.factored = true;
  return sys;
}

KrigingOutcome cokrige_from_system(const CokrigeSystem& sys,
                                   const CoregionalizationModel& model,
                                   const Location& target, int v,
                                   const NeighborhoodSpec& nbhd) {
  KrigingOutcome out;
  out.n_neighbors = sys.counts[static_cast<std::size_t>(v)];
  const std::size_t min_pts = std::max<std::size_t>(nbhd.min_points, 1);
  if (out.n_neighbors < min_pts) {
    out.error = "only " + std::to_string(out.n_neighbors) +
                " neighbors of variable " + std::to_string(v) + ", need " +
                std::to_string(min_pts);
    return out;
  }

  const int k = static_cast<int>(sys.rows.size());
  const int c = static_cast<int>(sys.constrained.size());
  Eigen::VectorXd b(k + c);
  for (int i = 0; i < k; ++i)
    b(i) = lmc_covariance(model, sys.rows[i].variable, v,
                          distance(target, sys.rows[i].loc), false);
  int target_row = -1;
  for (int q = 0; q < c; ++q) {
    b(k + q) = sys.constrained[static_cast<std::size_t>(q)] == v ? 1.0 : 0.0;
    if (sys.constrained[static_cast<std::size_t>(q)] == v) target_row = k + q;
  }

  const Eigen::VectorXd sol = sys.lu.solve(b);
  const double scale = std::max(1.0, sys.a.cwiseAbs().maxCoeff());
  if (!sol.allFinite() ||
      (sys.a * sol - b).cwiseAbs().maxCoeff() > 1e-7 * scale) {
    out.error = "singular co-kriging system";
    return out;
  }

  KrigingPrediction pred;
  pred.target = target;
  pred.variable_id = v;
  pred.n_neighbors_used = out.n_neighbors;
  pred.lagrange_multiplier = target_row >= 0 ? sol(target_row) : 0.0;
  double z = 0.0, cv = 0.0;
  for (int i = 0; i < k; ++i) {
    z += sol(i) * sys.rows[static_cast<std::size_t>(i)].value;
    cv += sol(i) * b(i);
  }
  pred.predicted_value = z;
  const double c0_total = model.b_nugget[v][v] + model.b_structure[v][v];
  pred.kriging_variance = std::max(0.0, c0_total - cv - pred.lagrange_multiplier);
  out.ok = true;
  out.pred = pred;
  return out;
}

}  // namespace

KrigingPrediction cokrige(const std::array<const SpatialIndex*, 3>& obs,
                          const CoregionalizationModel& model,
                          const Location& target, int target_variable,
                          const NeighborhoodSpec& nbhd) {
  if (target_variable < 0 || target_variable > 2)
    throw std::invalid_argument("target_variable must be 0, 1 or 2");
  const CokrigeSystem sys = build_cokrige_system(obs, model, target, nbhd);
  if (!sys.factored)
    throw KrigingError("no neighbors of any variable within radius", 0);
  KrigingOutcome out = cokrige_from_system(sys, model, target, target_variable, nbhd);
  if (!out.ok) throw KrigingError(out.error, out.n_neighbors);
  return out.pred;
}

std::array<KrigingOutcome, 3> cokrige_all(const std::array<const SpatialIndex*, 3>& obs,
                                          const CoregionalizationModel& model,
                                          const Location& target,
                                          const NeighborhoodSpec& nbhd) {
  std::array<KrigingOutcome, 3> out;
  const CokrigeSystem sys = build_cokrige_system(obs, model, target, nbhd);
  for (int v = 0; v < 3; ++v) {
    if (!sys.factored) {
      out[static_cast<std::size_t>(v)].error = "no neighbors of any variable within radius";
      continue;
    }
    out[static_cast<std::size_t>(v)] = cokrige_from_system(sys, model, target, v, nbhd);
  }
  return out;
}

std::vector<KrigingOutcome> krige_batch(const SpatialIndex& obs,
                                        const ExponentialVariogramModel& model,
                                        const std::vector<Location>& targets,
                                        const NeighborhoodSpec& nbhd) {
  std::vector<KrigingOutcome> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    try {
      out[t].pred = ordinary_krige(obs, model, targets[t], nbhd);
      out[t].ok = true;
      out[t].n_neighbors = out[t].pred.n_neighbors_used;
    } catch (const KrigingError& e) {
      out[t].error = e.what();
      out[t].n_neighbors = e.n_neighbors;
    }
  }
  return out;
}

std::vector<KrigingOutcome> krige_batch(const SpatialDataset& obs,
                                        const ExponentialVariogramModel& model,
                                        const std::vector<Location>& targets,
                                        const NeighborhoodSpec& nbhd) {
  SpatialIndex index(obs);
  return krige_batch(index, model, targets, nbhd);
}

std::vector<std::array<KrigingOutcome, 3>> cokrige_batch(
    const std::array<const SpatialIndex*, 3>& obs, const CoregionalizationModel& model,
    const std::vector<Location>& targets, const NeighborhoodSpec& nbhd) {
  std::vector<std::array<KrigingOutcome, 3>> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t)
    out[t] = cokrige_all(obs, model, targets[t], nbhd);
  return out;
}

}  // namespace geokrige
