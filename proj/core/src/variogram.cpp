#include "geokrige/variogram.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include "geokrige/spatial_index.hpp"

namespace geokrige {

namespace {

struct BinAccumulator {
  std::vector<double> ss;
  std::vector<double> dist;
  std::vector<long long> n;
  explicit BinAccumulator(int n_bins) : ss(n_bins, 0.0), dist(n_bins, 0.0), n(n_bins, 0) {}
  void add(int b, double contribution, double d) {
    ss[static_cast<std::size_t>(b)] += contribution;
    dist[static_cast<std::size_t>(b)] += d;
    ++n[static_cast<std::size_t>(b)];
  }
};

EmpiricalVariogram finalize(BinAccumulator& acc, double max_dist, int n_bins,
                            double denom_factor) {
  EmpiricalVariogram out;
  out.max_dist = max_dist;
  out.n_bins = n_bins;
  out.bins.resize(static_cast<std::size_t>(n_bins));
  const double w = max_dist / n_bins;
  long long total = 0;
  for (int b = 0; b < n_bins; ++b) {
    auto& bin = out.bins[static_cast<std::size_t>(b)];
    bin.lag_center = (b + 0.5) * w;
    bin.n_pairs = acc.n[static_cast<std::size_t>(b)];
    bin.gamma_hat = bin.n_pairs > 0
                        ? acc.ss[static_cast<std::size_t>(b)] /
                              (denom_factor * static_cast<double>(bin.n_pairs))
                        : 0.0;
    bin.mean_dist = bin.n_pairs > 0
                        ? acc.dist[static_cast<std::size_t>(b)] /
                              static_cast<double>(bin.n_pairs)
                        : 0.0;
    total += bin.n_pairs;
  }
  out.all_pairs_beyond_max_dist = (total == 0);
  return out;
}

void check_setup(std::size_t n_points, double max_dist, int n_bins) {
  if (n_points < 2)
    throw std::invalid_argument("variogram needs at least two points");
  if (!(max_dist > 0.0))
    throw std::invalid_argument("variogram max_dist must be positive");
  if (n_bins < 1)
    throw std::invalid_argument("variogram needs at least one bin");
}

// Bit-pattern key so location matching is exact, never tolerance-based.
std::uint64_t coord_key(double v) {
  std::uint64_t k;
  static_assert(sizeof(k) == sizeof(v));
  std::memcpy(&k, &v, sizeof(k));
  return k;
}

std::uint64_t location_key(const Location& l) {
  const std::uint64_t a = coord_key(l.x);
  const std::uint64_t b = coord_key(l.y);
  std::uint64_t h = a * 0x9e3779b97f4a7c15ULL;
  h ^= (h >> 29) ^ b;
  return h * 0xbf58476d1ce4e5b9ULL;
}

}  // namespace

EmpiricalVariogram empirical_variogram(const SpatialDataset& ds, double max_dist,
                                       int n_bins) {
  check_setup(ds.size(), max_dist, n_bins);

  SpatialIndex index(ds);
  BinAccumulator acc(n_bins);
  long long zero_pairs = 0;
  double zero_ss = 0.0;

  const auto& pts = ds.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    index.for_each_within(pts[i].loc, max_dist, [&](std::size_t j, double d) {
      if (j <= i) return;  // each unordered pair once
      const double dz = pts[i].value - pts[j].value;
      if (d == 0.0) {
        ++zero_pairs;
        zero_ss += dz * dz;
        return;
      }
      const int b = lag_bin_index(d, max_dist, n_bins);
      if (b >= 0) acc.add(b, dz * dz, d);
    });
  }

  EmpiricalVariogram out = finalize(acc, max_dist, n_bins, 2.0);
  out.zero_distance_pairs = zero_pairs;
  out.zero_distance_gamma =
      zero_pairs > 0 ? zero_ss / (2.0 * static_cast<double>(zero_pairs)) : 0.0;
  return out;
}

EmpiricalVariogram empirical_cross_variogram(const SpatialDataset& ds_i,
                                             const SpatialDataset& ds_j,
                                             double max_dist, int n_bins,
                                             CrossMode mode) {
  check_setup(std::min(ds_i.size(), ds_j.size()), max_dist, n_bins);

  // Match locations of ds_j by exact coordinates.
  std::unordered_map<std::uint64_t, std::size_t> j_at;
  j_at.reserve(ds_j.size());
  for (std::size_t j = 0; j < ds_j.size(); ++j)
    j_at.emplace(location_key(ds_j[j].loc), j);

  std::size_t matched = 0;
  std::vector<int> match_of(ds_i.size(), -1);
  for (std::size_t i = 0; i < ds_i.size(); ++i) {
    const auto it = j_at.find(location_key(ds_i[i].loc));
    if (it != j_at.end() && same_location(ds_i[i].loc, ds_j[it->second].loc)) {
      match_of[i] = static_cast<int>(it->second);
      ++matched;
    }
  }
  const bool fully_collocated =
      matched == ds_i.size() && ds_i.size() == ds_j.size();

  if (mode == CrossMode::auto_detect)
    mode = fully_collocated ? CrossMode::collocated : CrossMode::covariance;
  if (mode == CrossMode::collocated && matched < 2)
    throw std::invalid_argument(
        "collocated cross variogram needs at least two shared locations");

  if (mode == CrossMode::collocated) {
    // Classic estimator over location-matched pairs:
    // gamma_ij(h) = sum (Zi(s)-Zi(t)) (Zj(s)-Zj(t)) / (2 N(h)).
    std::vector<std::size_t> rows;
    rows.reserve(matched);
    for (std::size_t i = 0; i < ds_i.size(); ++i)
      if (match_of[i] >= 0) rows.push_back(i);

    std::vector<ObservedPoint> matched_pts;
    matched_pts.reserve(rows.size());
    for (std::size_t i : rows) matched_pts.push_back(ds_i[i]);
    SpatialDataset matched_ds{std::move(matched_pts)};
    SpatialIndex index(matched_ds);

    BinAccumulator acc(n_bins);
    long long zero_pairs = 0;
    double zero_ss = 0.0;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      index.for_each_within(matched_ds[a].loc, max_dist, [&](std::size_t b, double d) {
        if (b <= a) return;
        const std::size_t ia = rows[a], ib = rows[b];
        const double di = ds_i[ia].value - ds_i[ib].value;
        const double dj = ds_j[static_cast<std::size_t>(match_of[ia])].value -
                          ds_j[static_cast<std::size_t>(match_of[ib])].value;
        if (d == 0.0) {
          ++zero_pairs;
          zero_ss += di * dj;
          return;
        }
        const int bin = lag_bin_index(d, max_dist, n_bins);
        if (bin >= 0) acc.add(bin, di * dj, d);
      });
    }
    EmpiricalVariogram out = finalize(acc, max_dist, n_bins, 2.0);
    out.zero_distance_pairs = zero_pairs;
    out.zero_distance_gamma =
        zero_pairs > 0 ? zero_ss / (2.0 * static_cast<double>(zero_pairs)) : 0.0;
    return out;
  }

  // Covariance route for (partially) heterotopic data:
  // gamma_ij(h) = C_ij(0) - C_ij(h) with C from centered cross products.
  const double m_i = ds_i.mean_value();
  const double m_j = ds_j.mean_value();
  SpatialIndex index_j(ds_j);

  BinAccumulator acc(n_bins);
  long long zero_pairs = 0;
  double zero_sum = 0.0;
  for (std::size_t a = 0; a < ds_i.size(); ++a) {
    index_j.for_each_within(ds_i[a].loc, max_dist, [&](std::size_t b, double d) {
      const double prod = (ds_i[a].value - m_i) * (ds_j[b].value - m_j);
      if (d == 0.0) {
        ++zero_pairs;
        zero_sum += prod;
        return;
      }
      const int bin = lag_bin_index(d, max_dist, n_bins);
      if (bin >= 0) acc.add(bin, prod, d);
    });
  }

  EmpiricalVariogram cov = finalize(acc, max_dist, n_bins, 1.0);

  double c0_hat = 0.0;
  bool extrapolated = false;
  if (zero_pairs > 0) {
    c0_hat = zero_sum / static_cast<double>(zero_pairs);
  } else {
    // No collocated pair: take the shortest-lag covariance as the lag-0 value.
    extrapolated = true;
    for (const auto& b : cov.bins) {
      if (b.n_pairs > 0) {
        c0_hat = b.gamma_hat;  // still holds C_ij at this point
        break;
      }
    }
  }

  EmpiricalVariogram out = cov;
  for (auto& b : out.bins)
    if (b.n_pairs > 0) b.gamma_hat = c0_hat - b.gamma_hat;
  out.covariance_based = true;
  out.cross_sill_extrapolated = extrapolated;
  out.cross_c0_hat = c0_hat;
  out.zero_distance_pairs = zero_pairs;
  out.zero_distance_gamma = zero_pairs > 0 ? c0_hat : 0.0;
  return out;
}

}  // namespace geokrige
