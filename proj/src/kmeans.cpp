#include "mcnb/kmeans.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcnb/errors.hpp"

namespace mcnb {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return acc;
}

}  // namespace

KmeansResult kmeans_precluster(const std::vector<std::vector<double>>& rows,
                               std::size_t k, std::size_t iters, Rng& rng) {
  if (rows.empty()) {
    throw Error("invalid_argument", "k-means needs at least one row");
  }
  if (k == 0 || k > rows.size()) {
    throw Error("invalid_argument",
                "k must lie in [1, rows]; got k=" + std::to_string(k) +
                    " with " + std::to_string(rows.size()) + " rows");
  }
  const std::size_t n = rows.size();
  KmeansResult out;

  // seeding: first centroid uniform, then proportional to squared
  // distance from the nearest chosen centroid
  out.centroids.push_back(rows[rng.uniform_index(n)]);
  std::vector<double> d2(n);
  while (out.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : out.centroids) {
        best = std::min(best, sq_dist(rows[i], c));
      }
      d2[i] = best;
      total += best;
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      while (pick + 1 < n && target >= d2[pick]) {
        target -= d2[pick];
        ++pick;
      }
    } else {
      pick = rng.uniform_index(n);  // duplicate rows; any choice works
    }
    out.centroids.push_back(rows[pick]);
  }

  out.assignment.assign(n, 0);
  for (std::size_t iter = 0; iter < iters; ++iter) {
    double distortion = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(rows[i], out.centroids[c]);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      out.assignment[i] = arg;
      distortion += best;
    }
    out.distortion_per_iter.push_back(distortion);

    std::vector<std::vector<double>> sums(
        k, std::vector<double>(rows[0].size(), 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = out.assignment[i];
      ++counts[c];
      for (std::size_t j = 0; j < rows[i].size(); ++j) {
        sums[c][j] += rows[i][j];
      }
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < sums[c].size(); ++j) {
        sums[c][j] /= static_cast<double>(counts[c]);
      }
      out.centroids[c] = sums[c];
    }
  }

  // final assignment against the last centroid update
  double distortion = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < k; ++c) {
      const double d = sq_dist(rows[i], out.centroids[c]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    out.assignment[i] = arg;
    distortion += best;
  }
  out.distortion_per_iter.push_back(distortion);
  return out;
}

}  // namespace mcnb
