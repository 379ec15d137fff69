#pragma once

#include <vector>

#include "mcnb/rng.hpp"

namespace mcnb {

struct KmeansResult {
  std::vector<std::size_t> assignment;          // per row
  std::vector<std::vector<double>> centroids;   // k rows
  std::vector<double> distortion_per_iter;      // after each assignment pass
};

// Lloyd's iterations from distance-weighted (k-means++ style) seeding.
// Deterministic for a given rng state; empty clusters keep their
// previous centroid.
KmeansResult kmeans_precluster(const std::vector<std::vector<double>>& rows,
                               std::size_t k, std::size_t iters, Rng& rng);

}  // namespace mcnb
