#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stdisc/corpus_io.hpp"
#include "stdisc/types.hpp"

namespace stdisc {

/// K x D centroid matrix produced by k-means.
struct Codebook {
  Matrix centroids;

  std::size_t k() const noexcept { return centroids.rows(); }
  std::size_t dim() const noexcept { return centroids.cols(); }
  friend bool operator==(const Codebook&, const Codebook&) = default;
};

struct KMeansOptions {
  std::size_t k = 100;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double rel_tol = 1e-4;
};

struct KMeansResult {
  Codebook codebook;
  /// Inertia (sum of squared distances) after each assignment step.
  std::vector<double> inertia_trace;
  int iterations = 0;
};

/// Lloyd's algorithm seeded with k-means++ on the pooled frames of `features`.
///
/// Stops when the relative inertia improvement falls below `rel_tol`, when the
/// assignment stops changing, or after `max_iters` iterations. Training runs in
/// double precision and the final centroids are rounded to f32. The result is
/// bit-identical for identical inputs regardless of thread count.
KMeansResult train_kmeans(const std::vector<FeatureSequence>& features, const KMeansOptions& options);
KMeansResult train_kmeans(const Matrix& pooled, const KMeansOptions& options);

Codebook train_codebook(const std::vector<FeatureSequence>& features, std::size_t k, std::uint64_t seed,
                        int max_iters = 100, double rel_tol = 1e-4);

/// Nearest centroid per frame (Euclidean), ties toward the lower index.
/// OpenMP-parallel over frames.
std::vector<std::uint32_t> assign(const Matrix& frames, const Codebook& codebook);
/// Serial reference for `assign`.
std::vector<std::uint32_t> assign_serial(const Matrix& frames, const Codebook& codebook);

/// Stacks all frames of a corpus into one matrix. Throws on mixed dimensions.
Matrix pool_frames(const std::vector<FeatureSequence>& features);

// "DSTC" codebook file: magic, u32 K, u32 D, K*D little-endian f32.
void write_codebook(const std::filesystem::path& path, const Codebook& codebook);
Codebook read_codebook(const std::filesystem::path& path);

}  // namespace stdisc
