#include "stdisc/quantizer.hpp"

#include <array>
#include <fstream>
#include <limits>
#include <random>

#include <omp.h>

namespace stdisc {

namespace {

constexpr std::array<char, 4> kCodebookMagic = {'D', 'S', 'T', 'C'};

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementations.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sq_dist(std::span<const float> x, const double* center, std::size_t dim) noexcept {
  double acc = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = static_cast<double>(x[d]) - center[d];
    acc += diff * diff;
  }
  return acc;
}

struct Nearest {
  std::uint32_t index;
  double distance;
};

Nearest nearest(std::span<const float> x, const std::vector<double>& centers, std::size_t k, std::size_t dim) {
  Nearest best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < k; ++c) {
    const double d = sq_dist(x, centers.data() + c * dim, dim);
    if (d < best.distance) best = {static_cast<std::uint32_t>(c), d};
  }
  return best;
}

std::vector<double> kmeanspp(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  std::vector<double> centers(k * dim);
  std::vector<char> chosen(n, 0);

  auto take = [&](std::size_t c, std::size_t idx) {
    chosen[idx] = 1;
    const auto row = points.row(idx);
    for (std::size_t d = 0; d < dim; ++d) centers[c * dim + d] = row[d];
  };

  take(0, std::min<std::size_t>(n - 1, static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n))));
  std::vector<double> d2(n);
  for (std::size_t t = 0; t < n; ++t) d2[t] = sq_dist(points.row(t), centers.data(), dim);

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = unit_uniform(rng) * total;
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        acc += d2[t];
        if (d2[t] > 0.0 && acc > target) {
          pick = t;
          break;
        }
      }
      if (pick == n) {
        // Rounding left the target past the last mass; take the last candidate.
        for (std::size_t t = n; t-- > 0;) {
          if (d2[t] > 0.0) {
            pick = t;
            break;
          }
        }
      }
    } else {
      // Fewer distinct points than clusters: reuse the first unchosen frame.
      for (std::size_t t = 0; t < n && pick == n; ++t) {
        if (!chosen[t]) pick = t;
      }
      if (pick == n) pick = 0;
    }
    take(c, pick);
    const double* center = centers.data() + c * dim;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n); ++t) {
      d2[t] = std::min(d2[t], sq_dist(points.row(t), center, dim));
    }
  }
  return centers;
}

}  // namespace

Matrix pool_frames(const std::vector<FeatureSequence>& features) {
  std::size_t rows = 0;
  std::size_t dim = 0;
  for (const auto& f : features) {
    if (f.frames.rows() == 0) continue;
    if (dim == 0) dim = f.frames.cols();
    if (f.frames.cols() != dim) {
      throw InvalidArgument("utterance '" + f.utterance_id + "' has dimension " + std::to_string(f.frames.cols()) +
                            ", expected " + std::to_string(dim));
    }
    rows += f.frames.rows();
  }
  std::vector<float> data;
  data.reserve(rows * dim);
  for (const auto& f : features) {
    const auto payload = f.frames.data();
    data.insert(data.end(), payload.begin(), payload.end());
  }
  return Matrix(rows, dim, std::move(data));
}

KMeansResult train_kmeans(const Matrix& points, const KMeansOptions& options) {
  const std::size_t n = points.rows();
  const std::size_t k = options.k;
  const std::size_t dim = points.cols();
  if (k == 0) throw InvalidArgument("k must be at least 1");
  if (n < k) {
    throw InvalidArgument("k-means needs at least k frames: have " + std::to_string(n) + ", k = " +
                          std::to_string(k));
  }
  if (options.max_iters < 1) throw InvalidArgument("max_iters must be at least 1");

  std::mt19937_64 rng(options.seed);
  std::vector<double> centers = kmeanspp(points, k, rng);

  KMeansResult result;
  std::vector<std::uint32_t> labels(n, std::numeric_limits<std::uint32_t>::max());
  std::vector<std::uint32_t> previous;
  std::vector<double> dist(n);
  std::vector<double> sums(k * dim);
  std::vector<std::size_t> counts(k);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    previous = labels;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n); ++t) {
      const auto best = nearest(points.row(t), centers, k, dim);
      labels[t] = best.index;
      dist[t] = best.distance;
    }
    // Summed in frame order so the trace does not depend on the thread count.
    double inertia = 0.0;
    for (double d : dist) inertia += d;
    result.inertia_trace.push_back(inertia);
    result.iterations = iter + 1;

    if (iter > 0) {
      const double prior = result.inertia_trace[result.inertia_trace.size() - 2];
      if (labels == previous || inertia == 0.0 || prior - inertia < options.rel_tol * prior) break;
    } else if (inertia == 0.0) {
      break;
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t t = 0; t < n; ++t) {
      const auto row = points.row(t);
      double* s = sums.data() + labels[t] * dim;
      for (std::size_t d = 0; d < dim; ++d) s[d] += row[d];
      ++counts[labels[t]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t d = 0; d < dim; ++d) {
        centers[c * dim + d] = sums[c * dim + d] / static_cast<double>(counts[c]);
      }
    }
    // Empty clusters move onto the frame farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t t = 1; t < n; ++t) {
        if (dist[t] > dist[far]) far = t;
      }
      const auto row = points.row(far);
      for (std::size_t d = 0; d < dim; ++d) centers[c * dim + d] = row[d];
      dist[far] = -1.0;
    }
  }

  Matrix centroids(k, dim);
  for (std::size_t i = 0; i < k * dim; ++i) centroids.data()[i] = static_cast<float>(centers[i]);
  result.codebook.centroids = std::move(centroids);
  return result;
}

KMeansResult train_kmeans(const std::vector<FeatureSequence>& features, const KMeansOptions& options) {
  return train_kmeans(pool_frames(features), options);
}

Codebook train_codebook(const std::vector<FeatureSequence>& features, std::size_t k, std::uint64_t seed,
                        int max_iters, double rel_tol) {
  return train_kmeans(features, KMeansOptions{k, seed, max_iters, rel_tol}).codebook;
}

namespace {

void check_dims(const Matrix& frames, const Codebook& codebook) {
  if (codebook.k() == 0) throw InvalidArgument("empty codebook");
  if (frames.rows() > 0 && frames.cols() != codebook.dim()) {
    throw InvalidArgument("feature dimension " + std::to_string(frames.cols()) + " does not match codebook dimension " +
                          std::to_string(codebook.dim()));
  }
}

std::uint32_t nearest_label(std::span<const float> x, const Codebook& codebook) {
  std::uint32_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < codebook.k(); ++c) {
    const double d = squared_distance(x, codebook.centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

}  // namespace

std::vector<std::uint32_t> assign(const Matrix& frames, const Codebook& codebook) {
  check_dims(frames, codebook);
  std::vector<std::uint32_t> labels(frames.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(frames.rows()); ++t) {
    labels[t] = nearest_label(frames.row(t), codebook);
  }
  return labels;
}

std::vector<std::uint32_t> assign_serial(const Matrix& frames, const Codebook& codebook) {
  check_dims(frames, codebook);
  std::vector<std::uint32_t> labels(frames.rows());
  for (std::size_t t = 0; t < frames.rows(); ++t) labels[t] = nearest_label(frames.row(t), codebook);
  return labels;
}

void write_codebook(const std::filesystem::path& path, const Codebook& codebook) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kCodebookMagic.data(), kCodebookMagic.size());
  const auto k = static_cast<std::uint32_t>(codebook.k());
  const auto d = static_cast<std::uint32_t>(codebook.dim());
  out.write(reinterpret_cast<const char*>(&k), sizeof k);
  out.write(reinterpret_cast<const char*>(&d), sizeof d);
  const auto payload = codebook.centroids.data();
  out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size_bytes()));
  out.flush();
  if (!out) throw std::runtime_error("I/O failure writing " + path.string());
}

Codebook read_codebook(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kCodebookMagic) throw FormatError("not a DSTC codebook (bad magic)");
  std::uint32_t k = 0;
  std::uint32_t d = 0;
  in.read(reinterpret_cast<char*>(&k), sizeof k);
  in.read(reinterpret_cast<char*>(&d), sizeof d);
  if (!in) throw FormatError("truncated codebook header");
  if (k == 0 || d == 0) throw FormatError("codebook must have K >= 1 and D >= 1");
  std::vector<float> payload(static_cast<std::size_t>(k) * d);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != payload.size() * sizeof(float)) {
    throw FormatError("truncated codebook payload");
  }
  Codebook cb{Matrix(k, d, std::move(payload))};
  if (!cb.centroids.all_finite()) throw FormatError("codebook contains non-finite centroids");
  return cb;
}

}  // namespace stdisc
