#include "stdisc/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>

#include <omp.h>

namespace stdisc {

namespace {

void check_inputs(const Matrix& frames, const Codebook& codebook, const SegmenterOptions& options) {
  if (frames.rows() == 0) throw InvalidArgument("cannot segment an utterance with zero frames");
  if (codebook.k() == 0) throw InvalidArgument("empty codebook");
  if (frames.cols() != codebook.dim()) {
    throw InvalidArgument("feature dimension " + std::to_string(frames.cols()) +
                          " does not match codebook dimension " + std::to_string(codebook.dim()));
  }
  if (!(options.gamma >= 0.0) || !std::isfinite(options.gamma)) {
    throw InvalidArgument("gamma must be a finite non-negative number");
  }
}

bool ties(double x, double y) {
  const double scale = std::max({1.0, std::abs(x), std::abs(y)});
  return std::abs(x - y) <= kCostTieTolerance * scale;
}

struct Cell {
  double cost = std::numeric_limits<double>::infinity();
  std::size_t segments = 0;
  std::size_t start = 0;  // first frame of the last segment
  std::uint32_t unit = 0;
};

// Segment starts after frame 0 for the best segmentation of frames [0, end).
std::vector<std::size_t> boundaries(const std::vector<Cell>& best, std::size_t end) {
  std::vector<std::size_t> out;
  while (end > 0) {
    const std::size_t start = best[end].start;
    if (start > 0) out.push_back(start);
    end = start;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

double segmentation_cost(const Matrix& frames, const Codebook& codebook, const std::vector<Segment>& segments,
                         double gamma) {
  double total = 0.0;
  for (const auto& s : segments) {
    double span = 0.0;
    for (std::size_t t = s.a; t <= s.b; ++t) {
      span += std::sqrt(squared_distance(frames.row(t), codebook.centroids.row(s.unit)));
    }
    total += span - gamma * static_cast<double>(s.b - s.a);
  }
  return total;
}

std::vector<Segment> segment(const Matrix& frames, const Codebook& codebook, const SegmenterOptions& options) {
  check_inputs(frames, codebook, options);
  const std::size_t frames_n = frames.rows();
  const std::size_t k = codebook.k();
  const double gamma = options.gamma;
  const std::size_t cap = options.max_segment_frames == 0 ? frames_n : options.max_segment_frames;

  std::vector<double> dist(frames_n * k);
  for (std::size_t t = 0; t < frames_n; ++t) {
    for (std::size_t c = 0; c < k; ++c) {
      dist[t * k + c] = std::sqrt(squared_distance(frames.row(t), codebook.centroids.row(c)));
    }
  }

  // best[e] is the optimal segmentation of frames [0, e). Costs use the
  // per-segment penalty form: span distance + gamma, and the constant
  // -gamma*T is left out (it does not change the argmin).
  std::vector<Cell> best(frames_n + 1);
  best[0].cost = 0.0;
  std::vector<double> span(k);

  for (std::size_t end = 1; end <= frames_n; ++end) {
    std::fill(span.begin(), span.end(), 0.0);
    Cell& cell = best[end];
    const std::size_t lowest = end > cap ? end - cap : 0;
    for (std::size_t start = end; start-- > lowest;) {
      const double* d = dist.data() + start * k;
      std::uint32_t unit = 0;
      for (std::size_t c = 0; c < k; ++c) {
        span[c] += d[c];
        if (span[c] < span[unit]) unit = static_cast<std::uint32_t>(c);
      }
      const double cost = best[start].cost + span[unit] + gamma;
      const std::size_t count = best[start].segments + 1;

      bool take = false;
      if (!std::isfinite(cell.cost)) {
        take = true;
      } else if (ties(cost, cell.cost)) {
        if (count != cell.segments) {
          take = count < cell.segments;
        } else {
          auto mine = boundaries(best, start);
          if (start > 0) mine.push_back(start);
          auto theirs = boundaries(best, cell.start);
          if (cell.start > 0) theirs.push_back(cell.start);
          take = mine < theirs;
        }
      } else {
        take = cost < cell.cost;
      }
      if (take) cell = {cost, count, start, unit};
    }
  }

  std::vector<Segment> out;
  for (std::size_t end = frames_n; end > 0; end = best[end].start) {
    out.push_back({static_cast<std::uint32_t>(best[end].start), static_cast<std::uint32_t>(end - 1), best[end].unit});
  }
  std::reverse(out.begin(), out.end());
  return out;
}

EncodedUtterance segment(const FeatureSequence& utterance, const Codebook& codebook, const SegmenterOptions& options) {
  try {
    return {utterance.utterance_id, segment(utterance.frames, codebook, options), utterance.frame_period,
            utterance.offset};
  } catch (const InvalidArgument& e) {
    throw InvalidArgument("utterance '" + utterance.utterance_id + "': " + e.what());
  }
}

std::vector<EncodedUtterance> encode_corpus_serial(const std::vector<FeatureSequence>& features,
                                                   const Codebook& codebook, const SegmenterOptions& options) {
  std::vector<EncodedUtterance> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(segment(f, codebook, options));
  return out;
}

std::vector<EncodedUtterance> encode_corpus(const std::vector<FeatureSequence>& features, const Codebook& codebook,
                                            const SegmenterOptions& options, int workers) {
  const auto n = static_cast<std::ptrdiff_t>(features.size());
  std::vector<EncodedUtterance> out(features.size());
  std::vector<std::exception_ptr> errors(features.size());
  const int threads = workers > 0 ? workers : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t u = 0; u < n; ++u) {
    try {
      out[u] = segment(features[u], codebook, options);
    } catch (...) {
      errors[u] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace stdisc
