#pragma once

#include <vector>

#include "stdisc/corpus_io.hpp"
#include "stdisc/quantizer.hpp"

namespace stdisc {

inline constexpr double kDefaultGamma = 0.2;

struct SegmenterOptions {
  double gamma = kDefaultGamma;
  /// Longest allowed segment in frames; 0 means uncapped.
  std::size_t max_segment_frames = 0;
};

/// Relative tolerance used when deciding that two segmentation costs tie.
inline constexpr double kCostTieTolerance = 1e-9;

/// Segmentation cost as written: sum over segments of the unsquared
/// distances from each frame to the segment's centroid, minus
/// gamma * (b - a) per segment.
double segmentation_cost(const Matrix& frames, const Codebook& codebook, const std::vector<Segment>& segments,
                         double gamma);

/// Globally optimal segmentation of one utterance into contiguous segments.
///
/// Exact O(T^2 K) dynamic program. Because the spans are inclusive,
/// sum_n (b_n - a_n) = T - N, so the duration reward is the constant -gamma*T
/// plus +gamma per segment; the recursion uses the per-segment form. Each
/// segment takes the centroid minimising its summed distance (lowest index on
/// ties). Among segmentations whose costs tie within kCostTieTolerance the one
/// with the fewest segments wins, then the one with the earliest boundaries.
EncodedUtterance segment(const FeatureSequence& utterance, const Codebook& codebook,
                         const SegmenterOptions& options = {});
std::vector<Segment> segment(const Matrix& frames, const Codebook& codebook, const SegmenterOptions& options = {});

/// Segments every utterance, OpenMP-parallel over utterances. Output order
/// follows input order; errors name the failing utterance.
std::vector<EncodedUtterance> encode_corpus(const std::vector<FeatureSequence>& features, const Codebook& codebook,
                                            const SegmenterOptions& options = {}, int workers = 0);
/// Serial reference for `encode_corpus`.
std::vector<EncodedUtterance> encode_corpus_serial(const std::vector<FeatureSequence>& features,
                                                   const Codebook& codebook, const SegmenterOptions& options = {});

}  // namespace stdisc
