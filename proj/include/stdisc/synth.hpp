#pragma once

#include <cstdint>
#include <vector>

#include "stdisc/corpus_io.hpp"
#include "stdisc/quantizer.hpp"

namespace stdisc {

/// A unit sequence inserted into chosen utterances.
struct PlantedWord {
  std::vector<std::uint32_t> units;
  /// Corpus indices receiving one occurrence each.
  std::vector<std::size_t> utterances;
  /// Per-unit probability of replacing an occurrence's unit with a uniformly
  /// drawn different unit.
  double substitution_prob = 0.0;
};

struct SynthOptions {
  std::uint64_t seed = 0;
  std::size_t n_utterances = 50;
  /// Units per utterance.
  std::size_t utterance_len = 60;
  std::uint32_t alphabet = 100;
  std::size_t n_speakers = 5;
  std::uint32_t min_frames = 1;
  std::uint32_t max_frames = 4;
  double frame_period = kDefaultFramePeriod;
  std::vector<PlantedWord> planted;
};

struct PlantedOccurrence {
  std::size_t word = 0;
  std::size_t utterance = 0;
  std::size_t first_segment = 0;
  std::size_t last_segment = 0;
  double start = 0.0;
  double end = 0.0;
};

struct SyntheticCorpus {
  std::vector<EncodedUtterance> corpus;
  std::vector<PlantedOccurrence> truth;
};

/// Random background units (no two neighbours equal) with planted words at
/// random non-overlapping positions. Utterance ids are `s<speaker>_u<index>`,
/// speakers assigned round-robin. Deterministic for a fixed seed; throws
/// InvalidArgument when a placement is infeasible.
SyntheticCorpus generate_synthetic_corpus(const SynthOptions& options);

/// A word of `length` units with no two neighbours equal.
std::vector<std::uint32_t> random_word(std::uint64_t seed, std::size_t length, std::uint32_t alphabet);

/// Phone alignment with one phone `u<unit>` per segment.
PhoneAlignment alignment_from_units(const std::vector<EncodedUtterance>& corpus);
/// One speech interval spanning each utterance.
VadTable vad_from_units(const std::vector<EncodedUtterance>& corpus);

struct RenderedFeatures {
  std::vector<FeatureSequence> features;
  /// The generating centroids, one per unit.
  Codebook centroids;
};
/// Frames drawn around one random centroid per unit with Gaussian noise.
RenderedFeatures render_features(const std::vector<EncodedUtterance>& corpus, std::uint32_t alphabet,
                                 std::size_t dim, double noise, std::uint64_t seed);

/// The planted-term corpus used by the end-to-end checks: 50 utterances,
/// one 12-unit word planted identically in the first 10.
SynthOptions planted_term_options(std::uint64_t seed = 2024);

}  // namespace stdisc
