#pragma once

#include <functional>
#include <vector>

#include "stdisc/aligner.hpp"
#include "stdisc/corpus_io.hpp"

namespace stdisc {

inline constexpr int kDefaultTau = 8;
inline constexpr double kDefaultMinDuration = 0.2;

struct DiscoveryConfig {
  int tau = kDefaultTau;
  double min_duration = kDefaultMinDuration;
  ScoringScheme scheme;
  /// Only align distinct utterances. When false each utterance is also
  /// aligned with itself, excluding the trivial diagonal.
  bool distinct_only = true;
  /// Drop a match when either fragment is short (true) or only when both are.
  bool filter_both = true;
  /// OpenMP thread count; 0 uses the runtime default.
  int workers = 0;
  /// Called with (pairs done, pairs total); invocations are serialised.
  std::function<void(std::size_t, std::size_t)> on_progress;

  void validate() const;
};

/// Raw unit-level matches for one utterance pair (indices into the corpus).
struct PairMatches {
  std::size_t x = 0;
  std::size_t y = 0;
  std::vector<LocalMatch> matches;
};

/// Maps a unit-level match onto recording-relative times. The interval runs
/// from the first frame of the first covered segment to the end of the last
/// one, so units skipped by gaps inside the span are included.
std::pair<Fragment, Fragment> match_to_times(const LocalMatch& match, const EncodedUtterance& x,
                                             const EncodedUtterance& y);

/// Pairs (x, y) with x < y in corpus order, plus (x, x) when self pairs are on.
std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t corpus_size, bool distinct_only);

/// Runs the extractor on every pair, dynamically scheduled across OpenMP
/// threads with one aligner per thread. Result order follows enumerate_pairs.
std::vector<PairMatches> match_all_pairs(const std::vector<EncodedUtterance>& corpus, const DiscoveryConfig& config);
/// Serial reference for `match_all_pairs`.
std::vector<PairMatches> match_all_pairs_serial(const std::vector<EncodedUtterance>& corpus,
                                                const DiscoveryConfig& config);

/// Keeps the leading matches of each pair scoring >= tau. Extraction order is
/// independent of the threshold, so this equals a fresh run at `tau`.
std::vector<PairMatches> truncate_to_tau(const std::vector<PairMatches>& raw, int tau);

/// Time mapping, duration filter and canonical ordering by
/// (id_a, id_b, start_a, start_b, end_a, end_b, score).
std::vector<MatchPair> to_match_pairs(const std::vector<PairMatches>& raw, const std::vector<EncodedUtterance>& corpus,
                                      const DiscoveryConfig& config);

/// All-pairs discovery. Output is identical for any worker count.
std::vector<MatchPair> discover(const std::vector<EncodedUtterance>& corpus, const DiscoveryConfig& config);
std::vector<MatchPair> discover_serial(const std::vector<EncodedUtterance>& corpus, const DiscoveryConfig& config);

struct SweepResult {
  int tau = 0;
  std::vector<MatchPair> pairs;
};
/// Discovery at every tau in [tau_lo, tau_hi] from a single alignment pass at tau_lo.
std::vector<SweepResult> discover_sweep(const std::vector<EncodedUtterance>& corpus, const DiscoveryConfig& config,
                                        int tau_lo, int tau_hi);

}  // namespace stdisc
