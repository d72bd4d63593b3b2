#pragma once

// Independent reference computations used only by the test suites. None of
// these call into the library code paths they are used to check.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "stdisc/aligner.hpp"
#include "stdisc/corpus_io.hpp"
#include "stdisc/quantizer.hpp"

namespace stdisc::oracle {

/// Best local alignment score: maximum over every pair of substrings of the
/// optimal global (Needleman-Wunsch) score, or 0 for the empty alignment.
int local_alignment_by_substrings(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y,
                                  const ScoringScheme& scheme);

/// Best local alignment score by enumerating every gapped alignment path from
/// every start position. Exponential; keep inputs at length <= 7.
int local_alignment_by_enumeration(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y,
                                   const ScoringScheme& scheme);

/// Minimum segmentation cost over all 2^(T-1) boundary sets and all K^N unit
/// choices, with the cost evaluated term by term as written.
double brute_force_segmentation_cost(const Matrix& frames, const Codebook& codebook, double gamma);

/// Plain recursive edit distance.
std::size_t naive_levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Coverage by sweeping over every elementary interval between event points.
double sweep_line_coverage(const std::vector<MatchPair>& pairs, const VadTable& vad);

/// Minimum within-cluster sum of squares over every 2-partition; returns the
/// two centroids sorted lexicographically.
std::vector<std::vector<double>> best_two_partition(const std::vector<std::vector<double>>& points);

inline std::vector<std::uint32_t> random_units(std::mt19937_64& rng, std::size_t len, std::uint32_t alphabet) {
  std::vector<std::uint32_t> out(len);
  for (auto& u : out) u = static_cast<std::uint32_t>(rng() % alphabet);
  return out;
}

}  // namespace stdisc::oracle
