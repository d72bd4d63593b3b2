#include "stdisc/discovery.hpp"

#include <algorithm>
#include <tuple>

#include <omp.h>

namespace stdisc {

void DiscoveryConfig::validate() const {
  if (tau < 1) throw InvalidArgument("tau must be at least 1");
  if (!(min_duration >= 0.0)) throw InvalidArgument("minimum duration must be non-negative");
  if (workers < 0) throw InvalidArgument("worker count must be non-negative");
  scheme.validate();
}

std::pair<Fragment, Fragment> match_to_times(const LocalMatch& match, const EncodedUtterance& x,
                                             const EncodedUtterance& y) {
  auto fragment = [](const EncodedUtterance& enc, const IndexSpan& span) {
    if (span.end >= enc.segments.size() || span.start > span.end) {
      throw InvalidArgument("match span out of range for utterance '" + enc.utterance_id + "'");
    }
    const auto& first = enc.segments[span.start];
    const auto& last = enc.segments[span.end];
    return Fragment{enc.utterance_id, enc.offset + first.a * enc.frame_period,
                    enc.offset + (static_cast<double>(last.b) + 1.0) * enc.frame_period};
  };
  return {fragment(x, match.x_span), fragment(y, match.y_span)};
}

std::vector<std::pair<std::size_t, std::size_t>> enumerate_pairs(std::size_t corpus_size, bool distinct_only) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t x = 0; x < corpus_size; ++x) {
    for (std::size_t y = distinct_only ? x + 1 : x; y < corpus_size; ++y) pairs.emplace_back(x, y);
  }
  return pairs;
}

namespace {

std::vector<std::vector<std::uint32_t>> unit_sequences(const std::vector<EncodedUtterance>& corpus) {
  std::vector<std::vector<std::uint32_t>> units;
  units.reserve(corpus.size());
  for (const auto& enc : corpus) units.push_back(enc.units());
  return units;
}

}  // namespace

std::vector<PairMatches> match_all_pairs_serial(const std::vector<EncodedUtterance>& corpus,
                                                const DiscoveryConfig& config) {
  config.validate();
  const auto units = unit_sequences(corpus);
  const auto pairs = enumerate_pairs(corpus.size(), config.distinct_only);
  LocalAligner aligner(config.scheme);
  std::vector<PairMatches> out;
  out.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    out.push_back({x, y, aligner.find_matches(units[x], units[y], config.tau, {.mask_lower_triangle = x == y})});
  }
  return out;
}

std::vector<PairMatches> match_all_pairs(const std::vector<EncodedUtterance>& corpus, const DiscoveryConfig& config) {
  config.validate();
  const auto units = unit_sequences(corpus);
  const auto pairs = enumerate_pairs(corpus.size(), config.distinct_only);
  const auto total = static_cast<std::ptrdiff_t>(pairs.size());
  std::vector<PairMatches> out(pairs.size());
  const int threads = config.workers > 0 ? config.workers : omp_get_max_threads();
  std::size_t done = 0;

#pragma omp parallel num_threads(threads)
  {
    LocalAligner aligner(config.scheme);
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t p = 0; p < total; ++p) {
      const auto [x, y] = pairs[p];
      out[p] = {x, y, aligner.find_matches(units[x], units[y], config.tau, {.mask_lower_triangle = x == y})};
      if (config.on_progress) {
#pragma omp critical(stdisc_progress)
        config.on_progress(++done, pairs.size());
      }
    }
  }
  return out;
}

std::vector<PairMatches> truncate_to_tau(const std::vector<PairMatches>& raw, int tau) {
  std::vector<PairMatches> out;
  out.reserve(raw.size());
  for (const auto& pm : raw) {
    PairMatches kept{pm.x, pm.y, {}};
    for (const auto& m : pm.matches) {
      if (m.score < tau) break;
      kept.matches.push_back(m);
    }
    out.push_back(std::move(kept));
  }
  return out;
}

std::vector<MatchPair> to_match_pairs(const std::vector<PairMatches>& raw, const std::vector<EncodedUtterance>& corpus,
                                      const DiscoveryConfig& config) {
  std::vector<MatchPair> out;
  for (const auto& pm : raw) {
    for (const auto& m : pm.matches) {
      auto [a, b] = match_to_times(m, corpus[pm.x], corpus[pm.y]);
      // Compared on the microsecond grid so 10 frames of 0.02 s count as 0.2 s.
      const Ticks min_ticks = to_ticks(config.min_duration);
      const bool short_a = to_ticks(a.end) - to_ticks(a.start) < min_ticks;
      const bool short_b = to_ticks(b.end) - to_ticks(b.start) < min_ticks;
      if (config.filter_both ? (short_a || short_b) : (short_a && short_b)) continue;
      out.push_back({std::move(a), std::move(b), m.score});
    }
  }
  std::sort(out.begin(), out.end(), [](const MatchPair& l, const MatchPair& r) {
    return std::tie(l.a.utterance_id, l.b.utterance_id, l.a.start, l.b.start, l.a.end, l.b.end, l.score) <
           std::tie(r.a.utterance_id, r.b.utterance_id, r.a.start, r.b.start, r.a.end, r.b.end, r.score);
  });
  return out;
}

std::vector<MatchPair> discover(const std::vector<EncodedUtterance>& corpus, const DiscoveryConfig& config) {
  return to_match_pairs(match_all_pairs(corpus, config), corpus, config);
}

std::vector<MatchPair> discover_serial(const std::vector<EncodedUtterance>& corpus, const DiscoveryConfig& config) {
  return to_match_pairs(match_all_pairs_serial(corpus, config), corpus, config);
}

std::vector<SweepResult> discover_sweep(const std::vector<EncodedUtterance>& corpus, const DiscoveryConfig& config,
                                        int tau_lo, int tau_hi) {
  if (tau_lo < 1 || tau_hi < tau_lo) throw InvalidArgument("tau sweep needs 1 <= lo <= hi");
  DiscoveryConfig base = config;
  base.tau = tau_lo;
  const auto raw = match_all_pairs(corpus, base);
  std::vector<SweepResult> out;
  for (int tau = tau_lo; tau <= tau_hi; ++tau) {
    DiscoveryConfig at = config;
    at.tau = tau;
    out.push_back({tau, to_match_pairs(truncate_to_tau(raw, tau), corpus, at)});
  }
  return out;
}

}  // namespace stdisc
