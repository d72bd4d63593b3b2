#include "stdisc/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <random>
#include <tuple>

namespace stdisc {

namespace {

std::uint32_t draw(std::mt19937_64& rng, std::uint32_t n) {
  return static_cast<std::uint32_t>(rng() % n);
}

std::uint32_t draw_except(std::mt19937_64& rng, std::uint32_t alphabet, std::optional<std::uint32_t> a,
                          std::optional<std::uint32_t> b) {
  while (true) {
    const auto u = draw(rng, alphabet);
    if (u != a && u != b) return u;
  }
}

struct Placement {
  std::size_t word;
  std::size_t position;
};

}  // namespace

std::vector<std::uint32_t> random_word(std::uint64_t seed, std::size_t length, std::uint32_t alphabet) {
  if (alphabet < 2) throw InvalidArgument("alphabet must have at least two units");
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> word;
  for (std::size_t n = 0; n < length; ++n) {
    word.push_back(draw_except(rng, alphabet, word.empty() ? std::nullopt : std::optional(word.back()), std::nullopt));
  }
  return word;
}

SyntheticCorpus generate_synthetic_corpus(const SynthOptions& options) {
  if (options.alphabet < 3) throw InvalidArgument("alphabet must have at least three units");
  if (options.utterance_len == 0) throw InvalidArgument("utterance length must be positive");
  if (options.min_frames == 0 || options.max_frames < options.min_frames) {
    throw InvalidArgument("segment frame range must satisfy 1 <= min <= max");
  }
  if (options.n_speakers == 0) throw InvalidArgument("need at least one speaker");

  std::vector<std::vector<Placement>> plan(options.n_utterances);
  std::mt19937_64 rng(options.seed);

  for (std::size_t w = 0; w < options.planted.size(); ++w) {
    const auto& word = options.planted[w];
    if (word.units.empty() || word.units.size() > options.utterance_len) {
      throw InvalidArgument("planted word " + std::to_string(w) + " does not fit an utterance");
    }
    for (auto u : word.units) {
      if (u >= options.alphabet) throw InvalidArgument("planted word uses a unit outside the alphabet");
    }
    for (std::size_t utt : word.utterances) {
      if (utt >= options.n_utterances) throw InvalidArgument("planted word targets a missing utterance");
      const std::size_t slots = options.utterance_len - word.units.size() + 1;
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        const std::size_t pos = rng() % slots;
        const bool clash = std::any_of(plan[utt].begin(), plan[utt].end(), [&](const Placement& p) {
          const std::size_t len = options.planted[p.word].units.size();
          return pos < p.position + len && p.position < pos + word.units.size();
        });
        if (!clash) {
          plan[utt].push_back({w, pos});
          placed = true;
        }
      }
      if (!placed) {
        throw InvalidArgument("cannot place planted word " + std::to_string(w) + " in utterance " +
                              std::to_string(utt));
      }
    }
  }

  SyntheticCorpus out;
  for (std::size_t utt = 0; utt < options.n_utterances; ++utt) {
    // Fixed (planted) units first, then background around them.
    std::vector<std::optional<std::uint32_t>> fixed(options.utterance_len);
    auto placements = plan[utt];
    std::sort(placements.begin(), placements.end(),
              [](const Placement& l, const Placement& r) { return l.position < r.position; });
    for (const auto& p : placements) {
      const auto& word = options.planted[p.word];
      std::bernoulli_distribution substitute(word.substitution_prob);
      for (std::size_t n = 0; n < word.units.size(); ++n) {
        std::uint32_t u = word.units[n];
        if (word.substitution_prob > 0.0 && substitute(rng)) u = draw_except(rng, options.alphabet, u, std::nullopt);
        fixed[p.position + n] = u;
      }
    }
    std::vector<std::uint32_t> units(options.utterance_len);
    for (std::size_t n = 0; n < units.size(); ++n) {
      if (fixed[n]) {
        units[n] = *fixed[n];
        continue;
      }
      const auto prev = n > 0 ? std::optional(units[n - 1]) : std::nullopt;
      const auto next = n + 1 < units.size() ? fixed[n + 1] : std::nullopt;
      units[n] = draw_except(rng, options.alphabet, prev, next);
    }

    char id[64];
    std::snprintf(id, sizeof id, "s%02zu_u%03zu", utt % options.n_speakers, utt);
    EncodedUtterance enc{id, {}, options.frame_period, 0.0};
    std::uint32_t frame = 0;
    const std::uint32_t span = options.max_frames - options.min_frames + 1;
    for (auto u : units) {
      const std::uint32_t len = options.min_frames + draw(rng, span);
      enc.segments.push_back({frame, frame + len - 1, u});
      frame += len;
    }
    for (const auto& p : placements) {
      const std::size_t last = p.position + options.planted[p.word].units.size() - 1;
      out.truth.push_back({p.word, utt, p.position, last, enc.segments[p.position].a * options.frame_period,
                           (enc.segments[last].b + 1.0) * options.frame_period});
    }
    out.corpus.push_back(std::move(enc));
  }
  std::sort(out.truth.begin(), out.truth.end(), [](const PlantedOccurrence& l, const PlantedOccurrence& r) {
    return std::tie(l.word, l.utterance) < std::tie(r.word, r.utterance);
  });
  return out;
}

PhoneAlignment alignment_from_units(const std::vector<EncodedUtterance>& corpus) {
  PhoneAlignment out;
  for (const auto& enc : corpus) {
    for (const auto& s : enc.segments) {
      out.push_back({enc.utterance_id, enc.offset + s.a * enc.frame_period,
                     enc.offset + (s.b + 1.0) * enc.frame_period, "u" + std::to_string(s.unit)});
    }
  }
  return out;
}

VadTable vad_from_units(const std::vector<EncodedUtterance>& corpus) {
  VadTable out;
  for (const auto& enc : corpus) {
    if (enc.segments.empty()) continue;
    out.push_back({enc.utterance_id, enc.offset, enc.offset + static_cast<double>(enc.frame_count()) * enc.frame_period});
  }
  return out;
}

RenderedFeatures render_features(const std::vector<EncodedUtterance>& corpus, std::uint32_t alphabet,
                                 std::size_t dim, double noise, std::uint64_t seed) {
  if (dim == 0) throw InvalidArgument("feature dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RenderedFeatures out;
  out.centroids.centroids = Matrix(alphabet, dim);
  for (auto& v : out.centroids.centroids.data()) v = static_cast<float>(normal(rng));

  for (const auto& enc : corpus) {
    Matrix frames(enc.frame_count(), dim);
    for (const auto& s : enc.segments) {
      if (s.unit >= alphabet) throw InvalidArgument("unit outside the alphabet in '" + enc.utterance_id + "'");
      const auto center = out.centroids.centroids.row(s.unit);
      for (std::uint32_t t = s.a; t <= s.b; ++t) {
        auto row = frames.row(t);
        for (std::size_t d = 0; d < dim; ++d) row[d] = static_cast<float>(center[d] + noise * normal(rng));
      }
    }
    out.features.push_back({enc.utterance_id, std::move(frames), enc.frame_period, enc.offset});
  }
  return out;
}

SynthOptions planted_term_options(std::uint64_t seed) {
  SynthOptions options;
  options.seed = seed;
  options.n_utterances = 50;
  options.utterance_len = 60;
  options.alphabet = 100;
  options.n_speakers = 5;
  PlantedWord word;
  word.units = random_word(seed ^ 0x5eedULL, 12, options.alphabet);
  for (std::size_t u = 0; u < 10; ++u) word.utterances.push_back(u);
  options.planted.push_back(std::move(word));
  return options;
}

}  // namespace stdisc
