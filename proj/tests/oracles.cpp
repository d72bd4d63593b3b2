#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>

namespace stdisc::oracle {

namespace {

int global_score(const std::vector<std::uint32_t>& x, std::size_t x0, std::size_t x1,
                 const std::vector<std::uint32_t>& y, std::size_t y0, std::size_t y1, const ScoringScheme& s) {
  const std::size_t n = x1 - x0;
  const std::size_t m = y1 - y0;
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) d[i][0] = -static_cast<int>(i) * s.gap;
  for (std::size_t j = 1; j <= m; ++j) d[0][j] = -static_cast<int>(j) * s.gap;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      d[i][j] = std::max({d[i - 1][j - 1] + s.sim(x[x0 + i - 1], y[y0 + j - 1]), d[i - 1][j] - s.gap,
                          d[i][j - 1] - s.gap});
    }
  }
  return d[n][m];
}

}  // namespace

int local_alignment_by_substrings(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y,
                                  const ScoringScheme& scheme) {
  int best = 0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t b = a + 1; b <= x.size(); ++b) {
      for (std::size_t c = 0; c < y.size(); ++c) {
        for (std::size_t d = c + 1; d <= y.size(); ++d) {
          best = std::max(best, global_score(x, a, b, y, c, d, scheme));
        }
      }
    }
  }
  return best;
}

int local_alignment_by_enumeration(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y,
                                   const ScoringScheme& scheme) {
  int best = 0;
  std::function<void(std::size_t, std::size_t, int)> explore = [&](std::size_t i, std::size_t j, int score) {
    best = std::max(best, score);
    if (i < x.size() && j < y.size()) explore(i + 1, j + 1, score + scheme.sim(x[i], y[j]));
    if (i < x.size()) explore(i + 1, j, score - scheme.gap);
    if (j < y.size()) explore(i, j + 1, score - scheme.gap);
  };
  for (std::size_t a = 0; a < x.size(); ++a) {
    for (std::size_t c = 0; c < y.size(); ++c) explore(a, c, 0);
  }
  return best;
}

double brute_force_segmentation_cost(const Matrix& frames, const Codebook& codebook, double gamma) {
  const std::size_t t_count = frames.rows();
  const std::size_t k = codebook.k();
  auto dist = [&](std::size_t t, std::size_t c) {
    double acc = 0.0;
    for (std::size_t d = 0; d < frames.cols(); ++d) {
      const double diff = static_cast<double>(frames(t, d)) - static_cast<double>(codebook.centroids(c, d));
      acc += diff * diff;
    }
    return std::sqrt(acc);
  };

  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t masks = 1u << (t_count - 1);
  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    // Bit t set => a segment boundary between frame t and t + 1.
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t start = 0;
    for (std::size_t t = 0; t + 1 < t_count; ++t) {
      if (mask & (1u << t)) {
        spans.emplace_back(start, t);
        start = t + 1;
      }
    }
    spans.emplace_back(start, t_count - 1);

    // Every assignment of a unit to each segment.
    std::vector<std::size_t> units(spans.size(), 0);
    while (true) {
      double cost = 0.0;
      for (std::size_t n = 0; n < spans.size(); ++n) {
        for (std::size_t t = spans[n].first; t <= spans[n].second; ++t) cost += dist(t, units[n]);
        cost -= gamma * static_cast<double>(spans[n].second - spans[n].first);
      }
      best = std::min(best, cost);
      std::size_t pos = 0;
      while (pos < units.size() && ++units[pos] == k) units[pos++] = 0;
      if (pos == units.size()) break;
    }
  }
  return best;
}

std::size_t naive_levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const std::size_t sub = go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1);
    return std::min({sub, go(i + 1, j) + 1, go(i, j + 1) + 1});
  };
  return go(0, 0);
}

double sweep_line_coverage(const std::vector<MatchPair>& pairs, const VadTable& vad) {
  struct Spans {
    std::vector<std::pair<Ticks, Ticks>> speech;
    std::vector<std::pair<Ticks, Ticks>> found;
  };
  std::map<std::string, Spans> by_key;
  Ticks total = 0;
  for (const auto& e : vad) {
    by_key[e.utterance_id].speech.emplace_back(to_ticks(e.start), to_ticks(e.end));
    total += to_ticks(e.end) - to_ticks(e.start);
  }
  for (const auto& p : pairs) {
    for (const auto* f : {&p.a, &p.b}) {
      std::string key = f->utterance_id;
      if (!by_key.contains(key)) key = recording_of(key);
      if (!by_key.contains(key)) continue;
      by_key[key].found.emplace_back(to_ticks(f->start), to_ticks(f->end));
    }
  }

  Ticks covered = 0;
  for (const auto& [key, spans] : by_key) {
    // +1/-1 events for each kind; an elementary interval counts when both
    // running counters are positive.
    std::map<Ticks, std::pair<int, int>> events;
    for (const auto& [s, e] : spans.speech) {
      events[s].first += 1;
      events[e].first -= 1;
    }
    for (const auto& [s, e] : spans.found) {
      events[s].second += 1;
      events[e].second -= 1;
    }
    int in_speech = 0;
    int in_found = 0;
    Ticks prev = 0;
    for (const auto& [point, delta] : events) {
      if (in_speech > 0 && in_found > 0) covered += point - prev;
      in_speech += delta.first;
      in_found += delta.second;
      prev = point;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(total);
}

std::vector<std::vector<double>> best_two_partition(const std::vector<std::vector<double>>& points) {
  const std::size_t n = points.size();
  const std::size_t dim = points.front().size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_centroids;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<std::vector<double>> centroids(2, std::vector<double>(dim, 0.0));
    std::array<int, 2> counts{0, 0};
    for (std::size_t p = 0; p < n; ++p) {
      const int side = (mask >> p) & 1u;
      ++counts[side];
      for (std::size_t d = 0; d < dim; ++d) centroids[side][d] += points[p][d];
    }
    for (int side = 0; side < 2; ++side) {
      for (auto& v : centroids[side]) v /= counts[side];
    }
    double sse = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const int side = (mask >> p) & 1u;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = points[p][d] - centroids[side][d];
        sse += diff * diff;
      }
    }
    if (sse < best) {
      best = sse;
      best_centroids = centroids;
    }
  }
  std::sort(best_centroids.begin(), best_centroids.end());
  return best_centroids;
}

}  // namespace stdisc::oracle
