#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "oracles.hpp"
#include "stdisc/aligner.hpp"

using namespace stdisc;

namespace {

using Units = std::vector<std::uint32_t>;

std::set<std::pair<std::size_t, std::size_t>> cells_of(const LocalMatch& m) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& s : m.path) out.emplace(s.i, s.j);
  return out;
}

int path_score(const LocalMatch& m, const Units& x, const Units& y, const ScoringScheme& s) {
  int score = 0;
  for (const auto& step : m.path) {
    score += step.move == Move::diag ? s.sim(x[step.i - 1], y[step.j - 1]) : -s.gap;
  }
  return score;
}

}  // namespace

TEST_CASE("empty inputs produce no matches") {
  const ScoringScheme s;
  CHECK(find_matches(Units{}, Units{}, s, 1).empty());
  CHECK(find_matches(Units{1, 2}, Units{}, s, 1).empty());
  CHECK(find_matches(Units{}, Units{3}, s, 1).empty());
}

TEST_CASE("single matching unit") {
  const ScoringScheme s;
  const Units x{7};
  const auto h = fill_scoring_matrix(x, x, s);
  CHECK(h(0, 0) == 0);
  CHECK(h(0, 1) == 0);
  CHECK(h(1, 0) == 0);
  CHECK(h(1, 1) == 1);
  const auto matches = find_matches(x, x, s, 1);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].score == 1);
  CHECK(matches[0].x_span == IndexSpan{0, 0});
}

TEST_CASE("identical short sequences align along the diagonal") {
  const ScoringScheme s;
  const Units x{4, 9, 2};
  const auto matches = find_matches(x, x, s, 3);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].score == 3);
  CHECK(matches[0].path == std::vector<PathStep>{{1, 1, Move::diag}, {2, 2, Move::diag}, {3, 3, Move::diag}});
}

TEST_CASE("insertion example") {
  const ScoringScheme s;
  const Units x{42, 80, 70, 49, 78, 56, 95, 40, 93, 1};
  const Units y{42, 80, 70, 49, 78, 81, 56, 95, 23, 93, 1};
  const auto h = fill_scoring_matrix(x, y, s);
  CHECK(h.max_value() == 7);
  const auto matches = find_matches(x, y, s, 7);
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].score == 7);
  CHECK(matches[0].x_span == IndexSpan{0, 9});
  CHECK(matches[0].y_span == IndexSpan{0, 10});
  const auto rendered = render_alignment(matches[0], x, y);
  CHECK(rendered.x_row == "42 80 70 49 78 -- 56 95 40 93 1");
  CHECK(rendered.y_row == "42 80 70 49 78 81 56 95 23 93 1");
}

TEST_CASE("disjoint alphabets never match") {
  const ScoringScheme s;
  CHECK(find_matches(Units{1, 2, 3, 4}, Units{5, 6, 7}, s, 1).empty());
  CHECK(fill_scoring_matrix(Units{1, 2, 3, 4}, Units{5, 6, 7}, s).max_value() == 0);
}

TEST_CASE("repeated occurrences are extracted separately") {
  const ScoringScheme s;
  const Units x{1, 2, 3, 9, 9, 1, 2, 3};
  const Units y{1, 2, 3};
  const auto matches = find_matches(x, y, s, 3);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].score == 3);
  CHECK(matches[1].score == 3);
  CHECK(matches[0].x_span == IndexSpan{0, 2});
  CHECK(matches[1].x_span == IndexSpan{5, 7});
}

TEST_CASE("custom substitution table") {
  ScoringScheme s;
  s.alphabet = 3;
  s.table = {2, -1, 1, -1, 2, -1, 1, -1, 2};
  s.validate();
  const auto matches = find_matches(Units{0, 1, 2}, Units{2, 1, 0}, s, 1);
  REQUIRE(!matches.empty());
  CHECK(matches[0].score == oracle::local_alignment_by_substrings(Units{0, 1, 2}, Units{2, 1, 0}, s));

  ScoringScheme bad;
  bad.alphabet = 2;
  bad.table = {1, 2, 3};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(find_matches(Units{1}, Units{1}, ScoringScheme{}, 0), InvalidArgument);
}

TEST_CASE("best score equals both oracles") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const ScoringScheme s{1 + static_cast<int>(rng() % 2), -1 - static_cast<int>(rng() % 2),
                          static_cast<int>(rng() % 3), {}, 0};
    const auto x = oracle::random_units(rng, rng() % 6, 3);
    const auto y = oracle::random_units(rng, rng() % 6, 3);
    const int expected = oracle::local_alignment_by_enumeration(x, y, s);
    CHECK(fill_scoring_matrix(x, y, s).max_value() == expected);
    CHECK(oracle::local_alignment_by_substrings(x, y, s) == expected);
  }
  for (int trial = 0; trial < 200; ++trial) {
    const ScoringScheme s;
    const auto x = oracle::random_units(rng, 1 + rng() % 20, 4);
    const auto y = oracle::random_units(rng, 1 + rng() % 20, 4);
    CHECK(fill_scoring_matrix(x, y, s).max_value() == oracle::local_alignment_by_substrings(x, y, s));
  }
}

TEST_CASE("extracted matches are consistent") {
  std::mt19937_64 rng(55);
  const ScoringScheme s;
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = oracle::random_units(rng, 5 + rng() % 40, 5);
    const auto y = oracle::random_units(rng, 5 + rng() % 40, 5);
    const int tau = 2 + static_cast<int>(rng() % 3);
    const auto matches = find_matches(x, y, s, tau);

    std::set<std::pair<std::size_t, std::size_t>> used;
    int previous = std::numeric_limits<int>::max();
    for (const auto& m : matches) {
      CHECK(m.score >= tau);
      CHECK(m.score <= previous);
      previous = m.score;
      CHECK(path_score(m, x, y, s) == m.score);
      CHECK(m.score <= static_cast<int>(std::min(m.x_span.end - m.x_span.start, m.y_span.end - m.y_span.start) + 1) *
                           s.match);
      REQUIRE(!m.path.empty());
      CHECK(m.path.front().move == Move::diag);
      CHECK(m.x_span.start + 1 == m.path.front().i);
      CHECK(m.x_span.end + 1 == m.path.back().i);
      for (const auto& cell : cells_of(m)) CHECK(used.insert(cell).second);
    }

    SUBCASE("higher thresholds give a prefix") {
      const auto stricter = find_matches(x, y, s, tau + 2);
      REQUIRE(stricter.size() <= matches.size());
      CHECK(std::equal(stricter.begin(), stricter.end(), matches.begin()));
    }
  }
}

TEST_CASE("swapping the inputs preserves the best match") {
  std::mt19937_64 rng(9);
  const ScoringScheme s;
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = oracle::random_units(rng, 3 + rng() % 25, 4);
    const auto y = oracle::random_units(rng, 3 + rng() % 25, 4);
    const auto a = find_matches(x, y, s, 2);
    const auto b = find_matches(y, x, s, 2);
    REQUIRE(a.empty() == b.empty());
    if (a.empty()) continue;
    CHECK(a[0].score == b[0].score);
    // The end cell is only pinned down when the best score is attained once.
    const auto h = fill_scoring_matrix(x, y, s);
    std::size_t best_cells = 0;
    for (std::size_t i = 0; i < h.rows(); ++i) {
      for (std::size_t j = 0; j < h.cols(); ++j) best_cells += h(i, j) == a[0].score ? 1 : 0;
    }
    if (best_cells != 1) continue;
    CHECK(a[0].x_span.end == b[0].y_span.end);
    CHECK(a[0].y_span.end == b[0].x_span.end);
  }
}

TEST_CASE("self alignment with the lower triangle masked") {
  const ScoringScheme s;
  const Units x{1, 2, 3, 4, 5, 6, 7, 8, 1, 2, 3, 4, 5, 6, 7, 8};
  const auto matches = find_matches(x, x, s, 4, {true});
  REQUIRE(matches.size() == 1);
  CHECK(matches[0].score == 8);
  CHECK(matches[0].x_span == IndexSpan{0, 7});
  CHECK(matches[0].y_span == IndexSpan{8, 15});
  for (const auto& step : matches[0].path) CHECK(step.j > step.i);
  CHECK(find_matches(Units{5, 6, 7}, Units{5, 6, 7}, s, 1, {true}).empty());
}

TEST_CASE("restricted rescoring equals a full recomputation") {
  std::mt19937_64 rng(77);
  const ScoringScheme s;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = oracle::random_units(rng, 5 + rng() % 40, 4);
    const auto y = oracle::random_units(rng, 5 + rng() % 40, 4);
    auto fast = fill_scoring_matrix(x, y, s);
    auto reference = fast;
    while (auto match = traceback(fast, x, y, s, 2)) {
      const auto [row0, col0] = pin_path(fast, *match);
      rescore_region(fast, x, y, s, row0, col0);
      pin_path(reference, *match);
      rescore_full(reference, x, y, s);
      REQUIRE(fast.same_values(reference));
    }
  }
}
