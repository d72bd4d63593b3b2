#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include <omp.h>

#include "oracles.hpp"
#include "stdisc/quantizer.hpp"

using namespace stdisc;

namespace {

FeatureSequence from_rows(const std::vector<std::vector<float>>& rows) {
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return {"utt", std::move(m), 0.02, 0.0};
}

std::vector<FeatureSequence> random_corpus(std::uint64_t seed, std::size_t utts, std::size_t dim) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal;
  std::vector<FeatureSequence> out;
  for (std::size_t u = 0; u < utts; ++u) {
    Matrix m(20 + rng() % 30, dim);
    const float shift = static_cast<float>(rng() % 5) * 3.0f;
    for (auto& v : m.data()) v = normal(rng) + shift;
    out.push_back({"u" + std::to_string(u), std::move(m), 0.02, 0.0});
  }
  return out;
}

std::vector<std::vector<float>> rows_of(const Matrix& m) {
  std::vector<std::vector<float>> out;
  for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("k distinct points with k clusters reproduce the points") {
  const std::vector<std::vector<float>> pts{{0, 0}, {1, 5}, {-3, 2}, {7, 7}, {2, -4}};
  const auto result = train_kmeans({from_rows(pts)}, {5, 42, 100, 1e-4});
  auto expected = pts;
  std::sort(expected.begin(), expected.end());
  CHECK(rows_of(result.codebook.centroids) == expected);
  CHECK(result.inertia_trace.back() == 0.0);
}

TEST_CASE("two clusters match the brute-force best 2-partition") {
  const std::vector<std::vector<double>> pts{{0, 0}, {0, 1}, {10, 0}, {10, 1}};
  const auto oracle = oracle::best_two_partition(pts);
  REQUIRE(oracle == std::vector<std::vector<double>>{{0, 0.5}, {10, 0.5}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto cb = train_codebook({from_rows({{0, 0}, {0, 1}, {10, 0}, {10, 1}})}, 2, seed);
    const auto got = rows_of(cb.centroids);
    REQUIRE(got.size() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
      CHECK(got[c][0] == doctest::Approx(oracle[c][0]));
      CHECK(got[c][1] == doctest::Approx(oracle[c][1]));
    }
  }
}

TEST_CASE("Lloyd iterations never increase inertia") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto result = train_kmeans(random_corpus(seed, 6, 3), {8, seed, 100, 0.0});
    for (std::size_t n = 1; n < result.inertia_trace.size(); ++n) {
      CHECK(result.inertia_trace[n] <= result.inertia_trace[n - 1]);
    }
  }
}

TEST_CASE("training is deterministic and independent of thread count") {
  const auto corpus = random_corpus(3, 10, 4);
  const auto a = train_kmeans(corpus, {10, 99, 50, 1e-4});
  const auto b = train_kmeans(corpus, {10, 99, 50, 1e-4});
  CHECK(a.codebook == b.codebook);
  CHECK(a.inertia_trace == b.inertia_trace);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto serial = train_kmeans(corpus, {10, 99, 50, 1e-4});
  omp_set_num_threads(7);
  const auto wide = train_kmeans(corpus, {10, 99, 50, 1e-4});
  omp_set_num_threads(saved);
  CHECK(serial.codebook == wide.codebook);
  CHECK(serial.inertia_trace == wide.inertia_trace);
}

TEST_CASE("trained centroids are distinct when the data allows it") {
  const auto cb = train_codebook(random_corpus(5, 8, 3), 16, 1);
  const auto rows = rows_of(cb.centroids);
  CHECK(std::adjacent_find(rows.begin(), rows.end()) == rows.end());
}

TEST_CASE("fewer frames than clusters is an invalid argument") {
  CHECK_THROWS_AS(train_codebook({from_rows({{0, 0}, {1, 1}})}, 3, 0), InvalidArgument);
  CHECK_THROWS_AS(train_codebook({from_rows({{0, 0}})}, 0, 0), InvalidArgument);
}

TEST_CASE("empty clusters are re-seeded") {
  // Duplicated points force k-means++ to reuse a frame; the empty cluster is
  // moved onto the farthest point and training still covers every point.
  const auto result = train_kmeans({from_rows({{0, 0}, {0, 0}, {0, 0}, {5, 5}})}, {3, 0, 20, 0.0});
  CHECK(result.codebook.k() == 3);
  CHECK(result.codebook.centroids.all_finite());
  CHECK(result.inertia_trace.back() == 0.0);
}

TEST_CASE("assign picks the nearest centroid") {
  Codebook cb{Matrix(8, 2)};
  for (std::size_t c = 0; c < 8; ++c) {
    cb.centroids(c, 0) = static_cast<float>(c) * 10.0f;
    cb.centroids(c, 1) = 0.0f;
  }

  SUBCASE("exact centroid") {
    Matrix f(1, 2);
    f(0, 0) = 70.0f;
    CHECK(assign(f, cb) == std::vector<std::uint32_t>{7});
  }
  SUBCASE("ties go to the lower index") {
    Codebook tie{Matrix(6, 1)};
    tie.centroids(2, 0) = -1.0f;
    tie.centroids(5, 0) = 1.0f;
    for (std::size_t c : {0, 1, 3, 4}) tie.centroids(c, 0) = 100.0f;
    Matrix f(1, 1, 0.0f);
    CHECK(assign(f, tie) == std::vector<std::uint32_t>{2});
  }
  SUBCASE("dimension mismatch") { CHECK_THROWS_AS(assign(Matrix(2, 3), cb), InvalidArgument); }
}

TEST_CASE("assign equals an exhaustive nearest-neighbour scan") {
  std::mt19937_64 rng(21);
  std::normal_distribution<float> normal;
  Codebook cb{Matrix(17, 5)};
  for (auto& v : cb.centroids.data()) v = normal(rng);
  Matrix frames(500, 5);
  for (auto& v : frames.data()) v = normal(rng);

  std::vector<std::uint32_t> expected;
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    std::uint32_t best = 0;
    double best_d = 1e300;
    for (std::size_t c = 0; c < cb.k(); ++c) {
      double d = 0;
      for (std::size_t k = 0; k < 5; ++k) d += std::pow(double(frames(t, k)) - double(cb.centroids(c, k)), 2);
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::uint32_t>(c);
      }
    }
    expected.push_back(best);
  }
  CHECK(assign(frames, cb) == expected);
  CHECK(assign_serial(frames, cb) == expected);

  SUBCASE("permuting centroids permutes labels") {
    std::vector<std::size_t> perm(cb.k());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Codebook shuffled{Matrix(cb.k(), cb.dim())};
    for (std::size_t c = 0; c < cb.k(); ++c) {
      std::copy_n(cb.centroids.row(perm[c]).begin(), cb.dim(), shuffled.centroids.row(c).begin());
    }
    const auto labels = assign(frames, shuffled);
    for (std::size_t t = 0; t < frames.rows(); ++t) CHECK(perm[labels[t]] == expected[t]);
  }
}

TEST_CASE("codebook file round-trip") {
  const auto path = std::filesystem::temp_directory_path() / "stdisc_test_codebook.dstc";
  Codebook cb{Matrix(3, 2, std::vector<float>{1, 2, 3, 4, 5, 6})};
  write_codebook(path, cb);
  CHECK(std::filesystem::file_size(path) == 4 + 8 + 24);
  CHECK(read_codebook(path) == cb);
  std::filesystem::remove(path);
}

TEST_CASE("default cluster count") { CHECK(KMeansOptions{}.k == 100); }
