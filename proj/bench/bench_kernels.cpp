// Serial reference vs OpenMP kernels: wall time and result equality.
// Usage: bench_kernels [utterances] [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "stdisc/discovery.hpp"
#include "stdisc/quantizer.hpp"
#include "stdisc/segmenter.hpp"
#include "stdisc/synth.hpp"

using namespace stdisc;

namespace {

template <typename F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool report(const char* name, double serial, double parallel, bool same) {
  std::printf("%-10s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  %s\n", name, serial, parallel,
              parallel > 0.0 ? serial / parallel : 0.0, same ? "identical" : "MISMATCH");
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t utterances = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200;
  const int threads = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();
  if (utterances < 10 || threads < 1) {
    std::fprintf(stderr, "usage: bench_kernels [utterances >= 10] [threads >= 1]\n");
    return 2;
  }
  omp_set_num_threads(threads);

  auto options = planted_term_options();
  options.n_utterances = utterances;
  const auto synth = generate_synthetic_corpus(options);
  const auto rendered = render_features(synth.corpus, options.alphabet, 16, 0.1, 1);
  const auto codebook = train_codebook(rendered.features, options.alphabet, 1);
  const auto frames = pool_frames(rendered.features);
  std::printf("%zu utterances, %zu frames, %d threads\n", utterances, frames.rows(), threads);

  bool ok = true;
  std::vector<std::uint32_t> labels_serial, labels_parallel;
  const double as = seconds([&] { labels_serial = assign_serial(frames, codebook); });
  const double ap = seconds([&] { labels_parallel = assign(frames, codebook); });
  ok &= report("assign", as, ap, labels_serial == labels_parallel);

  std::vector<EncodedUtterance> enc_serial, enc_parallel;
  const double es = seconds([&] { enc_serial = encode_corpus_serial(rendered.features, codebook); });
  const double ep = seconds([&] { enc_parallel = encode_corpus(rendered.features, codebook, {}, threads); });
  ok &= report("encode", es, ep, enc_serial == enc_parallel);

  std::vector<MatchPair> pairs_serial, pairs_parallel;
  const double ds = seconds([&] { pairs_serial = discover_serial(enc_serial, {}); });
  const double dp = seconds([&] { pairs_parallel = discover(enc_serial, {.workers = threads}); });
  ok &= report("discover", ds, dp, pairs_serial == pairs_parallel);

  return ok ? 0 : 1;
}
