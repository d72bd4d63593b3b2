#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>
#include <openssl/evp.h>

#include "stdisc/corpus_io.hpp"
#include "stdisc/discovery.hpp"
#include "stdisc/eval.hpp"
#include "stdisc/quantizer.hpp"
#include "stdisc/segmenter.hpp"
#include "stdisc/synth.hpp"

namespace stdisc::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    static constexpr char kHex[] = "0123456789abcdef";
    hex << kHex[digest[i] >> 4] << kHex[digest[i] & 15];
  }
  return hex.str();
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

/// Collects what one command read, wrote and how long each stage took, then
/// merges it into `manifest.json` of the output directory (one per directory,
/// one section per command).
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  json& config() { return config_; }
  void input(const fs::path& p) { inputs_[p.string()] = sha256_file(p); }
  void output(const fs::path& p) { outputs_[p.string()] = sha256_file(p); }
  void timing(const std::string& stage, double seconds) { timings_[stage] = seconds; }

  void write(const fs::path& dir) const {
    const fs::path path = (dir.empty() ? fs::path(".") : dir) / "manifest.json";
    json doc = json::object();
    if (fs::exists(path)) {
      std::ifstream in(path);
      doc = json::parse(in, nullptr, false);
      if (doc.is_discarded() || !doc.is_object()) doc = json::object();
    }
    doc["tool"] = "stdisc";
    doc["version"] = kToolVersion;
    doc["runs"][command_] = {{"config", config_}, {"inputs", inputs_}, {"outputs", outputs_}, {"timings", timings_}};
    std::ofstream out(path, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }

 private:
  std::string command_;
  json config_ = json::object();
  json inputs_ = json::object();
  json outputs_ = json::object();
  json timings_ = json::object();
};

fs::path parent_dir(const fs::path& file) { return file.parent_path(); }

void ensure_parent(const fs::path& file) {
  if (const auto dir = file.parent_path(); !dir.empty()) fs::create_directories(dir);
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw InvalidArgument(what + " not found: " + p.string());
}

int set_threads(int workers) {
  if (workers < 0) throw InvalidArgument("--workers must be non-negative");
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  omp_set_num_threads(threads);
  return threads;
}

struct TauRange {
  int lo = kDefaultTau;
  int hi = kDefaultTau;
  bool sweep = false;
};

TauRange parse_tau(const std::string& text) {
  TauRange r;
  try {
    if (const auto colon = text.find(':'); colon != std::string::npos) {
      std::size_t used = 0;
      r.lo = std::stoi(text.substr(0, colon), &used);
      if (used != colon) throw InvalidArgument("");
      const auto rest = text.substr(colon + 1);
      r.hi = std::stoi(rest, &used);
      if (used != rest.size()) throw InvalidArgument("");
      r.sweep = true;
    } else {
      std::size_t used = 0;
      r.lo = r.hi = std::stoi(text, &used);
      if (used != text.size()) throw InvalidArgument("");
    }
  } catch (const std::exception&) {
    throw InvalidArgument("--tau expects INT or LO:HI, got '" + text + "'");
  }
  if (r.lo < 1 || r.hi < r.lo) throw InvalidArgument("--tau needs 1 <= LO <= HI");
  return r;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string features, out;
  std::size_t k = 100;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double rel_tol = 1e-4;
  int workers = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  Manifest manifest("train");
  Stopwatch clock;
  require_file(a.features, "feature archive");
  const auto features = read_feature_archive(a.features);
  manifest.timing("read", clock.lap());
  if (a.k == 0) throw InvalidArgument("--k must be at least 1");
  const Matrix pooled = pool_frames(features);
  if (pooled.rows() < a.k) {
    throw InvalidArgument("--k " + std::to_string(a.k) + " exceeds the " + std::to_string(pooled.rows()) +
                          " pooled frames");
  }
  set_threads(a.workers);
  const auto result = train_kmeans(pooled, {a.k, a.seed, a.max_iters, a.rel_tol});
  manifest.timing("train", clock.lap());

  ensure_parent(a.out);
  write_codebook(a.out, result.codebook);
  manifest.config() = {{"k", a.k}, {"seed", a.seed}, {"max_iters", a.max_iters}, {"rel_tol", a.rel_tol}};
  manifest.input(a.features);
  manifest.output(a.out);
  manifest.timing("write", clock.lap());
  manifest.write(parent_dir(a.out));
  out << "trained " << a.k << " centroids on " << pooled.rows() << " frames in " << result.iterations
      << " iterations (inertia " << result.inertia_trace.back() << ")\n";
  return kExitOk;
}

struct EncodeArgs {
  std::string features, codebook, out;
  double gamma = kDefaultGamma;
  std::size_t max_segment_frames = 0;
  int workers = 0;
};

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  Manifest manifest("encode");
  Stopwatch clock;
  require_file(a.features, "feature archive");
  require_file(a.codebook, "codebook");
  if (!(a.gamma >= 0.0)) throw InvalidArgument("--gamma must be non-negative");
  const auto features = read_feature_archive(a.features);
  const auto codebook = read_codebook(a.codebook);
  manifest.timing("read", clock.lap());

  const int threads = set_threads(a.workers);
  const auto corpus = encode_corpus(features, codebook, {a.gamma, a.max_segment_frames}, threads);
  manifest.timing("segment", clock.lap());

  ensure_parent(a.out);
  write_units(a.out, corpus);
  manifest.config() = {{"gamma", a.gamma}, {"max_segment_frames", a.max_segment_frames}};
  manifest.input(a.features);
  manifest.input(a.codebook);
  manifest.output(a.out);
  manifest.timing("write", clock.lap());
  manifest.write(parent_dir(a.out));

  std::size_t segments = 0, frames = 0;
  for (const auto& enc : corpus) {
    segments += enc.segments.size();
    frames += enc.frame_count();
  }
  out << "encoded " << corpus.size() << " utterances: " << frames << " frames into " << segments << " segments\n";
  return kExitOk;
}

struct DiscoverArgs {
  std::string units, out, tau = std::to_string(kDefaultTau);
  double min_duration = kDefaultMinDuration;
  int workers = 0;
  int match = 1, mismatch = -1, gap = 1;
  bool self_pairs = false;
  bool either = false;
  bool quiet = false;
};

std::string tau_file(int tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "pairs_tau%02d.txt", tau);
  return buf;
}

int cmd_discover(const DiscoverArgs& a, std::ostream& out, std::ostream& err) {
  Manifest manifest("discover");
  Stopwatch clock;
  require_file(a.units, "unit file");
  const auto tau = parse_tau(a.tau);
  if (!(a.min_duration >= 0.0)) throw InvalidArgument("--min-dur must be non-negative");
  DiscoveryConfig config;
  config.tau = tau.lo;
  config.min_duration = a.min_duration;
  config.scheme.match = a.match;
  config.scheme.mismatch = a.mismatch;
  config.scheme.gap = a.gap;
  config.distinct_only = !a.self_pairs;
  config.filter_both = !a.either;
  config.workers = set_threads(a.workers);
  config.validate();
  if (!a.quiet) {
    config.on_progress = [&err](std::size_t done, std::size_t total) {
      const std::size_t step = std::max<std::size_t>(1, total / 20);
      if (done % step == 0 || done == total) {
        err << "\rdiscover: " << done << "/" << total << " pairs" << (done == total ? "\n" : "") << std::flush;
      }
    };
  }
  const auto corpus = read_units(a.units);
  manifest.timing("read", clock.lap());

  manifest.config() = {{"tau", tau.sweep ? json(a.tau) : json(tau.lo)},     {"min_duration", a.min_duration}, {"match", a.match},
                       {"mismatch", a.mismatch}, {"gap", a.gap},           {"self_pairs", a.self_pairs},
                       {"filter_either", a.either}};
  manifest.input(a.units);

  if (!tau.sweep) {
    const auto pairs = discover(corpus, config);
    manifest.timing("discover", clock.lap());
    ensure_parent(a.out);
    write_pairs(a.out, pairs);
    manifest.output(a.out);
    manifest.timing("write", clock.lap());
    manifest.write(parent_dir(a.out));
    out << "discovered " << pairs.size() << " pairs at tau " << tau.lo << "\n";
    return kExitOk;
  }

  const auto sweep = discover_sweep(corpus, config, tau.lo, tau.hi);
  manifest.timing("discover", clock.lap());
  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::ofstream summary(dir / "sweep.csv", std::ios::trunc);
  summary << "tau,pairs,file\n";
  for (const auto& s : sweep) {
    const auto path = dir / tau_file(s.tau);
    write_pairs(path, s.pairs);
    manifest.output(path);
    summary << s.tau << ',' << s.pairs.size() << ',' << tau_file(s.tau) << '\n';
    out << "tau " << s.tau << ": " << s.pairs.size() << " pairs\n";
  }
  summary.close();
  if (!summary) throw std::runtime_error("cannot write sweep summary");
  manifest.output(dir / "sweep.csv");
  manifest.timing("write", clock.lap());
  manifest.write(dir);
  return kExitOk;
}

struct ScoreArgs {
  std::string pairs, alignments, vad, out, histogram;
  std::string speaker_delim = "_";
  double bin_width = 0.1;
};

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  require_file(a.pairs, "pair file");
  require_file(a.alignments, "phone alignment");
  require_file(a.vad, "VAD table");
  if (a.speaker_delim.size() != 1) throw InvalidArgument("--speaker-delim must be one character");
  if (!(a.bin_width > 0.0)) throw InvalidArgument("--bin-width must be positive");
  const auto pairs = read_pairs(a.pairs);
  const auto alignment = read_alignment(a.alignments);
  const auto vad = read_vad(a.vad);
  const auto report = score(pairs, alignment, vad, speaker_prefix(a.speaker_delim[0]), a.bin_width);

  write_summary(out, report);
  if (!a.out.empty()) {
    ensure_parent(a.out);
    std::ofstream csv(a.out, std::ios::trunc);
    write_report_csv(csv, report);
    if (!csv) throw std::runtime_error("cannot write " + a.out);
  }
  if (!a.histogram.empty()) {
    ensure_parent(a.histogram);
    std::ofstream csv(a.histogram, std::ios::trunc);
    write_histogram_csv(csv, report.durations);
    if (!csv) throw std::runtime_error("cannot write " + a.histogram);
  }
  return kExitOk;
}

struct SynthArgs {
  std::string out_dir;
  std::uint64_t seed = 2024;
  std::size_t utterances = 50, length = 60, speakers = 5, word_len = 12, word_count = 10, words = 1, dim = 16;
  std::uint32_t alphabet = 100, min_frames = 1, max_frames = 4;
  double subst = 0.0, noise = 0.1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.word_count > a.utterances) throw InvalidArgument("--word-count exceeds --utterances");
  SynthOptions options;
  options.seed = a.seed;
  options.n_utterances = a.utterances;
  options.utterance_len = a.length;
  options.alphabet = a.alphabet;
  options.n_speakers = a.speakers;
  options.min_frames = a.min_frames;
  options.max_frames = a.max_frames;
  for (std::size_t w = 0; w < a.words; ++w) {
    PlantedWord word;
    word.units = random_word(a.seed ^ (0x5eedULL + w), a.word_len, a.alphabet);
    for (std::size_t u = 0; u < a.word_count; ++u) word.utterances.push_back((u + w * a.word_count) % a.utterances);
    word.substitution_prob = a.subst;
    options.planted.push_back(std::move(word));
  }
  const auto synth = generate_synthetic_corpus(options);
  const auto rendered = render_features(synth.corpus, a.alphabet, a.dim, a.noise, a.seed + 1);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  Manifest manifest("synth");
  manifest.config() = {{"seed", a.seed},         {"utterances", a.utterances}, {"length", a.length},
                       {"alphabet", a.alphabet}, {"speakers", a.speakers},     {"word_len", a.word_len},
                       {"word_count", a.word_count}, {"words", a.words},      {"subst", a.subst},
                       {"dim", a.dim},           {"noise", a.noise}};
  write_units(dir / "units.txt", synth.corpus);
  write_feature_archive(dir / "features.dstf", rendered.features);
  write_alignment(dir / "alignments.csv", alignment_from_units(synth.corpus));
  write_vad(dir / "vad.csv", vad_from_units(synth.corpus));
  {
    std::ofstream truth(dir / "truth.csv", std::ios::trunc);
    truth << "word,utterance_id,first_segment,last_segment,start,end\n";
    for (const auto& t : synth.truth) {
      truth << t.word << ',' << synth.corpus[t.utterance].utterance_id << ',' << t.first_segment << ','
            << t.last_segment << ',' << format_time(t.start) << ',' << format_time(t.end) << '\n';
    }
  }
  for (const char* name : {"units.txt", "features.dstf", "alignments.csv", "vad.csv", "truth.csv"}) {
    manifest.output(dir / name);
  }
  manifest.write(dir);
  out << "wrote synthetic corpus of " << synth.corpus.size() << " utterances with " << synth.truth.size()
      << " planted occurrences to " << dir.string() << "\n";
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> pairs;
  std::string out, histogram;
  std::string speaker_delim = "_";
  double bin_width = 0.1;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  if (a.speaker_delim.size() != 1) throw InvalidArgument("--speaker-delim must be one character");
  if (!(a.bin_width > 0.0)) throw InvalidArgument("--bin-width must be positive");
  std::vector<std::pair<std::string, std::vector<MatchPair>>> inputs;
  for (const auto& p : a.pairs) {
    require_file(p, "pair file");
    inputs.emplace_back(p, read_pairs(p));
  }
  std::ostringstream table;
  table << "pairs_file,pairs,within_speaker,across_speaker,mean_duration,max_duration\n";
  std::ostringstream hist;
  hist << "pairs_file,bin_start,bin_end,count\n";
  for (const auto& [path, pairs] : inputs) {
    const auto speakers = speaker_report(pairs, speaker_prefix(a.speaker_delim[0]));
    const auto durations = duration_report(pairs, a.bin_width);
    table << path << ',' << pairs.size() << ',' << speakers.within << ',' << speakers.across << ','
          << format_time(durations.mean) << ',' << format_time(durations.max) << '\n';
    for (std::size_t n = 0; n < durations.counts.size(); ++n) {
      hist << path << ',' << format_time(static_cast<double>(n) * a.bin_width) << ','
           << format_time(static_cast<double>(n + 1) * a.bin_width) << ',' << durations.counts[n] << '\n';
    }
  }
  out << table.str();
  if (!a.out.empty()) {
    ensure_parent(a.out);
    std::ofstream f(a.out, std::ios::trunc);
    f << table.str();
    if (!f) throw std::runtime_error("cannot write " + a.out);
  }
  if (!a.histogram.empty()) {
    ensure_parent(a.histogram);
    std::ofstream f(a.histogram, std::ios::trunc);
    f << hist.str();
    if (!f) throw std::runtime_error("cannot write " + a.histogram);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spoken-term discovery over discrete speech units", "stdisc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  app.set_config("--config", "", "Optional key=value config file; flags take precedence");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a k-means codebook on a feature archive");
  train_cmd->add_option("--features", train.features, "DSTF feature archive")->required();
  train_cmd->add_option("--k", train.k, "Number of clusters")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "k-means++ seed")->capture_default_str();
  train_cmd->add_option("--max-iters", train.max_iters, "Lloyd iteration budget")->capture_default_str();
  train_cmd->add_option("--rel-tol", train.rel_tol, "Relative inertia improvement to stop")->capture_default_str();
  train_cmd->add_option("--workers", train.workers, "Threads (0 = all)")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Output DSTC codebook")->required();

  EncodeArgs encode;
  auto* encode_cmd = app.add_subcommand("encode", "Quantise and segment features into unit sequences");
  encode_cmd->add_option("--features", encode.features, "DSTF feature archive")->required();
  encode_cmd->add_option("--codebook", encode.codebook, "DSTC codebook")->required();
  encode_cmd->add_option("--gamma", encode.gamma, "Duration weight")->capture_default_str();
  encode_cmd->add_option("--max-seg-frames", encode.max_segment_frames, "Segment length cap (0 = none)")
      ->capture_default_str();
  encode_cmd->add_option("--workers", encode.workers, "Threads (0 = all)")->capture_default_str();
  encode_cmd->add_option("--out", encode.out, "Output unit file")->required();

  DiscoverArgs disc;
  auto* discover_cmd = app.add_subcommand("discover", "Find matching fragments across all utterance pairs");
  discover_cmd->add_option("--units", disc.units, "Unit file")->required();
  discover_cmd->add_option("--tau", disc.tau, "Similarity threshold, or LO:HI for a sweep")->capture_default_str();
  discover_cmd->add_option("--min-dur", disc.min_duration, "Minimum fragment duration in seconds")
      ->capture_default_str();
  discover_cmd->add_option("--workers", disc.workers, "Threads (0 = all)")->capture_default_str();
  discover_cmd->add_option("--match", disc.match, "Score for equal units")->capture_default_str();
  discover_cmd->add_option("--mismatch", disc.mismatch, "Score for different units")->capture_default_str();
  discover_cmd->add_option("--gap", disc.gap, "Gap penalty")->capture_default_str();
  discover_cmd->add_flag("--self-pairs", disc.self_pairs, "Also search within each utterance");
  discover_cmd->add_flag("--filter-either", disc.either, "Drop a match only if both fragments are short");
  discover_cmd->add_flag("--quiet", disc.quiet, "No progress on stderr");
  discover_cmd->add_option("--out", disc.out, "Class file, or a directory when sweeping")->required();

  ScoreArgs sc;
  auto* score_cmd = app.add_subcommand("score", "Compute coverage, NED and pair statistics");
  score_cmd->add_option("--pairs", sc.pairs, "Class file")->required();
  score_cmd->add_option("--alignments", sc.alignments, "Phone alignment CSV")->required();
  score_cmd->add_option("--vad", sc.vad, "VAD CSV")->required();
  score_cmd->add_option("--speaker-delim", sc.speaker_delim, "Speaker prefix delimiter")->capture_default_str();
  score_cmd->add_option("--bin-width", sc.bin_width, "Duration histogram bin width")->capture_default_str();
  score_cmd->add_option("--out", sc.out, "Metrics CSV");
  score_cmd->add_option("--histogram", sc.histogram, "Duration histogram CSV");

  SynthArgs syn;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with planted words");
  synth_cmd->add_option("--out-dir", syn.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", syn.seed)->capture_default_str();
  synth_cmd->add_option("--utterances", syn.utterances)->capture_default_str();
  synth_cmd->add_option("--length", syn.length, "Units per utterance")->capture_default_str();
  synth_cmd->add_option("--alphabet", syn.alphabet)->capture_default_str();
  synth_cmd->add_option("--speakers", syn.speakers)->capture_default_str();
  synth_cmd->add_option("--words", syn.words, "Number of planted words")->capture_default_str();
  synth_cmd->add_option("--word-len", syn.word_len)->capture_default_str();
  synth_cmd->add_option("--word-count", syn.word_count, "Utterances receiving each word")->capture_default_str();
  synth_cmd->add_option("--subst", syn.subst, "Per-unit substitution probability")->capture_default_str();
  synth_cmd->add_option("--min-frames", syn.min_frames)->capture_default_str();
  synth_cmd->add_option("--max-frames", syn.max_frames)->capture_default_str();
  synth_cmd->add_option("--dim", syn.dim, "Feature dimension")->capture_default_str();
  synth_cmd->add_option("--noise", syn.noise, "Feature noise standard deviation")->capture_default_str();

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Speaker composition and duration distribution of pair files");
  report_cmd->add_option("--pairs", rep.pairs, "Class files")->required();
  report_cmd->add_option("--bin-width", rep.bin_width)->capture_default_str();
  report_cmd->add_option("--speaker-delim", rep.speaker_delim)->capture_default_str();
  report_cmd->add_option("--out", rep.out, "Summary CSV");
  report_cmd->add_option("--histogram", rep.histogram, "Duration histogram CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInvalid;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*encode_cmd) return cmd_encode(encode, out);
    if (*discover_cmd) return cmd_discover(disc, out, err);
    if (*score_cmd) return cmd_score(sc, out);
    if (*synth_cmd) return cmd_synth(syn, out);
    if (*report_cmd) return cmd_report(rep, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace stdisc::cli
