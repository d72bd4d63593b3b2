#include "stdisc/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace stdisc {

namespace {

constexpr Ticks kMinOverlap = 30'000;  // 30 ms

struct Interval {
  Ticks start;
  Ticks end;
};

std::vector<Interval> merge(std::vector<Interval> spans) {
  std::sort(spans.begin(), spans.end(), [](const Interval& l, const Interval& r) { return l.start < r.start; });
  std::vector<Interval> out;
  for (const auto& s : spans) {
    if (!out.empty() && s.start <= out.back().end) {
      out.back().end = std::max(out.back().end, s.end);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace

PhoneIndex::PhoneIndex(const PhoneAlignment& alignment) {
  for (const auto& e : alignment) by_id_[e.utterance_id].push_back(e);
  for (auto& [id, phones] : by_id_) {
    std::stable_sort(phones.begin(), phones.end(),
                     [](const PhoneEntry& l, const PhoneEntry& r) { return l.start < r.start; });
  }
}

const std::vector<PhoneEntry>& PhoneIndex::phones_for(const std::string& utterance_id) const {
  if (auto it = by_id_.find(utterance_id); it != by_id_.end()) return it->second;
  if (auto it = by_id_.find(recording_of(utterance_id)); it != by_id_.end()) return it->second;
  throw InvalidArgument("no phone alignment for utterance '" + utterance_id + "'");
}

Transcription transcribe(const Fragment& fragment, const PhoneIndex& index) {
  const Ticks fs = to_ticks(fragment.start);
  const Ticks fe = to_ticks(fragment.end);
  Transcription out;
  for (const auto& p : index.phones_for(fragment.utterance_id)) {
    const Ticks ps = to_ticks(p.start);
    const Ticks pe = to_ticks(p.end);
    const Ticks overlap = std::min(fe, pe) - std::max(fs, ps);
    if (overlap <= 0) continue;
    if (overlap > kMinOverlap || 2 * overlap > pe - ps) out.push_back(p.phone);
  }
  return out;
}

Transcription transcribe(const Fragment& fragment, const PhoneAlignment& alignment) {
  return transcribe(fragment, PhoneIndex(alignment));
}

std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double pair_ned(const Transcription& a, const Transcription& b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

std::vector<double> ned_per_pair(const std::vector<MatchPair>& pairs, const PhoneAlignment& alignment) {
  const PhoneIndex index(alignment);
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(pair_ned(transcribe(p.a, index), transcribe(p.b, index)));
  return out;
}

double ned(const std::vector<MatchPair>& pairs, const PhoneAlignment& alignment) {
  if (pairs.empty()) throw InvalidArgument("NED is undefined for an empty pair list");
  double total = 0.0;
  for (double v : ned_per_pair(pairs, alignment)) total += v;
  return total / static_cast<double>(pairs.size());
}

double coverage(const std::vector<MatchPair>& pairs, const VadTable& vad) {
  if (vad.empty()) throw InvalidArgument("coverage is undefined for an empty VAD table");
  std::map<std::string, std::vector<Interval>, std::less<>> speech;
  Ticks total = 0;
  for (const auto& e : vad) {
    const Interval span{to_ticks(e.start), to_ticks(e.end)};
    if (span.end <= span.start) throw InvalidArgument("VAD interval for '" + e.utterance_id + "' is empty");
    speech[e.utterance_id].push_back(span);
    total += span.end - span.start;
  }

  std::map<std::string, std::vector<Interval>, std::less<>> found;
  auto add = [&](const Fragment& f) {
    const std::string key = speech.contains(f.utterance_id) ? f.utterance_id : recording_of(f.utterance_id);
    if (!speech.contains(key)) return;
    found[key].push_back({to_ticks(f.start), to_ticks(f.end)});
  };
  for (const auto& p : pairs) {
    add(p.a);
    add(p.b);
  }

  Ticks covered = 0;
  for (auto& [key, spans] : found) {
    const auto fragments = merge(std::move(spans));
    const auto regions = merge(speech[key]);
    std::size_t r = 0;
    for (const auto& f : fragments) {
      while (r < regions.size() && regions[r].end <= f.start) ++r;
      for (std::size_t q = r; q < regions.size() && regions[q].start < f.end; ++q) {
        covered += std::min(f.end, regions[q].end) - std::max(f.start, regions[q].start);
      }
    }
  }
  return static_cast<double>(covered) / static_cast<double>(total);
}

DurationReport duration_report(const std::vector<MatchPair>& pairs, double bin_width) {
  if (!(bin_width > 0.0)) throw InvalidArgument("bin width must be positive");
  DurationReport report;
  report.bin_width = bin_width;
  const Ticks width = std::max<Ticks>(1, to_ticks(bin_width));
  Ticks sum = 0;
  Ticks longest = 0;
  for (const auto& p : pairs) {
    for (const auto* f : {&p.a, &p.b}) {
      const Ticks d = std::max<Ticks>(0, to_ticks(f->end) - to_ticks(f->start));
      const auto bin = static_cast<std::size_t>(d / width);
      if (report.counts.size() <= bin) report.counts.resize(bin + 1, 0);
      ++report.counts[bin];
      sum += d;
      longest = std::max(longest, d);
      ++report.fragments;
    }
  }
  if (report.fragments > 0) {
    report.mean = to_seconds(sum) / static_cast<double>(report.fragments);
    report.max = to_seconds(longest);
  }
  return report;
}

SpeakerReport speaker_report(const std::vector<MatchPair>& pairs, const SpeakerMap& speaker_of_id) {
  SpeakerReport report;
  for (const auto& p : pairs) {
    if (speaker_of_id(p.a.utterance_id) == speaker_of_id(p.b.utterance_id)) {
      ++report.within;
    } else {
      ++report.across;
    }
  }
  return report;
}

SpeakerMap speaker_table(std::map<std::string, std::string> table) {
  return [table = std::move(table)](const std::string& id) {
    auto it = table.find(id);
    if (it == table.end()) throw InvalidArgument("no speaker for utterance '" + id + "'");
    return it->second;
  };
}

SpeakerMap speaker_prefix(char delimiter) {
  return [delimiter](const std::string& id) { return speaker_of(id, delimiter); };
}

ScoreReport score(const std::vector<MatchPair>& pairs, const PhoneAlignment& alignment, const VadTable& vad,
                  const SpeakerMap& speaker_of_id, double bin_width) {
  ScoreReport report;
  report.pair_count = pairs.size();
  report.coverage = coverage(pairs, vad);
  if (!pairs.empty()) report.ned = ned(pairs, alignment);
  report.speakers = speaker_report(pairs, speaker_of_id);
  report.durations = duration_report(pairs, bin_width);
  return report;
}

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void write_summary(std::ostream& out, const ScoreReport& r) {
  out << "pairs:          " << r.pair_count << '\n'
      << "coverage:       " << fixed(r.coverage) << '\n'
      << "ned:            " << (r.ned ? fixed(*r.ned) : std::string("undefined (no pairs)")) << '\n'
      << "within-speaker: " << r.speakers.within << '\n'
      << "across-speaker: " << r.speakers.across << '\n'
      << "mean duration:  " << fixed(r.durations.mean, 4) << " s\n"
      << "max duration:   " << fixed(r.durations.max, 4) << " s\n";
}

void write_report_csv(std::ostream& out, const ScoreReport& r) {
  out << "metric,value\n"
      << "pairs," << r.pair_count << '\n'
      << "coverage," << fixed(r.coverage) << '\n'
      << "ned," << (r.ned ? fixed(*r.ned) : std::string("undefined")) << '\n'
      << "within_speaker," << r.speakers.within << '\n'
      << "across_speaker," << r.speakers.across << '\n'
      << "mean_duration," << fixed(r.durations.mean) << '\n'
      << "max_duration," << fixed(r.durations.max) << '\n';
}

void write_histogram_csv(std::ostream& out, const DurationReport& r) {
  out << "bin_start,bin_end,count\n";
  for (std::size_t n = 0; n < r.counts.size(); ++n) {
    out << fixed(static_cast<double>(n) * r.bin_width, 4) << ',' << fixed(static_cast<double>(n + 1) * r.bin_width, 4)
        << ',' << r.counts[n] << '\n';
  }
}

}  // namespace stdisc
