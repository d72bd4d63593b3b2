#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stdisc/corpus_io.hpp"

namespace stdisc {

using Transcription = std::vector<std::string>;

/// Phone lookup by utterance. Fragments resolve first by their own id, then
/// by their recording id (see recording_of).
class PhoneIndex {
 public:
  explicit PhoneIndex(const PhoneAlignment& alignment);
  /// Throws InvalidArgument for an id present under neither key.
  const std::vector<PhoneEntry>& phones_for(const std::string& utterance_id) const;

 private:
  std::map<std::string, std::vector<PhoneEntry>, std::less<>> by_id_;
};

/// Phones overlapping the fragment by more than 30 ms or by more than half of
/// the phone's own duration, in time order. Boundaries are decided on the
/// microsecond grid, so an overlap of exactly 30 ms or exactly 50 % is out.
Transcription transcribe(const Fragment& fragment, const PhoneIndex& index);
Transcription transcribe(const Fragment& fragment, const PhoneAlignment& alignment);

/// Unit-cost edit distance.
std::size_t levenshtein(const std::vector<std::string>& a, const std::vector<std::string>& b);

/// Normalised distance of one pair: edit distance over the longer
/// transcription; 1.0 when both are empty.
double pair_ned(const Transcription& a, const Transcription& b);

/// Mean pair_ned over all pairs. Throws InvalidArgument for an empty list.
double ned(const std::vector<MatchPair>& pairs, const PhoneAlignment& alignment);
/// Per-pair values, in input order.
std::vector<double> ned_per_pair(const std::vector<MatchPair>& pairs, const PhoneAlignment& alignment);

/// Fraction of VAD speech covered by the union of all fragments. Fragments
/// are clipped to the VAD intervals of their recording. Throws
/// InvalidArgument for an empty VAD table.
double coverage(const std::vector<MatchPair>& pairs, const VadTable& vad);

struct DurationReport {
  double bin_width = 0.1;
  /// counts[n] holds durations in [n * bin_width, (n + 1) * bin_width).
  std::vector<std::size_t> counts;
  std::size_t fragments = 0;
  double mean = 0.0;
  double max = 0.0;
};
/// Histogram over both fragments of every pair.
DurationReport duration_report(const std::vector<MatchPair>& pairs, double bin_width);

struct SpeakerReport {
  std::size_t within = 0;
  std::size_t across = 0;
};
using SpeakerMap = std::function<std::string(const std::string&)>;
SpeakerReport speaker_report(const std::vector<MatchPair>& pairs, const SpeakerMap& speaker_of);
/// Speaker lookup from an explicit table; throws InvalidArgument on unknown ids.
SpeakerMap speaker_table(std::map<std::string, std::string> table);
/// Speaker lookup via the delimited-prefix convention.
SpeakerMap speaker_prefix(char delimiter = '_');

struct ScoreReport {
  std::size_t pair_count = 0;
  double coverage = 0.0;
  /// Empty when there are no pairs.
  std::optional<double> ned;
  SpeakerReport speakers;
  DurationReport durations;
};
ScoreReport score(const std::vector<MatchPair>& pairs, const PhoneAlignment& alignment, const VadTable& vad,
                  const SpeakerMap& speaker_of, double bin_width = 0.1);

void write_summary(std::ostream& out, const ScoreReport& report);
/// `metric,value` rows.
void write_report_csv(std::ostream& out, const ScoreReport& report);
/// `bin_start,bin_end,count` rows.
void write_histogram_csv(std::ostream& out, const DurationReport& report);

}  // namespace stdisc
