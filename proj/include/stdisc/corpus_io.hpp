#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "stdisc/types.hpp"

namespace stdisc {

inline constexpr double kDefaultFramePeriod = 0.02;

/// One utterance of real-valued features, T frames by D dimensions.
///
/// `offset` is the position of frame 0 inside the source recording, so
/// `offset + t * frame_period` is a recording-relative time.
struct FeatureSequence {
  std::string utterance_id;
  Matrix frames;
  double frame_period = kDefaultFramePeriod;
  double offset = 0.0;

  friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;
};

/// Inclusive frame span [a, b] represented by one cluster index.
struct Segment {
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  std::uint32_t unit = 0;

  std::uint32_t frames() const noexcept { return b - a + 1; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct EncodedUtterance {
  std::string utterance_id;
  std::vector<Segment> segments;
  double frame_period = kDefaultFramePeriod;
  double offset = 0.0;

  std::vector<std::uint32_t> units() const;
  /// Number of frames covered, i.e. b of the last segment plus one.
  std::size_t frame_count() const noexcept {
    return segments.empty() ? 0 : segments.back().b + 1;
  }
  friend bool operator==(const EncodedUtterance&, const EncodedUtterance&) = default;
};

/// Throws InvalidArgument unless the segments tile [0, T-1] contiguously.
void validate_tiling(const EncodedUtterance& enc);

struct VadEntry {
  std::string utterance_id;
  double start = 0.0;
  double end = 0.0;
  friend bool operator==(const VadEntry&, const VadEntry&) = default;
};
using VadTable = std::vector<VadEntry>;

struct PhoneEntry {
  std::string utterance_id;
  double start = 0.0;
  double end = 0.0;
  std::string phone;
  friend bool operator==(const PhoneEntry&, const PhoneEntry&) = default;
};
using PhoneAlignment = std::vector<PhoneEntry>;

struct Fragment {
  std::string utterance_id;
  double start = 0.0;
  double end = 0.0;

  double duration() const noexcept { return end - start; }
  friend bool operator==(const Fragment&, const Fragment&) = default;
};

struct MatchPair {
  Fragment a;
  Fragment b;
  int score = 0;
  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

// Identity conventions. Utterance ids look like `<recording>_<clipindex>`
// and the speaker is a delimited prefix of the id.

/// Substring before the first `delimiter`; the whole id if there is none.
std::string speaker_of(std::string_view utterance_id, char delimiter = '_');
/// Strips a trailing `_<digits>` clip index; the id itself otherwise.
std::string recording_of(std::string_view utterance_id);

// DSTF feature archive: "DSTF", then per record u16 id length, UTF-8 id,
// u32 T, u32 D, f32 frame_period, f32 offset, T*D little-endian f32 row-major.
void write_feature_archive(const std::filesystem::path& path,
                           const std::vector<FeatureSequence>& sequences);
std::vector<FeatureSequence> read_feature_archive(const std::filesystem::path& path);
void write_feature_archive(std::ostream& out, const std::vector<FeatureSequence>& sequences);
std::vector<FeatureSequence> read_feature_archive(std::istream& in);

// Unit file: `utterance_id<TAB>unit:a:b unit:a:b ...<TAB>period=<s><TAB>offset=<s>`.
// The trailing key=value fields are optional on read (defaults 0.02 and 0).
void write_units(const std::filesystem::path& path, const std::vector<EncodedUtterance>& corpus);
std::vector<EncodedUtterance> read_units(const std::filesystem::path& path);
void write_units(std::ostream& out, const std::vector<EncodedUtterance>& corpus);
std::vector<EncodedUtterance> read_units(std::istream& in);

// Class file: `Class <n>\n<utt> <start> <end>\n<utt> <start> <end>\n\n` per pair,
// times with four decimals. Scores are not part of the format and read back as 0.
void write_pairs(const std::filesystem::path& path, const std::vector<MatchPair>& pairs);
std::vector<MatchPair> read_pairs(const std::filesystem::path& path);
void write_pairs(std::ostream& out, const std::vector<MatchPair>& pairs);
std::vector<MatchPair> read_pairs(std::istream& in);

// CSV with header `utterance_id,start,end` / `utterance_id,start,end,phone`.
void write_vad(const std::filesystem::path& path, const VadTable& vad);
VadTable read_vad(const std::filesystem::path& path);
VadTable read_vad(std::istream& in);
void write_alignment(const std::filesystem::path& path, const PhoneAlignment& alignment);
PhoneAlignment read_alignment(const std::filesystem::path& path);
PhoneAlignment read_alignment(std::istream& in);

/// Formats seconds with four decimals, as used by the class file.
std::string format_time(double seconds);

/// Widens an f32 through its shortest round-trip decimal form, so a stored
/// 0.02f comes back as the double 0.02 rather than 0.0199999995.
double widen_shortest(float value);

}  // namespace stdisc
