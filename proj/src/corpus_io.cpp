#include "stdisc/corpus_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace stdisc {

namespace {

constexpr std::array<char, 4> kFeatureMagic = {'D', 'S', 'T', 'F'};

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

// Returns false on clean EOF before the first byte, throws on partial reads.
template <typename T>
bool get(std::istream& in, T& value, const std::string& what) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (in.gcount() == 0 && in.eof()) return false;
  if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) {
    throw FormatError("truncated feature archive while reading " + what);
  }
  return true;
}

template <typename T>
void get_required(std::istream& in, T& value, const std::string& what) {
  if (!get(in, value, what)) throw FormatError("truncated feature archive while reading " + what);
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("I/O failure writing " + path.string());
}

double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw FormatError(context + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::uint32_t parse_u32(std::string_view text, const std::string& context) {
  std::uint32_t value = 0;
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, value);
  if (ec != std::errc() || ptr != last) {
    throw FormatError(context + ": expected an unsigned integer, got '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string shortest(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace

std::vector<std::uint32_t> EncodedUtterance::units() const {
  std::vector<std::uint32_t> out;
  out.reserve(segments.size());
  for (const auto& s : segments) out.push_back(s.unit);
  return out;
}

void validate_tiling(const EncodedUtterance& enc) {
  std::uint32_t expected = 0;
  for (std::size_t n = 0; n < enc.segments.size(); ++n) {
    const auto& s = enc.segments[n];
    if (s.a != expected || s.b < s.a) {
      throw InvalidArgument("utterance '" + enc.utterance_id + "': segment " + std::to_string(n) +
                            " breaks the tiling");
    }
    expected = s.b + 1;
  }
}

std::string speaker_of(std::string_view utterance_id, char delimiter) {
  const auto pos = utterance_id.find(delimiter);
  return std::string(utterance_id.substr(0, pos));
}

std::string recording_of(std::string_view utterance_id) {
  const auto pos = utterance_id.rfind('_');
  if (pos == std::string_view::npos || pos + 1 == utterance_id.size() || pos == 0) {
    return std::string(utterance_id);
  }
  const auto suffix = utterance_id.substr(pos + 1);
  const bool digits = std::all_of(suffix.begin(), suffix.end(), [](char c) { return c >= '0' && c <= '9'; });
  return digits ? std::string(utterance_id.substr(0, pos)) : std::string(utterance_id);
}

double widen_shortest(float value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  double out = 0.0;
  std::from_chars(buf.data(), ptr, out);
  return out;
}

std::string format_time(double seconds) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.4f", seconds);
  return buf.data();
}

// ---------------------------------------------------------------------------
// DSTF feature archive

void write_feature_archive(std::ostream& out, const std::vector<FeatureSequence>& sequences) {
  out.write(kFeatureMagic.data(), kFeatureMagic.size());
  for (const auto& seq : sequences) {
    if (seq.utterance_id.size() > 0xFFFF) {
      throw InvalidArgument("utterance id too long: " + seq.utterance_id.substr(0, 32) + "...");
    }
    if (seq.frames.cols() == 0) {
      throw InvalidArgument("utterance '" + seq.utterance_id + "' has zero feature dimensions");
    }
    if (!(seq.frame_period > 0.0)) {
      throw InvalidArgument("utterance '" + seq.utterance_id + "' has non-positive frame period");
    }
    if (!seq.frames.all_finite()) {
      throw InvalidArgument("utterance '" + seq.utterance_id + "' has non-finite features");
    }
    put(out, static_cast<std::uint16_t>(seq.utterance_id.size()));
    out.write(seq.utterance_id.data(), static_cast<std::streamsize>(seq.utterance_id.size()));
    put(out, static_cast<std::uint32_t>(seq.frames.rows()));
    put(out, static_cast<std::uint32_t>(seq.frames.cols()));
    put(out, static_cast<float>(seq.frame_period));
    put(out, static_cast<float>(seq.offset));
    const auto payload = seq.frames.data();
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
  }
}

std::vector<FeatureSequence> read_feature_archive(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kFeatureMagic) {
    throw FormatError("not a DSTF feature archive (bad magic)");
  }
  std::vector<FeatureSequence> out;
  while (true) {
    std::uint16_t id_len = 0;
    if (!get(in, id_len, "record header")) break;
    std::string id(id_len, '\0');
    in.read(id.data(), id_len);
    if (in.gcount() != id_len) throw FormatError("truncated feature archive in utterance id");

    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    float period = 0.0f;
    float offset = 0.0f;
    get_required(in, rows, "header of '" + id + "'");
    get_required(in, cols, "header of '" + id + "'");
    get_required(in, period, "header of '" + id + "'");
    get_required(in, offset, "header of '" + id + "'");
    if (cols == 0) throw FormatError("utterance '" + id + "': zero feature dimensions");
    if (!(period > 0.0f) || !std::isfinite(period)) {
      throw FormatError("utterance '" + id + "': frame period must be positive");
    }
    if (!std::isfinite(offset)) throw FormatError("utterance '" + id + "': non-finite offset");

    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    std::vector<float> payload(count);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float)) {
      throw FormatError("utterance '" + id + "': truncated payload (header declares " +
                        std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }
    FeatureSequence seq{id, Matrix(rows, cols, std::move(payload)), widen_shortest(period),
                        widen_shortest(offset)};
    if (!seq.frames.all_finite()) throw FormatError("utterance '" + id + "': non-finite feature value");
    out.push_back(std::move(seq));
  }
  return out;
}

void write_feature_archive(const std::filesystem::path& path,
                           const std::vector<FeatureSequence>& sequences) {
  auto out = open_out(path, std::ios::binary);
  write_feature_archive(out, sequences);
  finish(out, path);
}

std::vector<FeatureSequence> read_feature_archive(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  return read_feature_archive(in);
}

// ---------------------------------------------------------------------------
// Unit file

void write_units(std::ostream& out, const std::vector<EncodedUtterance>& corpus) {
  for (const auto& enc : corpus) {
    validate_tiling(enc);
    out << enc.utterance_id << '\t';
    for (std::size_t n = 0; n < enc.segments.size(); ++n) {
      const auto& s = enc.segments[n];
      if (n) out << ' ';
      out << s.unit << ':' << s.a << ':' << s.b;
    }
    out << "\tperiod=" << shortest(enc.frame_period) << "\toffset=" << shortest(enc.offset) << '\n';
  }
}

std::vector<EncodedUtterance> read_units(std::istream& in) {
  std::vector<EncodedUtterance> out;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = strip_cr(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    const std::string where = "unit file line " + std::to_string(lineno);
    if (fields.size() < 2 || fields[0].empty()) throw FormatError(where + ": expected '<id>\\t<segments>'");

    EncodedUtterance enc;
    enc.utterance_id = std::string(fields[0]);
    if (!fields[1].empty()) {
      for (auto token : split(fields[1], ' ')) {
        if (token.empty()) continue;
        const auto parts = split(token, ':');
        if (parts.size() != 3) throw FormatError(where + ": bad segment '" + std::string(token) + "'");
        enc.segments.push_back({parse_u32(parts[1], where), parse_u32(parts[2], where), parse_u32(parts[0], where)});
      }
    }
    for (std::size_t f = 2; f < fields.size(); ++f) {
      const auto eq = fields[f].find('=');
      if (eq == std::string_view::npos) throw FormatError(where + ": bad field '" + std::string(fields[f]) + "'");
      const auto key = fields[f].substr(0, eq);
      const double value = parse_double(fields[f].substr(eq + 1), where);
      if (key == "period") {
        if (!(value > 0.0)) throw FormatError(where + ": period must be positive");
        enc.frame_period = value;
      } else if (key == "offset") {
        enc.offset = value;
      } else {
        throw FormatError(where + ": unknown field '" + std::string(key) + "'");
      }
    }
    if (enc.segments.empty()) throw FormatError(where + ": utterance '" + enc.utterance_id + "' has no segments");
    try {
      validate_tiling(enc);
    } catch (const InvalidArgument& e) {
      throw FormatError(where + ": " + e.what());
    }
    out.push_back(std::move(enc));
  }
  return out;
}

void write_units(const std::filesystem::path& path, const std::vector<EncodedUtterance>& corpus) {
  auto out = open_out(path);
  write_units(out, corpus);
  finish(out, path);
}

std::vector<EncodedUtterance> read_units(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_units(in);
}

// ---------------------------------------------------------------------------
// Class file

void write_pairs(std::ostream& out, const std::vector<MatchPair>& pairs) {
  std::size_t n = 0;
  for (const auto& p : pairs) {
    out << "Class " << n++ << '\n';
    for (const auto* f : {&p.a, &p.b}) {
      out << f->utterance_id << ' ' << format_time(f->start) << ' ' << format_time(f->end) << '\n';
    }
    out << '\n';
  }
}

std::vector<MatchPair> read_pairs(std::istream& in) {
  std::vector<MatchPair> out;
  std::vector<Fragment> members;
  std::string raw;
  std::size_t lineno = 0;
  bool in_class = false;

  auto close_class = [&](std::size_t at) {
    if (!in_class) return;
    if (members.size() != 2) {
      throw FormatError("class file line " + std::to_string(at) + ": a class must list exactly two fragments");
    }
    out.push_back({members[0], members[1], 0});
    members.clear();
    in_class = false;
  };

  while (std::getline(in, raw)) {
    ++lineno;
    const auto line = strip_cr(raw);
    const std::string where = "class file line " + std::to_string(lineno);
    if (line.empty()) {
      close_class(lineno);
      continue;
    }
    if (line.starts_with("Class")) {
      close_class(lineno);
      in_class = true;
      continue;
    }
    if (!in_class) throw FormatError(where + ": fragment outside a class block");
    std::vector<std::string_view> tokens;
    for (auto t : split(line, ' ')) {
      if (!t.empty()) tokens.push_back(t);
    }
    if (tokens.size() != 3) throw FormatError(where + ": expected '<utt> <start> <end>'");
    Fragment f{std::string(tokens[0]), parse_double(tokens[1], where), parse_double(tokens[2], where)};
    if (!(f.end > f.start)) throw FormatError(where + ": fragment end must exceed start");
    members.push_back(std::move(f));
  }
  close_class(lineno);
  return out;
}

void write_pairs(const std::filesystem::path& path, const std::vector<MatchPair>& pairs) {
  auto out = open_out(path);
  write_pairs(out, pairs);
  finish(out, path);
}

std::vector<MatchPair> read_pairs(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pairs(in);
}

// ---------------------------------------------------------------------------
// CSV tables

namespace {

std::vector<std::vector<std::string_view>> csv_rows(std::istream& in, std::vector<std::string>& storage,
                                                     std::string_view expected_header,
                                                     std::string_view what) {
  std::string raw;
  if (!std::getline(in, raw)) throw FormatError(std::string(what) + ": missing header");
  if (strip_cr(raw) != expected_header) {
    throw FormatError(std::string(what) + ": expected header '" + std::string(expected_header) + "'");
  }
  while (std::getline(in, raw)) {
    if (!strip_cr(raw).empty()) storage.push_back(std::string(strip_cr(raw)));
  }
  std::vector<std::vector<std::string_view>> rows;
  rows.reserve(storage.size());
  for (const auto& s : storage) rows.push_back(split(s, ','));
  return rows;
}

}  // namespace

VadTable read_vad(std::istream& in) {
  std::vector<std::string> storage;
  const auto rows = csv_rows(in, storage, "utterance_id,start,end", "VAD table");
  VadTable vad;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = "VAD table row " + std::to_string(r + 1);
    if (rows[r].size() != 3) throw FormatError(where + ": expected 3 columns");
    VadEntry e{std::string(rows[r][0]), parse_double(rows[r][1], where), parse_double(rows[r][2], where)};
    if (!(e.end > e.start)) throw FormatError(where + ": end must exceed start");
    vad.push_back(std::move(e));
  }
  std::map<std::string, std::vector<std::pair<double, double>>> by_recording;
  for (const auto& e : vad) by_recording[e.utterance_id].emplace_back(e.start, e.end);
  for (auto& [id, spans] : by_recording) {
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first < spans[i - 1].second) {
        throw FormatError("VAD table: overlapping intervals for '" + id + "'");
      }
    }
  }
  return vad;
}

PhoneAlignment read_alignment(std::istream& in) {
  std::vector<std::string> storage;
  const auto rows = csv_rows(in, storage, "utterance_id,start,end,phone", "phone alignment");
  PhoneAlignment out;
  std::map<std::string, double, std::less<>> last_start;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string where = "phone alignment row " + std::to_string(r + 1);
    if (rows[r].size() != 4) throw FormatError(where + ": expected 4 columns");
    PhoneEntry e{std::string(rows[r][0]), parse_double(rows[r][1], where), parse_double(rows[r][2], where),
                 std::string(rows[r][3])};
    if (!(e.end > e.start)) throw FormatError(where + ": end must exceed start");
    auto it = last_start.find(e.utterance_id);
    if (it != last_start.end() && e.start < it->second) {
      throw FormatError(where + ": entries for '" + e.utterance_id + "' are not sorted by start");
    }
    last_start[e.utterance_id] = e.start;
    out.push_back(std::move(e));
  }
  return out;
}

VadTable read_vad(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_vad(in);
}

PhoneAlignment read_alignment(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_alignment(in);
}

void write_vad(const std::filesystem::path& path, const VadTable& vad) {
  auto out = open_out(path);
  out << "utterance_id,start,end\n";
  for (const auto& e : vad) out << e.utterance_id << ',' << shortest(e.start) << ',' << shortest(e.end) << '\n';
  finish(out, path);
}

void write_alignment(const std::filesystem::path& path, const PhoneAlignment& alignment) {
  auto out = open_out(path);
  out << "utterance_id,start,end,phone\n";
  for (const auto& e : alignment) {
    out << e.utterance_id << ',' << shortest(e.start) << ',' << shortest(e.end) << ',' << e.phone << '\n';
  }
  finish(out, path);
}

}  // namespace stdisc
