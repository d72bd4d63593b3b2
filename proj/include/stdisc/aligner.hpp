#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stdisc {

using UnitSpan = std::span<const std::uint32_t>;

/// Substitution scores and linear gap penalty.
///
/// With an empty `table` the score is `match` for equal units and `mismatch`
/// otherwise. A non-empty table of size alphabet*alphabet replaces that rule,
/// e.g. to score broad phone classes differently.
struct ScoringScheme {
  int match = 1;
  int mismatch = -1;
  int gap = 1;
  std::vector<int> table;
  std::uint32_t alphabet = 0;

  int sim(std::uint32_t x, std::uint32_t y) const noexcept {
    if (table.empty()) return x == y ? match : mismatch;
    return table[static_cast<std::size_t>(x) * alphabet + y];
  }
  /// Throws InvalidArgument unless match > 0, mismatch < 0, gap >= 0 and any
  /// table is square.
  void validate() const;
};

enum class Move : std::uint8_t { diag, up, left };

struct PathStep {
  std::uint32_t i = 0;  // row in H, 1-based position in x
  std::uint32_t j = 0;  // column in H, 1-based position in y
  Move move = Move::diag;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Inclusive 0-based index range.
struct IndexSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const IndexSpan&, const IndexSpan&) = default;
};

struct LocalMatch {
  IndexSpan x_span;
  IndexSpan y_span;
  int score = 0;
  /// Ordered from the first aligned cell to the end cell (i + j increasing).
  /// `move` is the step that entered the cell from its predecessor.
  std::vector<PathStep> path;
  friend bool operator==(const LocalMatch&, const LocalMatch&) = default;
};

/// (N+1) x (M+1) Smith-Waterman scoring matrix with a mask of cells pinned to
/// zero by earlier extractions.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t n, std::size_t m) { reset(n, m); }

  void reset(std::size_t n, std::size_t m) {
    rows_ = n + 1;
    cols_ = m + 1;
    values_.assign(rows_ * cols_, 0);
    pinned_.assign(rows_ * cols_, 0);
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  int operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  int& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }
  bool pinned(std::size_t i, std::size_t j) const noexcept { return pinned_[i * cols_ + j] != 0; }
  void pin(std::size_t i, std::size_t j) noexcept {
    pinned_[i * cols_ + j] = 1;
    values_[i * cols_ + j] = 0;
  }
  int max_value() const noexcept;

  bool same_values(const ScoreMatrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_ && values_ == other.values_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> values_;
  std::vector<std::uint8_t> pinned_;
};

/// Fills H with row 0 and column 0 at zero and
/// H(i,j) = max(H(i-1,j-1) + sim(x_i, y_j), H(i-1,j) - W, H(i,j-1) - W, 0).
ScoreMatrix fill_scoring_matrix(UnitSpan x, UnitSpan y, const ScoringScheme& scheme);

/// Recomputes every unpinned cell with i >= row0 and j >= col0 in row-major
/// order; pinned cells stay zero. Cells outside that quadrant cannot depend
/// on a pin placed inside it.
void rescore_region(ScoreMatrix& h, UnitSpan x, UnitSpan y, const ScoringScheme& scheme, std::size_t row0,
                    std::size_t col0);
/// Reference: recomputes the whole matrix honouring pinned cells.
void rescore_full(ScoreMatrix& h, UnitSpan x, UnitSpan y, const ScoringScheme& scheme);

/// Cell with the highest value; ties go to the lowest i + j, then lowest i.
struct Cell {
  std::size_t i = 0;
  std::size_t j = 0;
  int value = 0;
};
Cell best_cell(const ScoreMatrix& h);

/// Traces back from the best cell if it scores at least `tau`.
///
/// Each step follows the move that produced the cell's value, preferring
/// diagonal, then up, then left, and stops before the first zero cell.
std::optional<LocalMatch> traceback(const ScoreMatrix& h, UnitSpan x, UnitSpan y, const ScoringScheme& scheme,
                                    int tau);

struct AlignOptions {
  /// Pins every cell with j <= i before the first fill. Used when aligning a
  /// sequence with itself so the trivial identity path and its mirror image
  /// are never reported.
  bool mask_lower_triangle = false;
};

/// Reusable Waterman-Eggert extractor. Holds its matrix between calls so a
/// worker can align many pairs without reallocating.
class LocalAligner {
 public:
  explicit LocalAligner(ScoringScheme scheme = {});

  /// All non-overlapping local alignments scoring >= tau, in extraction
  /// order (scores non-increasing). After each extraction the path cells are
  /// pinned to zero and the quadrant below and right of the path is rescored.
  std::vector<LocalMatch> find_matches(UnitSpan x, UnitSpan y, int tau, const AlignOptions& options = {});

  const ScoringScheme& scheme() const noexcept { return scheme_; }
  const ScoreMatrix& matrix() const noexcept { return h_; }

 private:
  ScoringScheme scheme_;
  ScoreMatrix h_;
};

std::vector<LocalMatch> find_matches(UnitSpan x, UnitSpan y, const ScoringScheme& scheme, int tau,
                                     const AlignOptions& options = {});

/// Pins the path cells and returns the top-left corner of the affected quadrant.
std::pair<std::size_t, std::size_t> pin_path(ScoreMatrix& h, const LocalMatch& match);

/// Two rows of space-separated units, gaps printed as "--".
struct RenderedAlignment {
  std::string x_row;
  std::string y_row;
};
RenderedAlignment render_alignment(const LocalMatch& match, UnitSpan x, UnitSpan y);

}  // namespace stdisc
