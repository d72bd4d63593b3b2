#include "stdisc/aligner.hpp"

#include <algorithm>
#include <limits>

#include "stdisc/types.hpp"

namespace stdisc {

void ScoringScheme::validate() const {
  if (table.empty()) {
    if (match <= 0) throw InvalidArgument("match score must be positive");
    if (mismatch >= 0) throw InvalidArgument("mismatch score must be negative");
  } else if (alphabet == 0 || table.size() != static_cast<std::size_t>(alphabet) * alphabet) {
    throw InvalidArgument("substitution table must be alphabet x alphabet");
  }
  if (gap < 0) throw InvalidArgument("gap penalty must be non-negative");
}

int ScoreMatrix::max_value() const noexcept {
  return values_.empty() ? 0 : *std::max_element(values_.begin(), values_.end());
}

namespace {

inline int cell_value(const ScoreMatrix& h, UnitSpan x, UnitSpan y, const ScoringScheme& s, std::size_t i,
                      std::size_t j) noexcept {
  const int diag = h(i - 1, j - 1) + s.sim(x[i - 1], y[j - 1]);
  const int up = h(i - 1, j) - s.gap;
  const int left = h(i, j - 1) - s.gap;
  return std::max({diag, up, left, 0});
}

}  // namespace

void rescore_region(ScoreMatrix& h, UnitSpan x, UnitSpan y, const ScoringScheme& scheme, std::size_t row0,
                    std::size_t col0) {
  row0 = std::max<std::size_t>(row0, 1);
  col0 = std::max<std::size_t>(col0, 1);
  for (std::size_t i = row0; i <= x.size(); ++i) {
    for (std::size_t j = col0; j <= y.size(); ++j) {
      h(i, j) = h.pinned(i, j) ? 0 : cell_value(h, x, y, scheme, i, j);
    }
  }
}

void rescore_full(ScoreMatrix& h, UnitSpan x, UnitSpan y, const ScoringScheme& scheme) {
  rescore_region(h, x, y, scheme, 1, 1);
}

ScoreMatrix fill_scoring_matrix(UnitSpan x, UnitSpan y, const ScoringScheme& scheme) {
  ScoreMatrix h(x.size(), y.size());
  rescore_full(h, x, y, scheme);
  return h;
}

Cell best_cell(const ScoreMatrix& h) {
  Cell best;
  for (std::size_t i = 1; i < h.rows(); ++i) {
    for (std::size_t j = 1; j < h.cols(); ++j) {
      const int v = h(i, j);
      if (v < best.value) continue;
      if (v > best.value || i + j < best.i + best.j || (i + j == best.i + best.j && i < best.i)) {
        best = {i, j, v};
      }
    }
  }
  return best;
}

std::optional<LocalMatch> traceback(const ScoreMatrix& h, UnitSpan x, UnitSpan y, const ScoringScheme& scheme,
                                    int tau) {
  const Cell start = best_cell(h);
  if (start.value <= 0 || start.value < tau) return std::nullopt;

  LocalMatch match;
  match.score = start.value;
  std::size_t i = start.i;
  std::size_t j = start.j;
  while (i > 0 && j > 0 && h(i, j) > 0) {
    const int v = h(i, j);
    Move move;
    if (h(i - 1, j - 1) + scheme.sim(x[i - 1], y[j - 1]) == v) {
      move = Move::diag;
    } else if (h(i - 1, j) - scheme.gap == v) {
      move = Move::up;
    } else {
      move = Move::left;
    }
    match.path.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), move});
    if (move != Move::left) --i;
    if (move != Move::up) --j;
  }
  std::reverse(match.path.begin(), match.path.end());

  std::size_t x_lo = std::numeric_limits<std::size_t>::max(), x_hi = 0;
  std::size_t y_lo = std::numeric_limits<std::size_t>::max(), y_hi = 0;
  for (const auto& step : match.path) {
    if (step.move != Move::left) {
      x_lo = std::min<std::size_t>(x_lo, step.i - 1);
      x_hi = std::max<std::size_t>(x_hi, step.i - 1);
    }
    if (step.move != Move::up) {
      y_lo = std::min<std::size_t>(y_lo, step.j - 1);
      y_hi = std::max<std::size_t>(y_hi, step.j - 1);
    }
  }
  match.x_span = {x_lo, x_hi};
  match.y_span = {y_lo, y_hi};
  return match;
}

std::pair<std::size_t, std::size_t> pin_path(ScoreMatrix& h, const LocalMatch& match) {
  std::size_t row0 = std::numeric_limits<std::size_t>::max();
  std::size_t col0 = std::numeric_limits<std::size_t>::max();
  for (const auto& step : match.path) {
    h.pin(step.i, step.j);
    row0 = std::min<std::size_t>(row0, step.i);
    col0 = std::min<std::size_t>(col0, step.j);
  }
  return {row0, col0};
}

LocalAligner::LocalAligner(ScoringScheme scheme) : scheme_(std::move(scheme)) { scheme_.validate(); }

std::vector<LocalMatch> LocalAligner::find_matches(UnitSpan x, UnitSpan y, int tau, const AlignOptions& options) {
  if (tau < 1) throw InvalidArgument("tau must be at least 1");
  h_.reset(x.size(), y.size());
  if (options.mask_lower_triangle) {
    for (std::size_t i = 1; i < h_.rows(); ++i) {
      for (std::size_t j = 1; j <= std::min(i, h_.cols() - 1); ++j) h_.pin(i, j);
    }
  }
  rescore_full(h_, x, y, scheme_);

  std::vector<LocalMatch> out;
  while (auto match = traceback(h_, x, y, scheme_, tau)) {
    const auto [row0, col0] = pin_path(h_, *match);
    rescore_region(h_, x, y, scheme_, row0, col0);
    out.push_back(std::move(*match));
  }
  return out;
}

std::vector<LocalMatch> find_matches(UnitSpan x, UnitSpan y, const ScoringScheme& scheme, int tau,
                                     const AlignOptions& options) {
  LocalAligner aligner(scheme);
  return aligner.find_matches(x, y, tau, options);
}

RenderedAlignment render_alignment(const LocalMatch& match, UnitSpan x, UnitSpan y) {
  RenderedAlignment out;
  for (std::size_t n = 0; n < match.path.size(); ++n) {
    const auto& step = match.path[n];
    if (n) {
      out.x_row += ' ';
      out.y_row += ' ';
    }
    out.x_row += step.move == Move::left ? "--" : std::to_string(x[step.i - 1]);
    out.y_row += step.move == Move::up ? "--" : std::to_string(y[step.j - 1]);
  }
  return out;
}

}  // namespace stdisc
