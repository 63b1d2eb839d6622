#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cfl/errors.hpp"
#include "cfl/linalg.hpp"
#include "cfl/loss.hpp"
#include "cfl/rational.hpp"
#include "cfl/spaces.hpp"

namespace cfl {

enum class Variant { restricted, full };

inline std::string weight_label(int k, int d, int y) {
  return "omega" + std::to_string(k) + "(" + std::to_string(d) + "," + std::to_string(y) + ")";
}

inline std::string intercept_label(const Spaces& spaces, std::size_t code) {
  const std::vector<int> y = spaces.unpack_outcomes(code);
  std::string out = "varpi(";
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (j) out += ",";
    out += std::to_string(y[j]);
  }
  return out + ")";
}

inline std::string column_label(const Spaces& spaces, std::size_t col) {
  if (col < spaces.weight_cols()) {
    const int M = spaces.M();
    const int K = spaces.K();
    const int y = static_cast<int>(col % static_cast<std::size_t>(M));
    const int d = static_cast<int>((col / static_cast<std::size_t>(M)) % static_cast<std::size_t>(K));
    const int k = static_cast<int>(col / (static_cast<std::size_t>(M) * static_cast<std::size_t>(K)));
    return weight_label(k, d, y);
  }
  return intercept_label(spaces, col - spaces.weight_cols());
}

/// Zero/one matrix of the additive linear system A w = l.
///
/// Row i(d, y): ones at weight columns (k, d, y_k) for every k; the full
/// variant adds a single one in the intercept block at column code(y).
struct StructureMatrix {
  Spaces spaces;
  Variant variant;
  RatMat m;

  std::size_t rows() const { return m.size(); }
  std::size_t cols() const { return m.empty() ? 0 : m[0].size(); }
  std::size_t rank() const { return linalg::rank(m); }
};

inline StructureMatrix build_structure_matrix(const Spaces& spaces, Variant variant) {
  const std::size_t rows = spaces.joint_size();
  const std::size_t cols =
      spaces.weight_cols() + (variant == Variant::full ? spaces.intercept_cols() : 0);
  RatMat m = linalg::zeros(rows, cols);
  for (int d = 0; d < spaces.K(); ++d)
    for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
      const std::size_t row = spaces.joint_index(d, code);
      const std::vector<int> y = spaces.unpack_outcomes(code);
      for (int k = 0; k < spaces.K(); ++k)
        m[row][spaces.weight_index(k, d, y[static_cast<std::size_t>(k)])] = 1;
      if (variant == Variant::full) m[row][spaces.weight_cols() + code] = 1;
    }
  return StructureMatrix{spaces, variant, std::move(m)};
}

/// Structure matrix of the plain standard loss l(d; y) = f_d(y_d): column
/// (d, y) hits row (d', y-vector) iff d' = d and y_d = y.  Its image is the
/// family cut out by the per-column equality constraints.
inline RatMat standard_structure_matrix(const Spaces& spaces) {
  const std::size_t rows = spaces.joint_size();
  const std::size_t cols =
      static_cast<std::size_t>(spaces.K()) * static_cast<std::size_t>(spaces.M());
  RatMat m = linalg::zeros(rows, cols);
  for (int d = 0; d < spaces.K(); ++d)
    for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
      const std::vector<int> y = spaces.unpack_outcomes(code);
      const std::size_t col = static_cast<std::size_t>(d) * static_cast<std::size_t>(spaces.M()) +
                              static_cast<std::size_t>(y[static_cast<std::size_t>(d)]);
      m[spaces.joint_index(d, code)][col] = 1;
    }
  return m;
}

// ---------------------------------------------------------------------------
// Published layout for the binary/binary case.
//
// The internal order is documented in Spaces; the published grid permutes
// rows to (d fastest, then y_0, then y_1) and columns to
//   omega0(0,.), omega1(1,.), omega0(1,.), omega1(0,.), varpi(.)
// ---------------------------------------------------------------------------

enum class GridKind { standard, restricted, full };

inline std::vector<std::size_t> paper_row_order(const Spaces& spaces) {
  if (spaces.K() != 2 || spaces.M() != 2)
    throw PreconditionError("paper layout is defined for K=2, M=2 only");
  std::vector<std::size_t> order;
  for (std::size_t r = 0; r < 8; ++r) {
    const int d = static_cast<int>(r & 1u);
    const int y0 = static_cast<int>((r >> 1) & 1u);
    const int y1 = static_cast<int>((r >> 2) & 1u);
    order.push_back(spaces.joint_index(d, std::vector<int>{y0, y1}));
  }
  return order;
}

inline std::vector<std::size_t> paper_col_order(const Spaces& spaces, GridKind kind) {
  if (spaces.K() != 2 || spaces.M() != 2)
    throw PreconditionError("paper layout is defined for K=2, M=2 only");
  std::vector<std::size_t> order;
  // Diagonal weights first, then cross weights, then intercepts.
  const int pairs[4][2] = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};  // (k, d)
  const int limit = (kind == GridKind::standard) ? 2 : 4;
  for (int i = 0; i < limit; ++i)
    for (int y = 0; y < 2; ++y)
      order.push_back(spaces.weight_index(pairs[i][0], pairs[i][1], y));
  if (kind == GridKind::full)
    for (std::size_t code = 0; code < 4; ++code) order.push_back(spaces.weight_cols() + code);
  return order;
}

/// Structure matrix in the published row/column order (K=M=2 only).
inline RatMat paper_layout_matrix(const Spaces& spaces, GridKind kind) {
  RatMat source;
  if (kind == GridKind::standard) {
    source = standard_structure_matrix(spaces);
    // standard_structure_matrix columns are already (d, y); map to the
    // published order omega0(0,0), omega0(0,1), omega1(1,0), omega1(1,1),
    // which coincides with (d, y) lexicographic for K=M=2.
    const std::vector<std::size_t> rows = paper_row_order(spaces);
    RatMat out = linalg::zeros(8, 4);
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 4; ++c) out[r][c] = source[rows[r]][c];
    return out;
  }
  const StructureMatrix sm = build_structure_matrix(
      spaces, kind == GridKind::full ? Variant::full : Variant::restricted);
  const std::vector<std::size_t> rows = paper_row_order(spaces);
  const std::vector<std::size_t> cols = paper_col_order(spaces, kind);
  RatMat out = linalg::zeros(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out[r][c] = sm.m[rows[r]][cols[c]];
  return out;
}

// ---------------------------------------------------------------------------
// Additive decompositions
// ---------------------------------------------------------------------------

struct FreeParam {
  std::size_t column = 0;
  std::string column_name;
  std::string symbol;
};

/// One solution of A w = l per stratum, together with the free directions
/// of the solution family.  The canonical solution pins every free
/// coordinate to zero; adding any combination of free directions yields
/// another exact decomposition of the same tensor.
class AdditiveDecomposition {
 public:
  AdditiveDecomposition(Spaces spaces, Variant variant, std::vector<RatVec> weights,
                        std::vector<RatVec> intercept, std::vector<FreeParam> free_params = {},
                        std::vector<RatVec> free_directions = {})
      : spaces_(std::move(spaces)),
        variant_(variant),
        weights_(std::move(weights)),
        intercept_(std::move(intercept)),
        free_params_(std::move(free_params)),
        free_directions_(std::move(free_directions)) {
    if (weights_.size() != spaces_.num_strata() || intercept_.size() != spaces_.num_strata())
      throw BadDimensionsError("decomposition needs one block per stratum");
    for (const RatVec& w : weights_)
      if (w.size() != spaces_.weight_cols())
        throw BadDimensionsError("weight block must have K^2*M entries");
    for (const RatVec& v : intercept_)
      if (v.size() != spaces_.intercept_cols())
        throw BadDimensionsError("intercept block must have M^K entries");
  }

  const Spaces& spaces() const { return spaces_; }
  Variant variant() const { return variant_; }

  const Rat& omega(std::size_t stratum, int k, int d, int y) const {
    return weights_[spaces_.check_stratum(stratum)][spaces_.weight_index(k, d, y)];
  }

  const Rat& varpi(std::size_t stratum, std::size_t outcome_code) const {
    return intercept_[spaces_.check_stratum(stratum)][outcome_code];
  }

  const Rat& varpi(std::size_t stratum, const std::vector<int>& y) const {
    return varpi(stratum, spaces_.pack_outcomes(y));
  }

  const std::vector<RatVec>& weight_blocks() const { return weights_; }
  const std::vector<RatVec>& intercept_blocks() const { return intercept_; }
  const std::vector<FreeParam>& free_params() const { return free_params_; }
  const std::vector<RatVec>& free_directions() const { return free_directions_; }

  bool intercept_zero() const {
    for (const RatVec& block : intercept_)
      for (const Rat& v : block)
        if (v != 0) return false;
    return true;
  }

  /// Rebuilds the loss tensor l(d; y) = sum_k omega_k(d, y_k) + varpi(y).
  LossTensor reconstruct() const {
    std::vector<RatVec> blocks(spaces_.num_strata(), RatVec(spaces_.joint_size(), Rat(0)));
    for (std::size_t s = 0; s < spaces_.num_strata(); ++s)
      for (int d = 0; d < spaces_.K(); ++d)
        for (std::size_t code = 0; code < spaces_.outcome_vectors(); ++code) {
          const std::vector<int> y = spaces_.unpack_outcomes(code);
          Rat acc = intercept_[s][code];
          for (int k = 0; k < spaces_.K(); ++k)
            acc += omega(s, k, d, y[static_cast<std::size_t>(k)]);
          blocks[s][spaces_.joint_index(d, code)] = acc;
        }
    return LossTensor(spaces_, std::move(blocks));
  }

  /// Returns a copy shifted by `coefficient * free_directions()[index]`;
  /// reconstructs the same tensor by construction.
  AdditiveDecomposition shifted(std::size_t index, const Rat& coefficient) const {
    AdditiveDecomposition out = *this;
    const RatVec& dir = free_directions_.at(index);
    for (std::size_t s = 0; s < spaces_.num_strata(); ++s) {
      for (std::size_t j = 0; j < spaces_.weight_cols(); ++j)
        out.weights_[s][j] += coefficient * dir[j];
      for (std::size_t j = 0; j < spaces_.intercept_cols(); ++j)
        out.intercept_[s][j] += coefficient * dir[spaces_.weight_cols() + j];
    }
    return out;
  }

 private:
  Spaces spaces_;
  Variant variant_;
  std::vector<RatVec> weights_;    // per stratum, length K^2*M
  std::vector<RatVec> intercept_;  // per stratum, length M^K
  std::vector<FreeParam> free_params_;
  std::vector<RatVec> free_directions_;  // padded to weight+intercept width
};

/// Non-membership certificate: the exact orthogonal projection of each
/// stratum's loss vector onto im(A)^perp.  At least one block is nonzero.
struct NotAdditive {
  Spaces spaces;
  Variant variant;
  std::vector<RatVec> residual;  // per stratum, length K*M^K
  std::size_t first_bad_stratum = 0;
};

using DecomposeResult = std::variant<AdditiveDecomposition, NotAdditive>;

inline bool is_additive(const DecomposeResult& r) {
  return std::holds_alternative<AdditiveDecomposition>(r);
}

/// Solves A w = l per stratum.  When every stratum lies in im(A), returns
/// the canonical decomposition (free coordinates zero) plus the recorded
/// free directions; otherwise returns the exact residual certificate.
inline DecomposeResult decompose(const LossTensor& loss, Variant variant) {
  const Spaces& spaces = loss.spaces();
  const StructureMatrix sm = build_structure_matrix(spaces, variant);
  const std::size_t wcols = spaces.weight_cols();
  const std::size_t icols = spaces.intercept_cols();

  std::vector<RatVec> weights, intercepts;
  std::vector<FreeParam> free_params;
  std::vector<RatVec> free_dirs;
  bool additive = true;
  std::vector<RatVec> residuals(spaces.num_strata());
  std::size_t first_bad = 0;

  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    const linalg::LinearSolve sol = linalg::solve_general(sm.m, loss.stratum_values(s));
    if (!sol.consistent) {
      if (additive) first_bad = s;
      additive = false;
      residuals[s] = linalg::image_residual(sm.m, loss.stratum_values(s));
      continue;
    }
    residuals[s].assign(spaces.joint_size(), Rat(0));
    RatVec w(sol.particular.begin(), sol.particular.begin() + static_cast<std::ptrdiff_t>(wcols));
    RatVec v(icols, Rat(0));
    if (variant == Variant::full)
      for (std::size_t j = 0; j < icols; ++j) v[j] = sol.particular[wcols + j];
    weights.push_back(std::move(w));
    intercepts.push_back(std::move(v));
    if (s == 0) {
      for (std::size_t i = 0; i < sol.free_cols.size(); ++i) {
        free_params.push_back(FreeParam{sol.free_cols[i],
                                        column_label(spaces, sol.free_cols[i]),
                                        "t" + std::to_string(i)});
        RatVec dir(wcols + icols, Rat(0));
        for (std::size_t j = 0; j < sol.kernel[i].size(); ++j) dir[j] = sol.kernel[i][j];
        free_dirs.push_back(std::move(dir));
      }
    }
  }

  if (!additive) return NotAdditive{spaces, variant, std::move(residuals), first_bad};
  return AdditiveDecomposition(spaces, variant, std::move(weights), std::move(intercepts),
                               std::move(free_params), std::move(free_dirs));
}

// ---------------------------------------------------------------------------
// Identifiability regimes
// ---------------------------------------------------------------------------

enum class Regime { exact, constant_only, unidentifiable };

inline std::string regime_name(Regime r) {
  switch (r) {
    case Regime::exact: return "exact";
    case Regime::constant_only: return "constant-only";
    case Regime::unidentifiable: return "unidentifiable";
  }
  return "?";
}

struct RegimeLabel {
  Regime regime;
  std::optional<AdditiveDecomposition> witness;  // exact / constant-only
  std::optional<NotAdditive> residual;           // unidentifiable
};

/// Exact if the restricted system solves, constant-only if only the full
/// one does, unidentifiable otherwise.  A multi-stratum tensor gets the
/// weakest regime across its strata.
inline RegimeLabel classify(const LossTensor& loss) {
  DecomposeResult restricted = decompose(loss, Variant::restricted);
  if (is_additive(restricted))
    return RegimeLabel{Regime::exact, std::get<AdditiveDecomposition>(std::move(restricted)),
                       std::nullopt};
  DecomposeResult full = decompose(loss, Variant::full);
  if (is_additive(full))
    return RegimeLabel{Regime::constant_only,
                       std::get<AdditiveDecomposition>(std::move(full)), std::nullopt};
  return RegimeLabel{Regime::unidentifiable, std::nullopt,
                     std::get<NotAdditive>(std::move(full))};
}

// ---------------------------------------------------------------------------
// Binary (K = M = 2) closed forms
// ---------------------------------------------------------------------------

/// Per-decision interaction contrast l(d;0,0) + l(d;1,1) - l(d;0,1) - l(d;1,0).
/// Vanishing for both decisions is the exact-identification restriction;
/// equality across decisions is the constant-identification restriction.
inline Rat interaction_contrast(const LossTensor& loss, std::size_t s, int d) {
  if (loss.spaces().K() != 2 || loss.spaces().M() != 2)
    throw PreconditionError("interaction contrast requires K=2, M=2");
  return loss.at(s, d, std::vector<int>{0, 0}) + loss.at(s, d, std::vector<int>{1, 1}) -
         loss.at(s, d, std::vector<int>{0, 1}) - loss.at(s, d, std::vector<int>{1, 0});
}

inline bool exact_restriction_holds(const LossTensor& loss) {
  for (std::size_t s = 0; s < loss.spaces().num_strata(); ++s)
    for (int d = 0; d < 2; ++d)
      if (interaction_contrast(loss, s, d) != 0) return false;
  return true;
}

inline bool constant_restriction_holds(const LossTensor& loss) {
  for (std::size_t s = 0; s < loss.spaces().num_strata(); ++s)
    if (interaction_contrast(loss, s, 0) != interaction_contrast(loss, s, 1)) return false;
  return true;
}

/// Closed-form five-parameter solution family for K=M=2 losses satisfying
/// the constant-identification restriction.  Free parameters:
///   a = omega0(1,1), b = omega1(0,1),
///   c = varpi(0,1),  d = varpi(1,0),  e = varpi(1,1).
/// Every evaluation reconstructs the source tensor exactly; the same
/// parameter values are applied to every stratum.
class BinaryWeightFamily {
 public:
  static BinaryWeightFamily create(const LossTensor& loss) {
    if (loss.spaces().K() != 2 || loss.spaces().M() != 2)
      throw PreconditionError("binary weight family requires K=2, M=2");
    if (!constant_restriction_holds(loss))
      throw RestrictionViolatedError(
          "loss violates the cross-column sum restriction; no additive family exists");
    return BinaryWeightFamily(loss);
  }

  static std::vector<FreeParam> parameter_names() {
    return {
        {0, weight_label(0, 1, 1), "a"}, {1, weight_label(1, 0, 1), "b"},
        {2, "varpi(0,1)", "c"},          {3, "varpi(1,0)", "d"},
        {4, "varpi(1,1)", "e"},
    };
  }

  AdditiveDecomposition evaluate(const Rat& a, const Rat& b, const Rat& c, const Rat& d,
                                 const Rat& e) const {
    const Spaces& spaces = loss_.spaces();
    std::vector<RatVec> weights(spaces.num_strata(), RatVec(spaces.weight_cols(), Rat(0)));
    std::vector<RatVec> intercept(spaces.num_strata(), RatVec(spaces.intercept_cols(), Rat(0)));
    for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
      auto L = [&](int dd, int y0, int y1) { return loss_.at(s, dd, std::vector<int>{y0, y1}); };
      RatVec& w = weights[s];
      RatVec& v = intercept[s];
      w[spaces.weight_index(0, 1, 1)] = a;
      w[spaces.weight_index(1, 0, 1)] = b;
      w[spaces.weight_index(0, 0, 0)] = L(0, 0, 1) - b - c;
      w[spaces.weight_index(0, 0, 1)] = L(0, 1, 1) - b - e;
      w[spaces.weight_index(1, 1, 0)] = L(1, 1, 0) - a - d;
      w[spaces.weight_index(1, 1, 1)] = L(1, 1, 1) - a - e;
      w[spaces.weight_index(0, 1, 0)] = L(1, 0, 1) - L(1, 1, 1) + a - c + e;
      w[spaces.weight_index(1, 0, 0)] = L(0, 1, 0) - L(0, 1, 1) + b - d + e;
      v[spaces.pack_outcomes({0, 1})] = c;
      v[spaces.pack_outcomes({1, 0})] = d;
      v[spaces.pack_outcomes({1, 1})] = e;
      v[spaces.pack_outcomes({0, 0})] = L(1, 0, 0) - L(1, 1, 0) - L(1, 0, 1) + L(1, 1, 1) + c + d - e;
    }
    return AdditiveDecomposition(spaces, Variant::full, std::move(weights), std::move(intercept),
                                 parameter_names());
  }

 private:
  explicit BinaryWeightFamily(LossTensor loss) : loss_(std::move(loss)) {}
  LossTensor loss_;
};

inline BinaryWeightFamily binary_weight_family(const LossTensor& loss) {
  return BinaryWeightFamily::create(loss);
}

}  // namespace cfl
