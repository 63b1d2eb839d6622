#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cfl/errors.hpp"
#include "cfl/json_util.hpp"
#include "cfl/linalg.hpp"
#include "cfl/rational.hpp"
#include "cfl/rng.hpp"
#include "cfl/spaces.hpp"

namespace cfl {

enum class NumericMode { rational, floating };

/// Per-stratum joint law of (D*, Y(0), ..., Y(K-1)) plus the observed-
/// decision propensity and stratum weights.  The observed decision D is
/// generated from the propensity independently of (D*, Y(.)) given the
/// stratum, so unconfoundedness holds structurally; overlap is enforced at
/// construction and never clipped.
class JointModel {
 public:
  static constexpr const char* kDefaultEta = "1/100";

  JointModel(Spaces spaces, std::vector<RatVec> p, std::vector<RatVec> propensity,
             RatVec stratum_weights, Rat eta = parse_rational(kDefaultEta),
             NumericMode mode = NumericMode::rational)
      : spaces_(std::move(spaces)),
        p_(std::move(p)),
        propensity_(std::move(propensity)),
        stratum_weights_(std::move(stratum_weights)),
        eta_(std::move(eta)) {
    if (eta_ <= 0) throw BadDimensionsError("overlap eta must be positive");
    validate_simplex(stratum_weights_, spaces_.num_strata(), "stratum weights", mode,
                     /*allow_zero=*/true);
    if (p_.size() != spaces_.num_strata() || propensity_.size() != spaces_.num_strata())
      throw BadDimensionsError("model needs one p-vector and one propensity per stratum");
    for (std::size_t s = 0; s < spaces_.num_strata(); ++s) {
      validate_simplex(p_[s], spaces_.joint_size(), "p-vector", mode, /*allow_zero=*/true);
      validate_simplex(propensity_[s], static_cast<std::size_t>(spaces_.K()), "propensity", mode,
                       /*allow_zero=*/false);
      for (const Rat& pr : propensity_[s])
        if (pr <= eta_ || pr >= Rat(1) - eta_)
          throw BadDimensionsError("propensity violates overlap: " + rat_to_string(pr) +
                                   " outside (" + rat_to_string(eta_) + ", 1-" +
                                   rat_to_string(eta_) + ")");
    }
  }

  const Spaces& spaces() const { return spaces_; }
  const Rat& eta() const { return eta_; }
  const RatVec& joint(std::size_t s) const { return p_[spaces_.check_stratum(s)]; }
  const RatVec& propensity(std::size_t s) const { return propensity_[spaces_.check_stratum(s)]; }
  const RatVec& stratum_weights() const { return stratum_weights_; }

  const Rat& prob(std::size_t s, int d_star, std::size_t outcome_code) const {
    return p_[spaces_.check_stratum(s)][spaces_.joint_index(d_star, outcome_code)];
  }

  /// Marginal law of the potential-outcome vector: Pr(Y(.) = y | x).
  RatVec outcome_joint(std::size_t s) const {
    RatVec nu(spaces_.outcome_vectors(), Rat(0));
    for (int d = 0; d < spaces_.K(); ++d)
      for (std::size_t code = 0; code < spaces_.outcome_vectors(); ++code)
        nu[code] += prob(s, d, code);
    return nu;
  }

  /// Pr(Y(k) = y | x) as a K x M table.
  RatMat potential_marginals(std::size_t s) const {
    RatMat out(static_cast<std::size_t>(spaces_.K()),
               RatVec(static_cast<std::size_t>(spaces_.M()), Rat(0)));
    for (int d = 0; d < spaces_.K(); ++d)
      for (std::size_t code = 0; code < spaces_.outcome_vectors(); ++code) {
        const std::vector<int> y = spaces_.unpack_outcomes(code);
        for (int k = 0; k < spaces_.K(); ++k)
          out[static_cast<std::size_t>(k)][static_cast<std::size_t>(y[static_cast<std::size_t>(k)])] +=
              prob(s, d, code);
      }
    return out;
  }

 private:
  static void validate_simplex(const RatVec& v, std::size_t size, const std::string& what,
                               NumericMode mode, bool allow_zero) {
    if (v.size() != size)
      throw BadDimensionsError(what + " must have " + std::to_string(size) + " entries");
    Rat sum(0);
    for (const Rat& x : v) {
      if (x < 0 || (!allow_zero && x == 0))
        throw BadDimensionsError(what + " entries must be " +
                                 (allow_zero ? "nonnegative" : "positive"));
      sum += x;
    }
    if (mode == NumericMode::rational) {
      if (sum != 1) throw BadDimensionsError(what + " must sum to 1, got " + rat_to_string(sum));
    } else {
      // Floating-entry documents may carry rounded probabilities; accept a
      // 1e-12 defect but never a different total mass.
      const Rat defect = rat_abs(sum - 1);
      if (defect * 1000000000000LL > 1)
        throw BadDimensionsError(what + " must sum to 1 within 1e-12");
    }
  }

  Spaces spaces_;
  std::vector<RatVec> p_;           // per stratum, length K*M^K
  std::vector<RatVec> propensity_;  // per stratum, length K
  RatVec stratum_weights_;
  Rat eta_;
};

// ---------------------------------------------------------------------------
// Observable views and the marginal matrix C
// ---------------------------------------------------------------------------

enum class ViewVariant { marginals_only, extended };

/// Zero/one matrix mapping the joint simplex to observable marginals:
/// row (d, k, y) hits column (d', y') iff d' = d and y'_k = y; the
/// extended variant appends one row per outcome vector.
struct MarginalMatrix {
  Spaces spaces;
  ViewVariant variant;
  RatMat m;

  std::size_t rows() const { return m.size(); }
  std::size_t cols() const { return m.empty() ? 0 : m[0].size(); }
};

inline MarginalMatrix build_marginal_matrix(const Spaces& spaces, ViewVariant variant) {
  const std::size_t rows =
      variant == ViewVariant::extended ? spaces.extended_rows() : spaces.marginal_rows();
  RatMat m = linalg::zeros(rows, spaces.joint_size());
  for (int d = 0; d < spaces.K(); ++d)
    for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
      const std::size_t col = spaces.joint_index(d, code);
      const std::vector<int> y = spaces.unpack_outcomes(code);
      for (int k = 0; k < spaces.K(); ++k)
        m[spaces.marginal_index(d, k, y[static_cast<std::size_t>(k)])][col] = 1;
      if (variant == ViewVariant::extended) m[spaces.marginal_rows() + code][col] = 1;
    }
  return MarginalMatrix{spaces, variant, std::move(m)};
}

/// Exact basis of ker(C).  Every basis vector has zero block sums
/// sum_{y_{-k}} v(d, y) and, as a consequence, zero total sum.
inline std::vector<RatVec> kernel_basis(const MarginalMatrix& matrix) {
  return linalg::kernel_basis(matrix.m);
}

/// The q-vector of observable marginals Pr(D* = d, Y(k) = y | x) per
/// stratum (rows ordered by (d, k, y)), optionally extended with the joint
/// outcome block Pr(Y(.) = y | x).  Carries the stratum weights so risk
/// expectations over X stay computable.
class ObservableView {
 public:
  ObservableView(Spaces spaces, ViewVariant variant, std::vector<RatVec> q, RatVec stratum_weights,
                 bool routes_checked)
      : spaces_(std::move(spaces)),
        variant_(variant),
        q_(std::move(q)),
        stratum_weights_(std::move(stratum_weights)),
        routes_checked_(routes_checked) {
    const std::size_t expected =
        variant_ == ViewVariant::extended ? spaces_.extended_rows() : spaces_.marginal_rows();
    if (q_.size() != spaces_.num_strata())
      throw BadDimensionsError("observable view needs one q-vector per stratum");
    for (const RatVec& block : q_)
      if (block.size() != expected)
        throw BadDimensionsError("q-vector has wrong length for its variant");
  }

  const Spaces& spaces() const { return spaces_; }
  ViewVariant variant() const { return variant_; }
  const RatVec& q(std::size_t s) const { return q_[spaces_.check_stratum(s)]; }
  const RatVec& stratum_weights() const { return stratum_weights_; }
  bool routes_checked() const { return routes_checked_; }

  const Rat& marginal(std::size_t s, int d, int k, int y) const {
    return q_[spaces_.check_stratum(s)][spaces_.marginal_index(d, k, y)];
  }

  const Rat& outcome_block(std::size_t s, std::size_t code) const {
    if (variant_ != ViewVariant::extended)
      throw NeedExtendedViewError("joint outcome block requires the extended view");
    return q_[spaces_.check_stratum(s)][spaces_.marginal_rows() + code];
  }

  /// Pr(D* = d | x), computed from any k-block; valid q-vectors agree
  /// across blocks.
  Rat decision_marginal(std::size_t s, int d) const {
    Rat acc(0);
    for (int y = 0; y < spaces_.M(); ++y) acc += marginal(s, d, 0, y);
    return acc;
  }

  /// Pr(Y(k) = y | x) with D* marginalized out.
  Rat potential_marginal(std::size_t s, int k, int y) const {
    Rat acc(0);
    for (int d = 0; d < spaces_.K(); ++d) acc += marginal(s, d, k, y);
    return acc;
  }

 private:
  Spaces spaces_;
  ViewVariant variant_;
  std::vector<RatVec> q_;
  RatVec stratum_weights_;
  bool routes_checked_;
};

/// Computes q from the joint law by direct summation over y_{-k}.
///
/// When `check_routes` is set, the observational route is also evaluated:
/// the observed-data table Pr(D* = d, Y = y, D = k | x) implied by the
/// propensity is formed and conditioned on D = k, and the two routes are
/// asserted to coincide exactly.  Under consistency and unconfoundedness
/// they are equal by construction; the check makes that executable.
inline ObservableView marginalize(const JointModel& model, ViewVariant variant,
                                  bool check_routes = true) {
  const Spaces& spaces = model.spaces();
  const std::size_t rows =
      variant == ViewVariant::extended ? spaces.extended_rows() : spaces.marginal_rows();
  std::vector<RatVec> q(spaces.num_strata(), RatVec(rows, Rat(0)));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    for (int d = 0; d < spaces.K(); ++d)
      for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
        const Rat& mass = model.prob(s, d, code);
        if (mass == 0) continue;
        const std::vector<int> y = spaces.unpack_outcomes(code);
        for (int k = 0; k < spaces.K(); ++k)
          q[s][spaces.marginal_index(d, k, y[static_cast<std::size_t>(k)])] += mass;
        if (variant == ViewVariant::extended) q[s][spaces.marginal_rows() + code] += mass;
      }
    if (check_routes) {
      // Observational route: Pr(D*=d, Y=y | D=k, x) from the joint observed table.
      for (int k = 0; k < spaces.K(); ++k) {
        const Rat& prop = model.propensity(s)[static_cast<std::size_t>(k)];
        for (int d = 0; d < spaces.K(); ++d)
          for (int y = 0; y < spaces.M(); ++y) {
            Rat observed(0);
            for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code)
              if (spaces.unpack_outcomes(code)[static_cast<std::size_t>(k)] == y)
                observed += model.prob(s, d, code) * prop;
            if (observed / prop != q[s][spaces.marginal_index(d, k, y)])
              throw DimensionMismatchError(
                  "observational and definitional marginal routes disagree");
          }
      }
    }
  }
  return ObservableView(spaces, variant, std::move(q), model.stratum_weights(),
                        check_routes);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct Record {
  int x = 0;       // stratum index
  int d_star = 0;  // evaluated decision
  int d = 0;       // observed decision
  int y = 0;       // realized outcome Y = Y(D)
};

namespace detail {

inline std::size_t sample_cumulative(const std::vector<double>& cumulative, double u) {
  std::size_t lo = 0, hi = cumulative.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (u < cumulative[mid]) hi = mid; else lo = mid + 1;
  }
  return lo;
}

inline std::vector<double> cumulative_of(const RatVec& probs) {
  std::vector<double> out(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += to_double(probs[i]);
    out[i] = acc;
  }
  out.back() = 1.0;  // guard against rounding at the top end
  return out;
}

}  // namespace detail

/// n IID draws of (stratum, D*, Y(.)), then D from the propensity
/// independently of everything else, emitting y = y_D.  Deterministic in
/// (model, n, seed): stratum choices come from one derived stream, and
/// each stratum consumes its own stream indexed by occurrence count.
inline std::vector<Record> simulate_records(const JointModel& model, std::size_t n,
                                            std::uint64_t seed) {
  if (n < 1) throw PreconditionError("simulate_records requires n >= 1");
  const Spaces& spaces = model.spaces();
  const CounterRng root(seed);
  CounterRng stratum_stream = root.stream(0);

  std::vector<std::vector<double>> joint_cdf(spaces.num_strata());
  std::vector<std::vector<double>> prop_cdf(spaces.num_strata());
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    joint_cdf[s] = detail::cumulative_of(model.joint(s));
    prop_cdf[s] = detail::cumulative_of(model.propensity(s));
  }
  const std::vector<double> weight_cdf = detail::cumulative_of(model.stratum_weights());

  std::vector<std::uint64_t> occurrence(spaces.num_strata(), 0);
  std::vector<Record> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = detail::sample_cumulative(weight_cdf, stratum_stream.next_unit());
    CounterRng cell = root.stream(1 + s);
    const std::uint64_t occ = occurrence[s]++;
    const double u_joint = static_cast<double>(cell.at(2 * occ) >> 11) * 0x1.0p-53;
    const double u_prop = static_cast<double>(cell.at(2 * occ + 1) >> 11) * 0x1.0p-53;
    const std::size_t joint_idx = detail::sample_cumulative(joint_cdf[s], u_joint);
    const int d_star = static_cast<int>(joint_idx / spaces.outcome_vectors());
    const std::size_t code = joint_idx % spaces.outcome_vectors();
    const int d = static_cast<int>(detail::sample_cumulative(prop_cdf[s], u_prop));
    const std::vector<int> y = spaces.unpack_outcomes(code);
    records.push_back(Record{static_cast<int>(s), d_star, d, y[static_cast<std::size_t>(d)]});
  }
  return records;
}

// ---------------------------------------------------------------------------
// Distribution-file schema
//
// {
//   "K": 2, "M": 2,
//   "eta": "1/100",                           (optional)
//   "strata": [
//     { "label": "x0", "weight": "1",
//       "propensity": ["1/2", "1/2"],
//       "p": [ { "d_star": 0, "y": [0,0], "prob": "1/8" }, ... ] }
//   ]
// }
//
// Record files: header "x,d_star,d,y", one integer record per line.
// ---------------------------------------------------------------------------

inline JointModel load_model(const std::string& text, NumericMode mode = NumericMode::rational) {
  using jsonio::json;
  const json doc = jsonio::parse_document(text, "model file");
  jsonio::reject_unknown_fields(doc, {"K", "M", "eta", "strata"}, "model file");
  const int K = jsonio::require_int(doc, "K", "model file");
  const int M = jsonio::require_int(doc, "M", "model file");
  Rat eta = parse_rational(JointModel::kDefaultEta);
  if (doc.contains("eta")) eta = jsonio::require_rational(doc, "eta", "model file");
  const json& strata = jsonio::require_field(doc, "strata", "model file");
  if (!strata.is_array() || strata.empty())
    throw SchemaError("model file: 'strata' must be a nonempty array");

  std::vector<std::string> labels;
  for (const json& s : strata) labels.push_back(jsonio::require_string(s, "label", "stratum"));
  const Spaces spaces(K, M, labels);

  std::vector<RatVec> p(spaces.num_strata(), RatVec(spaces.joint_size(), Rat(0)));
  std::vector<RatVec> propensity(spaces.num_strata());
  RatVec weights(spaces.num_strata(), Rat(0));
  std::size_t si = 0;
  for (const json& s : strata) {
    jsonio::reject_unknown_fields(s, {"label", "weight", "propensity", "p"}, "stratum");
    weights[si] = jsonio::require_rational(s, "weight", "stratum");
    const json& prop = jsonio::require_field(s, "propensity", "stratum");
    if (!prop.is_array() || static_cast<int>(prop.size()) != K)
      throw SchemaError("stratum: 'propensity' must list K probabilities");
    for (const json& v : prop) {
      if (v.is_number_integer()) propensity[si].push_back(Rat(BigInt(v.get<long long>())));
      else if (v.is_string()) propensity[si].push_back(parse_rational(v.get<std::string>()));
      else throw SchemaError("stratum: propensity entries must be rational strings");
    }
    const json& cells = jsonio::require_field(s, "p", "stratum");
    if (!cells.is_array()) throw SchemaError("stratum: 'p' must be an array");
    std::vector<bool> seen(spaces.joint_size(), false);
    for (const json& cell : cells) {
      jsonio::reject_unknown_fields(cell, {"d_star", "y", "prob"}, "p entry");
      const int d = jsonio::require_int(cell, "d_star", "p entry");
      const std::vector<int> y = jsonio::require_int_array(cell, "y", "p entry");
      spaces.check_decision(d);
      const std::size_t idx = spaces.joint_index(d, y);
      if (seen[idx]) throw DuplicateEntryError("duplicate p entry at d_star=" + std::to_string(d));
      seen[idx] = true;
      p[si][idx] = jsonio::require_rational(cell, "prob", "p entry");
    }
    for (std::size_t idx = 0; idx < seen.size(); ++idx)
      if (!seen[idx])
        throw MissingEntryError("missing p entry at joint index " + std::to_string(idx) +
                                " in stratum '" + labels[si] + "'");
    ++si;
  }
  return JointModel(spaces, std::move(p), std::move(propensity), std::move(weights),
                    std::move(eta), mode);
}

inline jsonio::json model_to_json(const JointModel& model) {
  using jsonio::json;
  const Spaces& spaces = model.spaces();
  json doc;
  doc["K"] = spaces.K();
  doc["M"] = spaces.M();
  doc["eta"] = rat_to_string(model.eta());
  doc["strata"] = json::array();
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    json stratum;
    stratum["label"] = spaces.strata()[s];
    stratum["weight"] = rat_to_string(model.stratum_weights()[s]);
    stratum["propensity"] = json::array();
    for (const Rat& pr : model.propensity(s)) stratum["propensity"].push_back(rat_to_string(pr));
    stratum["p"] = json::array();
    for (int d = 0; d < spaces.K(); ++d)
      for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
        json cell;
        cell["d_star"] = d;
        cell["y"] = spaces.unpack_outcomes(code);
        cell["prob"] = rat_to_string(model.prob(s, d, code));
        stratum["p"].push_back(std::move(cell));
      }
    doc["strata"].push_back(std::move(stratum));
  }
  return doc;
}

inline std::string records_to_csv(const std::vector<Record>& records) {
  std::ostringstream out;
  out << "x,d_star,d,y\n";
  for (const Record& r : records)
    out << r.x << "," << r.d_star << "," << r.d << "," << r.y << "\n";
  return out.str();
}

inline std::vector<Record> parse_records_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "x,d_star,d,y")
    throw SchemaError("record file must start with header 'x,d_star,d,y'");
  std::vector<Record> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Record r;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream row(line);
    if (!(row >> r.x >> c1 >> r.d_star >> c2 >> r.d >> c3 >> r.y) || c1 != ',' || c2 != ',' ||
        c3 != ',')
      throw SchemaError("bad record on line " + std::to_string(line_no) + ": '" + line + "'");
    out.push_back(r);
  }
  return out;
}

}  // namespace cfl
