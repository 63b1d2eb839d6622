#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfl/additivity.hpp"
#include "cfl/distributions.hpp"
#include "cfl/errors.hpp"
#include "cfl/loss.hpp"
#include "cfl/parallel.hpp"
#include "cfl/rational.hpp"

namespace cfl {

/// Risk computation output.  `conditional`/`total` hold the full risk when
/// it is known; identified parts and the constant term are populated by
/// identification-based computations.  A missing constant (marginals-only
/// view with a nonzero intercept) leaves `has_level` false: only risk
/// differences are meaningful then.
struct RiskReport {
  RatVec conditional;       // per stratum
  Rat total = 0;
  bool has_level = true;

  bool has_identified = false;
  RatVec identified_part;   // per stratum
  Rat identified_total = 0;
  std::vector<std::optional<Rat>> constant_part;
  std::optional<Rat> constant_total;
  bool exact = false;       // intercept identically zero
};

/// Ground-truth oracle: needs the full joint law.
/// R_x = sum_{d, y} l(d; y, x) Pr(D* = d, Y(.) = y | x).
inline RiskReport true_risk(const LossTensor& loss, const JointModel& model) {
  if (!loss.spaces().same_shape(model.spaces()))
    throw DimensionMismatchError("loss and model describe different spaces");
  const Spaces& spaces = loss.spaces();
  RiskReport report;
  report.conditional.assign(spaces.num_strata(), Rat(0));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    Rat acc(0);
    const RatVec& l = loss.stratum_values(s);
    const RatVec& p = model.joint(s);
    for (std::size_t i = 0; i < l.size(); ++i)
      if (l[i] != 0 && p[i] != 0) acc += l[i] * p[i];
    report.conditional[s] = acc;
    report.total += model.stratum_weights()[s] * acc;
  }
  return report;
}

/// Identification formula: the weight term uses only the observable
/// marginals Pr(D* = d, Y(k) = y | x); the constant term needs the joint
/// outcome block of the extended view whenever the intercept is nonzero.
inline RiskReport identified_risk(const AdditiveDecomposition& decomp, const ObservableView& view,
                                  bool require_level = true,
                                  bool require_route_consistency = false) {
  if (!decomp.spaces().same_shape(view.spaces()))
    throw DimensionMismatchError("decomposition and view describe different spaces");
  if (require_route_consistency && !view.routes_checked())
    throw PreconditionError("view was built without the propensity-route consistency check");

  const Spaces& spaces = decomp.spaces();
  const bool intercept_zero = decomp.intercept_zero();
  if (require_level && !intercept_zero && view.variant() != ViewVariant::extended)
    throw NeedExtendedViewError(
        "nonzero intercept: risk level needs the extended view (differences do not)");

  RiskReport report;
  report.has_identified = true;
  report.exact = intercept_zero;
  report.identified_part.assign(spaces.num_strata(), Rat(0));
  report.constant_part.assign(spaces.num_strata(), std::nullopt);
  report.conditional.assign(spaces.num_strata(), Rat(0));

  bool level_known = true;
  Rat constant_total(0);
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    Rat ident(0);
    for (int d = 0; d < spaces.K(); ++d)
      for (int k = 0; k < spaces.K(); ++k)
        for (int y = 0; y < spaces.M(); ++y) {
          const Rat& w = decomp.omega(s, k, d, y);
          if (w != 0) ident += w * view.marginal(s, d, k, y);
        }
    report.identified_part[s] = ident;
    report.identified_total += view.stratum_weights()[s] * ident;

    if (intercept_zero) {
      report.constant_part[s] = Rat(0);
    } else if (view.variant() == ViewVariant::extended) {
      Rat c(0);
      for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
        const Rat& v = decomp.varpi(s, code);
        if (v != 0) c += v * view.outcome_block(s, code);
      }
      report.constant_part[s] = c;
    } else {
      level_known = false;
    }
    if (report.constant_part[s]) {
      constant_total += view.stratum_weights()[s] * *report.constant_part[s];
      report.conditional[s] = ident + *report.constant_part[s];
    }
  }
  report.has_level = level_known;
  if (level_known) {
    report.constant_total = constant_total;
    report.total = report.identified_total + constant_total;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Binary-outcome accuracy/difficulty decomposition
// ---------------------------------------------------------------------------

/// zeta_k(d, x) = omega_k(d,1,x) - omega_k(d,0,x); xi(d, x) = sum_k omega_k(d,0,x).
/// Conditional risk =   sum_d zeta_d(d) Pr(D*=d, Y(d)=1)
///                    + sum_d sum_{k!=d} zeta_k(d) Pr(D*=d, Y(k)=1)
///                    + sum_d xi(d) Pr(D*=d)  + C(x).
struct BinaryDecomposition {
  Spaces spaces;
  std::vector<RatMat> zeta;        // per stratum: zeta[k][d]
  std::vector<RatVec> xi;          // per stratum: xi[d]
  std::vector<RatVec> accuracy;    // Pr(D*=d, Y(d)=1 | x)
  std::vector<RatMat> difficulty;  // difficulty[d][k] = Pr(D*=d, Y(k)=1 | x), k != d
  std::vector<RatVec> baseline;    // Pr(D*=d | x)
  std::vector<std::optional<Rat>> constant;
  RatVec reassembled;              // conditional risk (identified part when constant unknown)
  bool constant_known = true;
};

inline BinaryDecomposition binary_decomposition(const AdditiveDecomposition& decomp,
                                                const ObservableView& view) {
  const Spaces& spaces = decomp.spaces();
  if (spaces.M() != 2) throw OutcomeNotBinaryError("binary decomposition requires M = 2");
  if (!spaces.same_shape(view.spaces()))
    throw DimensionMismatchError("decomposition and view describe different spaces");

  const std::size_t K = static_cast<std::size_t>(spaces.K());
  BinaryDecomposition out{spaces, {}, {}, {}, {}, {}, {}, {}, true};
  out.zeta.assign(spaces.num_strata(), RatMat(K, RatVec(K, Rat(0))));
  out.xi.assign(spaces.num_strata(), RatVec(K, Rat(0)));
  out.accuracy.assign(spaces.num_strata(), RatVec(K, Rat(0)));
  out.difficulty.assign(spaces.num_strata(), RatMat(K, RatVec(K, Rat(0))));
  out.baseline.assign(spaces.num_strata(), RatVec(K, Rat(0)));
  out.constant.assign(spaces.num_strata(), std::nullopt);
  out.reassembled.assign(spaces.num_strata(), Rat(0));

  const bool intercept_zero = decomp.intercept_zero();
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    for (int k = 0; k < spaces.K(); ++k)
      for (int d = 0; d < spaces.K(); ++d) {
        out.zeta[s][static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] =
            decomp.omega(s, k, d, 1) - decomp.omega(s, k, d, 0);
        out.xi[s][static_cast<std::size_t>(d)] += decomp.omega(s, k, d, 0);
      }
    for (int d = 0; d < spaces.K(); ++d) {
      out.baseline[s][static_cast<std::size_t>(d)] = view.decision_marginal(s, d);
      out.accuracy[s][static_cast<std::size_t>(d)] = view.marginal(s, d, d, 1);
      for (int k = 0; k < spaces.K(); ++k)
        if (k != d)
          out.difficulty[s][static_cast<std::size_t>(d)][static_cast<std::size_t>(k)] =
              view.marginal(s, d, k, 1);
    }
    if (intercept_zero) {
      out.constant[s] = Rat(0);
    } else if (view.variant() == ViewVariant::extended) {
      Rat c(0);
      for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code)
        if (decomp.varpi(s, code) != 0) c += decomp.varpi(s, code) * view.outcome_block(s, code);
      out.constant[s] = c;
    } else {
      out.constant_known = false;
    }

    Rat acc(0);
    for (int d = 0; d < spaces.K(); ++d) {
      const std::size_t du = static_cast<std::size_t>(d);
      acc += out.zeta[s][du][du] * out.accuracy[s][du];
      for (int k = 0; k < spaces.K(); ++k)
        if (k != d)
          acc += out.zeta[s][static_cast<std::size_t>(k)][du] * out.difficulty[s][du][static_cast<std::size_t>(k)];
      acc += out.xi[s][du] * out.baseline[s][du];
    }
    if (out.constant[s]) acc += *out.constant[s];
    out.reassembled[s] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

/// Per-stratum decision rule: deterministic lookup table or a stochastic
/// row over decisions.  Policies never depend on potential outcomes.
class Policy {
 public:
  static Policy deterministic(const Spaces& spaces, std::vector<int> decisions) {
    if (decisions.size() != spaces.num_strata())
      throw BadDimensionsError("policy needs one decision per stratum");
    for (int d : decisions) spaces.check_decision(d);
    Policy p;
    p.decisions_ = std::move(decisions);
    return p;
  }

  static Policy stochastic(const Spaces& spaces, std::vector<RatVec> rows) {
    if (rows.size() != spaces.num_strata())
      throw BadDimensionsError("policy needs one probability row per stratum");
    for (const RatVec& row : rows) {
      if (row.size() != static_cast<std::size_t>(spaces.K()))
        throw BadDimensionsError("policy row must have K entries");
      Rat sum(0);
      for (const Rat& v : row) {
        if (v < 0) throw BadDimensionsError("policy probabilities must be nonnegative");
        sum += v;
      }
      if (sum != 1) throw BadDimensionsError("policy rows must sum to 1");
    }
    Policy p;
    p.rows_ = std::move(rows);
    return p;
  }

  bool is_deterministic() const { return !decisions_.empty(); }

  int decision(std::size_t s) const { return decisions_.at(s); }

  Rat prob(std::size_t s, int d) const {
    if (is_deterministic()) return decisions_.at(s) == d ? Rat(1) : Rat(0);
    return rows_.at(s).at(static_cast<std::size_t>(d));
  }

  const std::vector<int>& decisions() const { return decisions_; }

 private:
  std::vector<int> decisions_;
  std::vector<RatVec> rows_;
};

/// Embeds a policy over a fixed potential-outcome law: D* is drawn from
/// the policy independently of Y(.) given the stratum, so two embeddings
/// over the same law share every potential-outcome functional.
inline JointModel embed_policy(const Policy& policy, const Spaces& spaces,
                               const std::vector<RatVec>& outcome_joint,
                               const RatVec& stratum_weights,
                               std::vector<RatVec> propensity = {}) {
  if (outcome_joint.size() != spaces.num_strata())
    throw BadDimensionsError("need one outcome law per stratum");
  if (propensity.empty())
    propensity.assign(spaces.num_strata(),
                      RatVec(static_cast<std::size_t>(spaces.K()),
                             Rat(1) / Rat(spaces.K())));
  std::vector<RatVec> p(spaces.num_strata(), RatVec(spaces.joint_size(), Rat(0)));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    if (outcome_joint[s].size() != spaces.outcome_vectors())
      throw BadDimensionsError("outcome law must have M^K entries");
    for (int d = 0; d < spaces.K(); ++d) {
      const Rat pd = policy.prob(s, d);
      if (pd == 0) continue;
      for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code)
        p[s][spaces.joint_index(d, code)] = pd * outcome_joint[s][code];
    }
  }
  return JointModel(spaces, std::move(p), std::move(propensity), stratum_weights);
}

// ---------------------------------------------------------------------------
// Policy optimization
// ---------------------------------------------------------------------------

struct PolicySearchResult {
  Policy policy;
  Rat score = 0;            // identified-term expectation of the argmin rule
  RatVec stratum_scores;    // identified term per stratum under the argmin
};

namespace detail {

inline std::size_t checked_rule_count(int K, std::size_t strata) {
  // Spec guard: |X| <= 12 for K=2 and <= 7 for K=3, i.e. K^|X| <= 4096.
  double rules = 1.0;
  for (std::size_t s = 0; s < strata; ++s) {
    rules *= K;
    if (rules > 4096.0)
      throw SearchSpaceTooLargeError("deterministic rule space exceeds the enumeration guard");
  }
  return static_cast<std::size_t>(rules);
}

}  // namespace detail

/// Enumerates every deterministic rule pi: X -> D and scores it by the
/// identified term with Pr(D* = d | x) = 1{pi(x) = d}:
///   score(pi) = sum_x w(x) sum_{k,y} omega_k(pi(x), y, x) Pr(Y(k) = y | x).
/// Ties break toward the lexicographically smallest decision vector.
/// The minimum over stochastic rules is attained at a deterministic one,
/// risk being affine in each stratum's decision probabilities.
inline PolicySearchResult optimize_policy(const AdditiveDecomposition& decomp,
                                          const std::vector<RatMat>& potential_marginals,
                                          const RatVec& stratum_weights, unsigned jobs = 1) {
  const Spaces& spaces = decomp.spaces();
  const std::size_t S = spaces.num_strata();
  if (potential_marginals.size() != S || stratum_weights.size() != S)
    throw DimensionMismatchError("need Pr(Y(k)=y|x) and a weight for every stratum");
  const std::size_t rule_count = detail::checked_rule_count(spaces.K(), S);

  // cell[s][d]: identified term of stratum s under decision d.
  std::vector<RatVec> cell(S, RatVec(static_cast<std::size_t>(spaces.K()), Rat(0)));
  for (std::size_t s = 0; s < S; ++s)
    for (int d = 0; d < spaces.K(); ++d) {
      Rat acc(0);
      for (int k = 0; k < spaces.K(); ++k)
        for (int y = 0; y < spaces.M(); ++y) {
          const Rat& w = decomp.omega(s, k, d, y);
          if (w != 0)
            acc += w * potential_marginals[s][static_cast<std::size_t>(k)]
                                            [static_cast<std::size_t>(y)];
        }
      cell[s][static_cast<std::size_t>(d)] = acc;
    }

  auto decode = [&](std::size_t rule) {
    std::vector<int> decisions(S, 0);
    for (std::size_t s = S; s-- > 0;) {
      decisions[s] = static_cast<int>(rule % static_cast<std::size_t>(spaces.K()));
      rule /= static_cast<std::size_t>(spaces.K());
    }
    return decisions;  // stratum 0 is the most significant digit
  };
  auto score_of = [&](const std::vector<int>& decisions) {
    Rat acc(0);
    for (std::size_t s = 0; s < S; ++s)
      acc += stratum_weights[s] * cell[s][static_cast<std::size_t>(decisions[s])];
    return acc;
  };

  struct Best {
    std::size_t rule = 0;
    Rat score;
    bool set = false;
  };
  std::vector<Best> chunk_best = parallel_map_chunks(rule_count, jobs, [&](std::size_t lo, std::size_t hi) {
    Best best;
    for (std::size_t rule = lo; rule < hi; ++rule) {
      const Rat score = score_of(decode(rule));
      if (!best.set || score < best.score) {
        best = Best{rule, score, true};
      }
    }
    return best;
  });
  Best best;
  for (const Best& b : chunk_best) {
    if (!b.set) continue;
    // Strict improvement keeps the lexicographically smallest winner,
    // since chunks are visited in ascending rule order.
    if (!best.set || b.score < best.score) best = b;
  }

  const std::vector<int> decisions = decode(best.rule);
  PolicySearchResult out{Policy::deterministic(spaces, decisions), best.score, RatVec(S, Rat(0))};
  for (std::size_t s = 0; s < S; ++s)
    out.stratum_scores[s] = cell[s][static_cast<std::size_t>(decisions[s])];
  return out;
}

inline std::vector<RatMat> potential_marginals_of(const ObservableView& view) {
  const Spaces& spaces = view.spaces();
  std::vector<RatMat> out(spaces.num_strata(),
                          RatMat(static_cast<std::size_t>(spaces.K()),
                                 RatVec(static_cast<std::size_t>(spaces.M()), Rat(0))));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s)
    for (int k = 0; k < spaces.K(); ++k)
      for (int y = 0; y < spaces.M(); ++y)
        out[s][static_cast<std::size_t>(k)][static_cast<std::size_t>(y)] =
            view.potential_marginal(s, k, y);
  return out;
}

// ---------------------------------------------------------------------------
// Weight-ordering check for desirable binary outcomes
// ---------------------------------------------------------------------------

/// Checks, per (stratum, decision), the chain
///   omega_d(d,1) <= omega_k(d,0) <= 0 <= omega_k(d,1) <= omega_d(d,0)
/// for every k != d.
struct OrderingReport {
  std::vector<std::vector<bool>> holds;  // [stratum][d]
  bool all = true;
};

inline OrderingReport check_eq10_ordering(const AdditiveDecomposition& decomp) {
  const Spaces& spaces = decomp.spaces();
  if (spaces.M() != 2) throw OutcomeNotBinaryError("weight ordering check requires M = 2");
  OrderingReport report;
  report.holds.assign(spaces.num_strata(), std::vector<bool>(static_cast<std::size_t>(spaces.K()), true));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s)
    for (int d = 0; d < spaces.K(); ++d) {
      bool ok = true;
      const Rat own1 = decomp.omega(s, d, d, 1);
      const Rat own0 = decomp.omega(s, d, d, 0);
      for (int k = 0; k < spaces.K() && ok; ++k) {
        if (k == d) continue;
        const Rat& other0 = decomp.omega(s, k, d, 0);
        const Rat& other1 = decomp.omega(s, k, d, 1);
        ok = own1 <= other0 && other0 <= 0 && Rat(0) <= other1 && other1 <= own0;
      }
      report.holds[s][static_cast<std::size_t>(d)] = ok;
      report.all = report.all && ok;
    }
  return report;
}

}  // namespace cfl
