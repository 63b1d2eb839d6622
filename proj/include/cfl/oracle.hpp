#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "cfl/additivity.hpp"
#include "cfl/distributions.hpp"
#include "cfl/errors.hpp"
#include "cfl/linalg.hpp"
#include "cfl/loss.hpp"
#include "cfl/parallel.hpp"
#include "cfl/rational.hpp"
#include "cfl/risk.hpp"
#include "cfl/rng.hpp"

namespace cfl {

/// Exact range of a linear functional over a fiber polytope, with the
/// attaining basic feasible solutions.
struct RiskInterval {
  Rat min;
  Rat max;
  RatVec argmin;
  RatVec argmax;
  bool feasible = false;

  Rat width() const { return max - min; }
  bool identifiable() const { return feasible && min == max; }
};

namespace detail {

inline std::uint64_t binomial_u64(std::size_t n, std::size_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    acc = acc * (n - r + i) / i;
    if (acc > static_cast<unsigned __int128>(UINT64_MAX)) return UINT64_MAX;
  }
  return static_cast<std::uint64_t>(acc);
}

/// Lexicographic unranking in the combinatorial number system, so subset
/// enumeration can be chunked deterministically.
inline std::vector<std::size_t> unrank_combination(std::uint64_t rank, std::size_t n,
                                                   std::size_t r) {
  std::vector<std::size_t> out;
  out.reserve(r);
  std::size_t item = 0;
  for (std::size_t slot = r; slot > 0; --slot) {
    while (true) {
      const std::uint64_t block = binomial_u64(n - item - 1, slot - 1);
      if (rank < block) break;
      rank -= block;
      ++item;
    }
    out.push_back(item++);
  }
  return out;
}

}  // namespace detail

/// Standard-form polytope {x >= 0, Ax = b} with a linear objective.
struct FiberLp {
  RatMat constraints;
  RatVec rhs;
  RatVec objective;
};

/// Exact min/max of the objective over the polytope by enumeration of
/// basic feasible solutions: every column subset of size rank(A) whose
/// square subsystem is nonsingular yields a candidate vertex.  Linear
/// objectives attain their range at vertices, so the sweep is exhaustive.
inline RiskInterval bound_linear(const FiberLp& lp, unsigned jobs = 1) {
  const std::size_t rows = lp.constraints.size();
  const std::size_t cols = rows == 0 ? 0 : lp.constraints[0].size();
  if (cols > 40) throw TooLargeError("fiber enumeration guard: more than 40 variables");

  // Affine consistency first: rank([A | b]) must equal rank(A).
  RatMat augmented = lp.constraints;
  for (std::size_t i = 0; i < rows; ++i) augmented[i].push_back(lp.rhs[i]);
  const std::vector<std::size_t> pivot_rows = linalg::independent_rows(lp.constraints);
  if (linalg::rank(augmented) != pivot_rows.size())
    throw InfeasibleMarginalsError("marginal constraints are inconsistent");

  const std::size_t r = pivot_rows.size();
  RatMat reduced(r);
  RatVec reduced_rhs(r);
  for (std::size_t i = 0; i < r; ++i) {
    reduced[i] = lp.constraints[pivot_rows[i]];
    reduced_rhs[i] = lp.rhs[pivot_rows[i]];
  }

  const std::uint64_t subsets = detail::binomial_u64(cols, r);
  if (subsets > 2000000ULL)
    throw TooLargeError("fiber enumeration guard: too many candidate bases");

  struct Partial {
    bool any = false;
    Rat min, max;
    RatVec argmin, argmax;
  };
  std::vector<Partial> parts = parallel_map_chunks(
      static_cast<std::size_t>(subsets), jobs, [&](std::size_t lo, std::size_t hi) {
        Partial part;
        for (std::size_t rank_idx = lo; rank_idx < hi; ++rank_idx) {
          const std::vector<std::size_t> basis = detail::unrank_combination(rank_idx, cols, r);
          RatMat square(r, RatVec(r));
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) square[i][j] = reduced[i][basis[j]];
          const auto solved = linalg::solve_square(std::move(square), reduced_rhs);
          if (!solved) continue;
          bool nonnegative = true;
          for (const Rat& v : *solved)
            if (v < 0) { nonnegative = false; break; }
          if (!nonnegative) continue;
          RatVec vertex(cols, Rat(0));
          for (std::size_t j = 0; j < r; ++j) vertex[basis[j]] = (*solved)[j];
          Rat value(0);
          for (std::size_t j = 0; j < cols; ++j)
            if (lp.objective[j] != 0 && vertex[j] != 0) value += lp.objective[j] * vertex[j];
          if (!part.any || value < part.min) { part.min = value; part.argmin = vertex; }
          if (!part.any || value > part.max) { part.max = value; part.argmax = vertex; }
          part.any = true;
        }
        return part;
      });

  RiskInterval out;
  for (const Partial& part : parts) {
    if (!part.any) continue;
    if (!out.feasible || part.min < out.min) { out.min = part.min; out.argmin = part.argmin; }
    if (!out.feasible || part.max > out.max) { out.max = part.max; out.argmax = part.argmax; }
    out.feasible = true;
  }
  if (!out.feasible)
    throw InfeasibleMarginalsError("no basic feasible solution: empty fiber");
  return out;
}

/// Range of l^T p over {p in simplex : C p = q} for one stratum.
inline RiskInterval risk_bounds(const RatVec& loss_vec, const MarginalMatrix& matrix,
                                const RatVec& q, unsigned jobs = 1) {
  if (matrix.cols() != loss_vec.size() || matrix.rows() != q.size())
    throw DimensionMismatchError("loss vector, marginal matrix, and q sizes disagree");
  FiberLp lp;
  lp.constraints = matrix.m;
  lp.constraints.push_back(RatVec(matrix.cols(), Rat(1)));  // total mass row
  lp.rhs = q;
  lp.rhs.push_back(Rat(1));
  lp.objective = loss_vec;
  return bound_linear(lp, jobs);
}

// ---------------------------------------------------------------------------
// Identifiability certification by fiber sweeps
// ---------------------------------------------------------------------------

/// Interior point of the simplex with integer numerators over a common
/// denominator; arithmetic stays exact.
inline RatVec random_interior_point(CounterRng& rng, std::size_t dim, int resolution = 1000) {
  RatVec out(dim);
  BigInt total = 0;
  std::vector<std::int64_t> numerators(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    numerators[i] = rng.next_int(1, resolution);
    total += numerators[i];
  }
  for (std::size_t i = 0; i < dim; ++i) out[i] = Rat(BigInt(numerators[i]), total);
  return out;
}

struct FiberCounterexample {
  std::size_t stratum = 0;
  RatVec q;
  RatVec p1;
  RatVec p2;
  Rat gap;  // l^T p2 - l^T p1, nonzero
};

struct CertifyReport {
  bool identifiable = true;
  ViewVariant variant = ViewVariant::extended;
  std::size_t trials = 0;
  Rat max_width;
  std::optional<RiskInterval> widest_interval;  // interval attaining max_width
  std::optional<FiberCounterexample> counterexample;
  Regime regime = Regime::unidentifiable;
  bool agreement = false;
};

/// Sweeps random interior joints, maps each to its observable q, and
/// brute-forces the risk range over the fiber.  Declares the loss
/// empirically identifiable when every width is exactly zero, and
/// cross-checks the verdict against the algebraic classification:
/// the extended view must be width-free iff the loss is additive, the
/// marginals-only view iff it is additive with zero intercept.
inline CertifyReport certify_identifiability(const LossTensor& loss, ViewVariant variant,
                                             std::size_t trials, std::uint64_t seed,
                                             unsigned jobs = 1) {
  const Spaces& spaces = loss.spaces();
  if (spaces.joint_size() > 40)
    throw TooLargeError("joint space too large for fiber enumeration");
  const MarginalMatrix matrix = build_marginal_matrix(spaces, variant);
  const std::vector<RatVec> kernel = kernel_basis(matrix);

  CertifyReport report;
  report.variant = variant;
  report.trials = trials;
  report.max_width = 0;
  report.regime = classify(loss).regime;

  const CounterRng root(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng trial_rng = root.stream(t);
    for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
      const RatVec p = random_interior_point(trial_rng, spaces.joint_size());
      const RatVec q = linalg::matvec(matrix.m, p);
      const RiskInterval interval = risk_bounds(loss.stratum_values(s), matrix, q, jobs);
      if (!report.widest_interval || interval.width() > report.max_width) {
        report.max_width = interval.width();
        report.widest_interval = interval;
      }
      if (interval.width() > 0 && !report.counterexample) {
        // Explicit pair along a kernel direction: p2 = p + alpha v stays in
        // the simplex for alpha below min(p) / max|v| and maps to the same q.
        for (const RatVec& v : kernel) {
          const Rat shift = linalg::dot(loss.stratum_values(s), v);
          if (shift == 0) continue;
          Rat min_p = p[0];
          for (const Rat& x : p) min_p = std::min(min_p, x);
          Rat max_v(0);
          for (const Rat& x : v) max_v = std::max(max_v, rat_abs(x));
          const Rat alpha = min_p / (2 * max_v);
          FiberCounterexample cx;
          cx.stratum = s;
          cx.q = q;
          cx.p1 = p;
          cx.p2 = p;
          for (std::size_t i = 0; i < p.size(); ++i) cx.p2[i] += alpha * v[i];
          cx.gap = alpha * shift;
          report.counterexample = std::move(cx);
          break;
        }
      }
    }
  }
  report.identifiable = (report.max_width == 0);
  const bool predicted_identifiable = (variant == ViewVariant::extended)
                                          ? report.regime != Regime::unidentifiable
                                          : report.regime == Regime::exact;
  report.agreement = (report.identifiable == predicted_identifiable);
  return report;
}

// ---------------------------------------------------------------------------
// Risk-difference bounds for a pair of policies over a shared population
// ---------------------------------------------------------------------------

struct DifferenceBoundsReport {
  RiskInterval total;
  std::vector<RiskInterval> per_stratum;
};

/// Exact range of R(pi1) - R(pi2) over potential-outcome joints nu that
/// reproduce the per-outcome marginals Pr(Y(k) = y | x) of the view.  The
/// intercept contribution cancels between the two policies, so additive
/// losses give width zero; once no additive form exists some feasible
/// marginal collection exhibits positive width.
inline DifferenceBoundsReport difference_bounds(const LossTensor& loss, const Policy& pi1,
                                                const Policy& pi2, const ObservableView& view,
                                                unsigned jobs = 1) {
  const Spaces& spaces = loss.spaces();
  if (!spaces.same_shape(view.spaces()))
    throw DimensionMismatchError("loss and view describe different spaces");
  if (spaces.outcome_vectors() > 40)
    throw TooLargeError("outcome space too large for fiber enumeration");

  DifferenceBoundsReport report;
  report.total.min = 0;
  report.total.max = 0;
  report.total.feasible = true;
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    FiberLp lp;
    lp.constraints.assign(
        static_cast<std::size_t>(spaces.K()) * static_cast<std::size_t>(spaces.M()) + 1,
        RatVec(spaces.outcome_vectors(), Rat(0)));
    lp.rhs.assign(lp.constraints.size(), Rat(0));
    for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
      const std::vector<int> y = spaces.unpack_outcomes(code);
      for (int k = 0; k < spaces.K(); ++k) {
        const std::size_t row = static_cast<std::size_t>(k) * static_cast<std::size_t>(spaces.M()) +
                                static_cast<std::size_t>(y[static_cast<std::size_t>(k)]);
        lp.constraints[row][code] = 1;
      }
      lp.constraints.back()[code] = 1;
    }
    for (int k = 0; k < spaces.K(); ++k)
      for (int y = 0; y < spaces.M(); ++y)
        lp.rhs[static_cast<std::size_t>(k) * static_cast<std::size_t>(spaces.M()) +
               static_cast<std::size_t>(y)] = view.potential_marginal(s, k, y);
    lp.rhs.back() = 1;

    lp.objective.assign(spaces.outcome_vectors(), Rat(0));
    for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
      Rat g(0);
      for (int d = 0; d < spaces.K(); ++d) {
        const Rat delta = pi1.prob(s, d) - pi2.prob(s, d);
        if (delta != 0) g += delta * loss.at(s, d, code);
      }
      lp.objective[code] = g;
    }

    RiskInterval interval = bound_linear(lp, jobs);
    report.total.min += view.stratum_weights()[s] * interval.min;
    report.total.max += view.stratum_weights()[s] * interval.max;
    report.per_stratum.push_back(std::move(interval));
  }
  return report;
}

}  // namespace cfl
