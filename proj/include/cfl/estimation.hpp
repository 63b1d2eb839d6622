#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cfl/additivity.hpp"
#include "cfl/distributions.hpp"
#include "cfl/errors.hpp"
#include "cfl/spaces.hpp"

namespace cfl {

/// Empirical cell counts from IID records, and the plug-in frequencies
/// Pr(D* = d, Y = y | D = k, x) and Pr(D = k | x) they induce.  Plain
/// counting; no smoothing, and an empty (k, x) conditioning cell is a
/// hard error rather than an imputed value.
class EmpiricalView {
 public:
  EmpiricalView(const Spaces& spaces, const std::vector<Record>& records)
      : spaces_(spaces),
        total_(records.size()),
        stratum_n_(spaces.num_strata(), 0),
        decision_n_(spaces.num_strata(),
                    std::vector<std::size_t>(static_cast<std::size_t>(spaces.K()), 0)),
        cells_(spaces.num_strata(),
               std::vector<std::size_t>(static_cast<std::size_t>(spaces.K()) *
                                            static_cast<std::size_t>(spaces.K()) *
                                            static_cast<std::size_t>(spaces.M()),
                                        0)) {
    if (records.empty()) throw PreconditionError("empirical view needs at least one record");
    for (const Record& r : records) {
      if (r.x < 0 || static_cast<std::size_t>(r.x) >= spaces.num_strata())
        throw BadDimensionsError("record stratum index out of range: " + std::to_string(r.x));
      spaces.check_decision(r.d_star);
      spaces.check_decision(r.d);
      spaces.check_outcome(r.y);
      const std::size_t s = static_cast<std::size_t>(r.x);
      ++stratum_n_[s];
      ++decision_n_[s][static_cast<std::size_t>(r.d)];
      ++cells_[s][cell_index(r.d, r.d_star, r.y)];
    }
    for (std::size_t s = 0; s < spaces.num_strata(); ++s)
      for (int k = 0; k < spaces.K(); ++k)
        if (decision_n_[s][static_cast<std::size_t>(k)] == 0)
          throw EmptyPropensityCellError("no records with D=" + std::to_string(k) +
                                         " in stratum " + std::to_string(s) +
                                         ": empirical overlap fails");
  }

  const Spaces& spaces() const { return spaces_; }
  std::size_t total() const { return total_; }
  std::size_t stratum_count(std::size_t s) const { return stratum_n_[s]; }

  double stratum_weight(std::size_t s) const {
    return static_cast<double>(stratum_n_[s]) / static_cast<double>(total_);
  }

  double propensity(std::size_t s, int k) const {
    return static_cast<double>(decision_n_[s][static_cast<std::size_t>(k)]) /
           static_cast<double>(stratum_n_[s]);
  }

  /// Pr(D* = d, Y = y | D = k, x) by plug-in frequency.
  double conditional(std::size_t s, int d_star, int y, int k) const {
    return static_cast<double>(cells_[s][cell_index(k, d_star, y)]) /
           static_cast<double>(decision_n_[s][static_cast<std::size_t>(k)]);
  }

 private:
  std::size_t cell_index(int k, int d_star, int y) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(spaces_.K()) +
            static_cast<std::size_t>(d_star)) *
               static_cast<std::size_t>(spaces_.M()) +
           static_cast<std::size_t>(y);
  }

  Spaces spaces_;
  std::size_t total_;
  std::vector<std::size_t> stratum_n_;
  std::vector<std::vector<std::size_t>> decision_n_;
  std::vector<std::vector<std::size_t>> cells_;  // [stratum][(k, d*, y)]
};

inline EmpiricalView empirical_view(const std::vector<Record>& records, const Spaces& spaces) {
  return EmpiricalView(spaces, records);
}

struct EstimateReport {
  double identified_total = 0.0;
  std::vector<double> per_stratum;
  bool constant_omitted = false;
  std::size_t n = 0;
};

/// Plug-in of the identification formula: empirical frequencies replace
/// Pr(D* = d, Y = y | D = k, x) and n(x)/n replaces the stratum law.  The
/// intercept term is never estimable from records; with a nonzero
/// intercept the caller must accept difference-only semantics.
inline EstimateReport estimate_identified_risk(const AdditiveDecomposition& decomp,
                                               const EmpiricalView& view,
                                               bool allow_difference_only = false) {
  if (!decomp.spaces().same_shape(view.spaces()))
    throw DimensionMismatchError("decomposition and records describe different spaces");
  const bool intercept_zero = decomp.intercept_zero();
  if (!intercept_zero && !allow_difference_only)
    throw NeedExactLossError(
        "nonzero intercept: the plug-in estimates levels only for exactly identified losses");

  const Spaces& spaces = decomp.spaces();
  EstimateReport report;
  report.n = view.total();
  report.constant_omitted = !intercept_zero;
  report.per_stratum.assign(spaces.num_strata(), 0.0);
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    double acc = 0.0;
    for (int d = 0; d < spaces.K(); ++d)
      for (int k = 0; k < spaces.K(); ++k)
        for (int y = 0; y < spaces.M(); ++y) {
          const Rat& w = decomp.omega(s, k, d, y);
          if (w != 0) acc += to_double(w) * view.conditional(s, d, y, k);
        }
    report.per_stratum[s] = acc;
    report.identified_total += view.stratum_weight(s) * acc;
  }
  return report;
}

}  // namespace cfl
