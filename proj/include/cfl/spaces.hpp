#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cfl/errors.hpp"

namespace cfl {

/// Finite decision/outcome/covariate spaces.
///
/// Decisions  D = {0, ..., K-1}, K >= 2
/// Outcomes   Y = {0, ..., M-1}, M >= 2
/// Covariates: an ordered list of opaque stratum labels.
///
/// Index conventions, fixed across the whole library:
///   * Joint index i(d, y) over (decision, outcome vector):
///       i = d * M^K + code(y),   code(y) = sum_j y_j * M^(K-1-j)
///     i.e. y_{K-1} varies fastest, then ... y_0, then d.
///   * Weight column (k, d, y):  (k*K + d)*M + y  (y fastest, then d, then k).
///   * Intercept column: code(y), offset by K^2*M in full structure matrices.
///   * Observable row (d, k, y): (d*K + k)*M + y; extended views append the
///     M^K joint-outcome rows indexed by code(y).
class Spaces {
 public:
  Spaces(int K, int M, std::vector<std::string> strata)
      : K_(K), M_(M), strata_(std::move(strata)) {
    if (K_ < 2) throw BadDimensionsError("K must be >= 2, got " + std::to_string(K_));
    if (M_ < 2) throw BadDimensionsError("M must be >= 2, got " + std::to_string(M_));
    if (strata_.empty()) throw BadDimensionsError("at least one stratum is required");
    outcome_vectors_ = 1;
    for (int j = 0; j < K_; ++j) outcome_vectors_ *= static_cast<std::size_t>(M_);
  }

  int K() const { return K_; }
  int M() const { return M_; }
  const std::vector<std::string>& strata() const { return strata_; }
  std::size_t num_strata() const { return strata_.size(); }

  /// M^K distinct outcome vectors.
  std::size_t outcome_vectors() const { return outcome_vectors_; }

  /// N = K * M^K, the size of the joint space of (D*, Y(0..K-1)).
  std::size_t joint_size() const { return static_cast<std::size_t>(K_) * outcome_vectors_; }

  /// K^2 * M weight coordinates omega_k(d, y).
  std::size_t weight_cols() const {
    return static_cast<std::size_t>(K_) * static_cast<std::size_t>(K_) *
           static_cast<std::size_t>(M_);
  }

  /// M^K intercept coordinates varpi(y).
  std::size_t intercept_cols() const { return outcome_vectors_; }

  /// L_a = K^2 * M observable rows; extended views add M^K more (L_b).
  std::size_t marginal_rows() const { return weight_cols(); }
  std::size_t extended_rows() const { return weight_cols() + outcome_vectors_; }

  std::size_t pack_outcomes(const std::vector<int>& y) const {
    if (static_cast<int>(y.size()) != K_)
      throw BadDimensionsError("outcome vector must have length K");
    std::size_t code = 0;
    for (int j = 0; j < K_; ++j) {
      if (y[j] < 0 || y[j] >= M_)
        throw BadDimensionsError("outcome value out of range: " + std::to_string(y[j]));
      code = code * static_cast<std::size_t>(M_) + static_cast<std::size_t>(y[j]);
    }
    return code;
  }

  std::vector<int> unpack_outcomes(std::size_t code) const {
    std::vector<int> y(static_cast<std::size_t>(K_));
    for (int j = K_ - 1; j >= 0; --j) {
      y[static_cast<std::size_t>(j)] = static_cast<int>(code % static_cast<std::size_t>(M_));
      code /= static_cast<std::size_t>(M_);
    }
    return y;
  }

  std::size_t joint_index(int d, std::size_t outcome_code) const {
    check_decision(d);
    return static_cast<std::size_t>(d) * outcome_vectors_ + outcome_code;
  }

  std::size_t joint_index(int d, const std::vector<int>& y) const {
    return joint_index(d, pack_outcomes(y));
  }

  std::size_t weight_index(int k, int d, int y) const {
    check_decision(k);
    check_decision(d);
    check_outcome(y);
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(K_) +
            static_cast<std::size_t>(d)) *
               static_cast<std::size_t>(M_) +
           static_cast<std::size_t>(y);
  }

  std::size_t marginal_index(int d, int k, int y) const {
    check_decision(d);
    check_decision(k);
    check_outcome(y);
    return (static_cast<std::size_t>(d) * static_cast<std::size_t>(K_) +
            static_cast<std::size_t>(k)) *
               static_cast<std::size_t>(M_) +
           static_cast<std::size_t>(y);
  }

  void check_decision(int d) const {
    if (d < 0 || d >= K_)
      throw BadDimensionsError("decision out of range: " + std::to_string(d));
  }

  void check_outcome(int y) const {
    if (y < 0 || y >= M_)
      throw BadDimensionsError("outcome out of range: " + std::to_string(y));
  }

  std::size_t check_stratum(std::size_t s) const {
    if (s >= strata_.size())
      throw BadDimensionsError("stratum index out of range: " + std::to_string(s));
    return s;
  }

  bool same_shape(const Spaces& other) const {
    return K_ == other.K_ && M_ == other.M_ && strata_ == other.strata_;
  }

  friend bool operator==(const Spaces& a, const Spaces& b) {
    return a.K_ == b.K_ && a.M_ == b.M_ && a.strata_ == b.strata_;
  }

 private:
  int K_;
  int M_;
  std::vector<std::string> strata_;
  std::size_t outcome_vectors_ = 0;
};

}  // namespace cfl
