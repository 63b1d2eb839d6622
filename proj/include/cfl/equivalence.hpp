#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfl/additivity.hpp"
#include "cfl/errors.hpp"
#include "cfl/loss.hpp"
#include "cfl/rational.hpp"

namespace cfl {

/// Binary-decision reduction: the standard loss whose risk differs from
/// the additive counterfactual risk by a policy-independent constant,
///   l_std(d, y, x) = omega_d(d, y, x) - omega_d(1-d, y, x),
/// with the free covariate constant pinned to zero.  The construction is
/// invariant across decompositions of the same tensor up to that constant.
inline StandardLoss to_standard_loss(const AdditiveDecomposition& decomp) {
  const Spaces& spaces = decomp.spaces();
  if (spaces.K() != 2)
    throw DecisionNotBinaryError("standard-loss reduction requires K = 2");
  std::vector<RatVec> values(spaces.num_strata(),
                             RatVec(2 * static_cast<std::size_t>(spaces.M()), Rat(0)));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s)
    for (int d = 0; d < 2; ++d)
      for (int y = 0; y < spaces.M(); ++y)
        values[s][static_cast<std::size_t>(d) * static_cast<std::size_t>(spaces.M()) +
                  static_cast<std::size_t>(y)] =
            decomp.omega(s, d, d, y) - decomp.omega(s, d, 1 - d, y);
  return StandardLoss(spaces, std::move(values));
}

/// The lambda-family of additive counterfactual losses equivalent to a
/// given standard loss:
///   omega_d(d, y)   = (1 + lambda) l_std(d, y)
///   omega_d(1-d, y) = lambda l_std(d, y),      varpi = 0.
/// to_standard_loss inverts this exactly for every lambda.
inline AdditiveDecomposition counterfactual_family(const StandardLoss& std_loss,
                                                   const Rat& lambda) {
  const Spaces& spaces = std_loss.spaces();
  if (spaces.K() != 2)
    throw DecisionNotBinaryError("the lambda-family is defined for K = 2");
  std::vector<RatVec> weights(spaces.num_strata(), RatVec(spaces.weight_cols(), Rat(0)));
  std::vector<RatVec> intercept(spaces.num_strata(), RatVec(spaces.intercept_cols(), Rat(0)));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s)
    for (int k = 0; k < 2; ++k)
      for (int y = 0; y < spaces.M(); ++y) {
        const Rat& base = std_loss.at(s, k, y);
        weights[s][spaces.weight_index(k, k, y)] = (Rat(1) + lambda) * base;
        weights[s][spaces.weight_index(k, 1 - k, y)] = lambda * base;
      }
  return AdditiveDecomposition(spaces, Variant::full, std::move(weights), std::move(intercept));
}

// ---------------------------------------------------------------------------
// Non-binary decisions: existence of an equivalent standard loss
// ---------------------------------------------------------------------------

/// Certificate that no standard loss matches the additive counterfactual
/// loss: decisions j != j' and an index (k, y) with k outside {j, j'}
/// whose outcome-profile of the weight differs across the two decisions,
/// plus two point-mass potential-outcome laws differing only in
/// coordinate k.  Between those laws, the risk change of the constant
/// policy pi = j differs from that of pi = j'; any standard loss would
/// force the two changes to coincide.
struct NoStandardWitness {
  int k = 0;
  int j = 0;
  int j_prime = 0;
  int y = 0;
  std::size_t stratum = 0;
  RatVec law1;  // point mass at y = (0, ..., 0)
  RatVec law2;  // point mass at y with coordinate k set to the witness outcome
  Rat gap_j;        // R_law2(pi=j) - R_law1(pi=j)
  Rat gap_j_prime;  // R_law2(pi=j') - R_law1(pi=j')
};

struct EquivalenceCertificate {
  bool exists = false;
  std::optional<StandardLoss> standard;
  std::optional<NoStandardWitness> witness;
};

/// Decides, for K >= 3, whether some standard loss yields policy-
/// independent risk gaps, and constructs one when it does.
///
/// The test runs on the gauge-invariant outcome profiles
///   y -> omega_k(d, y) - omega_k(d, 0):
/// free directions of the decomposition family shift each off-diagonal
/// weight by a constant in y, so profile equality across decisions d != k
/// is exactly the decision-freeness the reduction needs, independent of
/// which decomposition was supplied.
inline EquivalenceCertificate standard_loss_exists(const AdditiveDecomposition& decomp) {
  const Spaces& spaces = decomp.spaces();
  if (spaces.K() == 2)
    throw DecisionBinaryError("K = 2 always reduces; use to_standard_loss");

  for (std::size_t s = 0; s < spaces.num_strata(); ++s)
    for (int k = 0; k < spaces.K(); ++k) {
      const int ref = (k == 0) ? 1 : 0;
      for (int d = 0; d < spaces.K(); ++d) {
        if (d == k || d == ref) continue;
        for (int y = 1; y < spaces.M(); ++y) {
          const Rat profile_d = decomp.omega(s, k, d, y) - decomp.omega(s, k, d, 0);
          const Rat profile_ref = decomp.omega(s, k, ref, y) - decomp.omega(s, k, ref, 0);
          if (profile_d == profile_ref) continue;

          NoStandardWitness w;
          w.k = k;
          w.j = d;
          w.j_prime = ref;
          w.y = y;
          w.stratum = s;
          w.law1.assign(spaces.outcome_vectors(), Rat(0));
          w.law2.assign(spaces.outcome_vectors(), Rat(0));
          std::vector<int> zeros(static_cast<std::size_t>(spaces.K()), 0);
          std::vector<int> shifted = zeros;
          shifted[static_cast<std::size_t>(k)] = y;
          const std::size_t code1 = spaces.pack_outcomes(zeros);
          const std::size_t code2 = spaces.pack_outcomes(shifted);
          w.law1[code1] = 1;
          w.law2[code2] = 1;
          const LossTensor tensor = decomp.reconstruct();
          w.gap_j = tensor.at(s, w.j, code2) - tensor.at(s, w.j, code1);
          w.gap_j_prime = tensor.at(s, w.j_prime, code2) - tensor.at(s, w.j_prime, code1);
          return EquivalenceCertificate{false, std::nullopt, std::move(w)};
        }
      }
    }

  // Decision-free off-diagonal profiles: assemble the induced standard loss
  //   s_d(y) = omega_d(d, y) - h_d(y) + Gamma(d),
  // where h_k(y) is the reference off-diagonal weight for Y(k) and
  // Gamma(d) collects the constant offsets gamma_k(d) = omega_k(d,0) - h_k(0).
  std::vector<RatVec> values(
      spaces.num_strata(),
      RatVec(static_cast<std::size_t>(spaces.K()) * static_cast<std::size_t>(spaces.M()), Rat(0)));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s)
    for (int d = 0; d < spaces.K(); ++d) {
      const int ref_d = (d == 0) ? 1 : 0;
      Rat gamma_sum(0);
      for (int k = 0; k < spaces.K(); ++k) {
        if (k == d) continue;
        const int ref_k = (k == 0) ? 1 : 0;
        gamma_sum += decomp.omega(s, k, d, 0) - decomp.omega(s, k, ref_k, 0);
      }
      for (int y = 0; y < spaces.M(); ++y)
        values[s][static_cast<std::size_t>(d) * static_cast<std::size_t>(spaces.M()) +
                  static_cast<std::size_t>(y)] =
            decomp.omega(s, d, d, y) - decomp.omega(s, d, ref_d, y) + gamma_sum;
    }
  return EquivalenceCertificate{true, StandardLoss(spaces, std::move(values)), std::nullopt};
}

}  // namespace cfl
