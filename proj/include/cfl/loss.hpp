#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cfl/errors.hpp"
#include "cfl/json_util.hpp"
#include "cfl/rational.hpp"
#include "cfl/spaces.hpp"

namespace cfl {

/// Counterfactual loss tensor: one exact rational l(d; y_0..y_{K-1}) per
/// stratum and per (decision, outcome-vector) pair, stored in joint-index
/// order.  Immutable after construction.
class LossTensor {
 public:
  LossTensor(Spaces spaces, std::vector<RatVec> values)
      : spaces_(std::move(spaces)), values_(std::move(values)) {
    if (values_.size() != spaces_.num_strata())
      throw BadDimensionsError("loss tensor needs one value block per stratum");
    for (const RatVec& block : values_)
      if (block.size() != spaces_.joint_size())
        throw BadDimensionsError("loss tensor block must have K*M^K entries");
  }

  const Spaces& spaces() const { return spaces_; }

  const Rat& at(std::size_t stratum, int d, std::size_t outcome_code) const {
    return values_[spaces_.check_stratum(stratum)][spaces_.joint_index(d, outcome_code)];
  }

  const Rat& at(std::size_t stratum, int d, const std::vector<int>& y) const {
    return at(stratum, d, spaces_.pack_outcomes(y));
  }

  const RatVec& stratum_values(std::size_t s) const {
    return values_[spaces_.check_stratum(s)];
  }

  friend bool operator==(const LossTensor& a, const LossTensor& b) {
    return a.spaces_ == b.spaces_ && a.values_ == b.values_;
  }

 private:
  Spaces spaces_;
  std::vector<RatVec> values_;  // per stratum, length K*M^K
};

/// Standard loss l(d; y): depends on the realized outcome only.
class StandardLoss {
 public:
  StandardLoss(Spaces spaces, std::vector<RatVec> values)
      : spaces_(std::move(spaces)), values_(std::move(values)) {
    if (values_.size() != spaces_.num_strata())
      throw BadDimensionsError("standard loss needs one value block per stratum");
    for (const RatVec& block : values_)
      if (block.size() != static_cast<std::size_t>(spaces_.K()) *
                              static_cast<std::size_t>(spaces_.M()))
        throw BadDimensionsError("standard loss block must have K*M entries");
  }

  const Spaces& spaces() const { return spaces_; }

  const Rat& at(std::size_t stratum, int d, int y) const {
    spaces_.check_decision(d);
    spaces_.check_outcome(y);
    return values_[spaces_.check_stratum(stratum)]
                  [static_cast<std::size_t>(d) * static_cast<std::size_t>(spaces_.M()) +
                   static_cast<std::size_t>(y)];
  }

  /// Embeds the standard loss as a counterfactual tensor l(d; y) = l(d; y_d).
  LossTensor as_tensor() const {
    std::vector<RatVec> blocks(spaces_.num_strata(), RatVec(spaces_.joint_size(), Rat(0)));
    for (std::size_t s = 0; s < spaces_.num_strata(); ++s)
      for (int d = 0; d < spaces_.K(); ++d)
        for (std::size_t code = 0; code < spaces_.outcome_vectors(); ++code) {
          const std::vector<int> y = spaces_.unpack_outcomes(code);
          blocks[s][spaces_.joint_index(d, code)] = at(s, d, y[static_cast<std::size_t>(d)]);
        }
    return LossTensor(spaces_, std::move(blocks));
  }

  friend bool operator==(const StandardLoss& a, const StandardLoss& b) {
    return a.spaces_ == b.spaces_ && a.values_ == b.values_;
  }

 private:
  Spaces spaces_;
  std::vector<RatVec> values_;  // per stratum, length K*M
};

namespace detail {

inline std::string outcome_string(const Spaces& spaces, std::size_t code) {
  const std::vector<int> y = spaces.unpack_outcomes(code);
  std::string out = "(";
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (j) out += ",";
    out += std::to_string(y[j]);
  }
  out += ")";
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loss-file schema
//
// {
//   "K": 2, "M": 2,
//   "strata": [
//     { "label": "x0",
//       "entries": [ { "d": 0, "y": [0, 0], "loss": "1/2" }, ... ] }
//   ]
// }
//
// Standard-loss files are identical except "y" is a single integer.
// Unknown fields are rejected.
// ---------------------------------------------------------------------------

inline LossTensor load_loss(const std::string& text) {
  using jsonio::json;
  const json doc = jsonio::parse_document(text, "loss file");
  jsonio::reject_unknown_fields(doc, {"K", "M", "strata"}, "loss file");
  const int K = jsonio::require_int(doc, "K", "loss file");
  const int M = jsonio::require_int(doc, "M", "loss file");
  const json& strata = jsonio::require_field(doc, "strata", "loss file");
  if (!strata.is_array() || strata.empty())
    throw SchemaError("loss file: 'strata' must be a nonempty array");

  std::vector<std::string> labels;
  for (const json& s : strata)
    labels.push_back(jsonio::require_string(s, "label", "stratum"));
  const Spaces spaces(K, M, labels);

  std::vector<RatVec> blocks(spaces.num_strata(), RatVec(spaces.joint_size(), Rat(0)));
  std::size_t si = 0;
  for (const json& s : strata) {
    jsonio::reject_unknown_fields(s, {"label", "entries"}, "stratum");
    const json& entries = jsonio::require_field(s, "entries", "stratum");
    if (!entries.is_array()) throw SchemaError("stratum: 'entries' must be an array");
    std::vector<bool> seen(spaces.joint_size(), false);
    for (const json& e : entries) {
      jsonio::reject_unknown_fields(e, {"d", "y", "loss"}, "loss entry");
      const int d = jsonio::require_int(e, "d", "loss entry");
      const std::vector<int> y = jsonio::require_int_array(e, "y", "loss entry");
      spaces.check_decision(d);
      const std::size_t idx = spaces.joint_index(d, y);
      if (seen[idx])
        throw DuplicateEntryError("duplicate loss entry at d=" + std::to_string(d) + ", y=" +
                                  detail::outcome_string(spaces, spaces.pack_outcomes(y)));
      seen[idx] = true;
      blocks[si][idx] = jsonio::require_rational(e, "loss", "loss entry");
    }
    for (std::size_t idx = 0; idx < seen.size(); ++idx)
      if (!seen[idx]) {
        const int d = static_cast<int>(idx / spaces.outcome_vectors());
        throw MissingEntryError("missing loss entry at d=" + std::to_string(d) + ", y=" +
                                detail::outcome_string(spaces, idx % spaces.outcome_vectors()) +
                                " in stratum '" + labels[si] + "'");
      }
    ++si;
  }
  return LossTensor(spaces, std::move(blocks));
}

inline jsonio::json loss_to_json(const LossTensor& loss) {
  using jsonio::json;
  const Spaces& spaces = loss.spaces();
  json doc;
  doc["K"] = spaces.K();
  doc["M"] = spaces.M();
  doc["strata"] = json::array();
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    json stratum;
    stratum["label"] = spaces.strata()[s];
    stratum["entries"] = json::array();
    for (int d = 0; d < spaces.K(); ++d)
      for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
        json entry;
        entry["d"] = d;
        entry["y"] = spaces.unpack_outcomes(code);
        entry["loss"] = rat_to_string(loss.at(s, d, code));
        stratum["entries"].push_back(std::move(entry));
      }
    doc["strata"].push_back(std::move(stratum));
  }
  return doc;
}

inline std::string serialize_loss(const LossTensor& loss) { return loss_to_json(loss).dump(2); }

inline StandardLoss load_standard_loss(const std::string& text) {
  using jsonio::json;
  const json doc = jsonio::parse_document(text, "standard-loss file");
  jsonio::reject_unknown_fields(doc, {"K", "M", "strata"}, "standard-loss file");
  const int K = jsonio::require_int(doc, "K", "standard-loss file");
  const int M = jsonio::require_int(doc, "M", "standard-loss file");
  const json& strata = jsonio::require_field(doc, "strata", "standard-loss file");
  if (!strata.is_array() || strata.empty())
    throw SchemaError("standard-loss file: 'strata' must be a nonempty array");

  std::vector<std::string> labels;
  for (const json& s : strata)
    labels.push_back(jsonio::require_string(s, "label", "stratum"));
  const Spaces spaces(K, M, labels);
  const std::size_t block_size =
      static_cast<std::size_t>(K) * static_cast<std::size_t>(M);

  std::vector<RatVec> blocks(spaces.num_strata(), RatVec(block_size, Rat(0)));
  std::size_t si = 0;
  for (const json& s : strata) {
    jsonio::reject_unknown_fields(s, {"label", "entries"}, "stratum");
    const json& entries = jsonio::require_field(s, "entries", "stratum");
    std::vector<bool> seen(block_size, false);
    for (const json& e : entries) {
      jsonio::reject_unknown_fields(e, {"d", "y", "loss"}, "standard-loss entry");
      const int d = jsonio::require_int(e, "d", "standard-loss entry");
      const int y = jsonio::require_int(e, "y", "standard-loss entry");
      spaces.check_decision(d);
      spaces.check_outcome(y);
      const std::size_t idx =
          static_cast<std::size_t>(d) * static_cast<std::size_t>(M) + static_cast<std::size_t>(y);
      if (seen[idx])
        throw DuplicateEntryError("duplicate standard-loss entry at d=" + std::to_string(d) +
                                  ", y=" + std::to_string(y));
      seen[idx] = true;
      blocks[si][idx] = jsonio::require_rational(e, "loss", "standard-loss entry");
    }
    for (std::size_t idx = 0; idx < seen.size(); ++idx)
      if (!seen[idx])
        throw MissingEntryError("missing standard-loss entry at d=" +
                                std::to_string(idx / static_cast<std::size_t>(M)) + ", y=" +
                                std::to_string(idx % static_cast<std::size_t>(M)));
    ++si;
  }
  return StandardLoss(spaces, std::move(blocks));
}

inline jsonio::json standard_loss_to_json(const StandardLoss& loss) {
  using jsonio::json;
  const Spaces& spaces = loss.spaces();
  json doc;
  doc["K"] = spaces.K();
  doc["M"] = spaces.M();
  doc["strata"] = json::array();
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    json stratum;
    stratum["label"] = spaces.strata()[s];
    stratum["entries"] = json::array();
    for (int d = 0; d < spaces.K(); ++d)
      for (int y = 0; y < spaces.M(); ++y) {
        json entry;
        entry["d"] = d;
        entry["y"] = y;
        entry["loss"] = rat_to_string(loss.at(s, d, y));
        stratum["entries"].push_back(std::move(entry));
      }
    doc["strata"].push_back(std::move(stratum));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Built-in example losses
// ---------------------------------------------------------------------------

using ParamMap = std::map<std::string, Rat>;

namespace detail {

inline Rat param(const ParamMap& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw MissingParamError("missing parameter '" + name + "'");
  return it->second;
}

template <typename Fn>
LossTensor materialize(const Spaces& spaces, Fn&& cell) {
  std::vector<RatVec> blocks(spaces.num_strata(), RatVec(spaces.joint_size(), Rat(0)));
  for (std::size_t s = 0; s < spaces.num_strata(); ++s)
    for (int d = 0; d < spaces.K(); ++d)
      for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code)
        blocks[s][spaces.joint_index(d, code)] = cell(d, spaces.unpack_outcomes(code));
  return LossTensor(spaces, std::move(blocks));
}

}  // namespace detail

/// Built-in losses.  Values are constant across the supplied strata.
///
///   classification          l(D; Y(0)) = (1-D)(1-Y(0)) l0 + D Y(0) lt1 + c_D
///                           params: l0, lt1, c0, c1                (K=M=2)
///   classification-general  l(D; Y(0), Y(1)) = l_{Y(D)} + lt_{Y(1-D)} + c_D
///                           params: l0, l1, lt0, lt1, c0, c1       (K=M=2)
///   asymmetric              principal-strata loss with responder/harmed
///                           weights; params: lR0, lR1, lH0, lH1, l0, l1,
///                           c0, c1; requires lR0 > lR1 >= 0, lH0 > lH1 >= 0
///                                                                  (K=M=2)
///   trichotomous            l(D; Y) = l_{Y(D)} + c_D + sum_{k<D} r_k Y(k)
///                           params: l0, l1, c0, c1, c2, r0, r1     (K=3,M=2)
inline LossTensor builtin_example(const std::string& name, const ParamMap& params,
                                  std::vector<std::string> strata = {"x0"}) {
  using detail::param;
  if (name == "classification") {
    const Spaces spaces(2, 2, std::move(strata));
    const Rat l0 = param(params, "l0"), lt1 = param(params, "lt1");
    const Rat c[2] = {param(params, "c0"), param(params, "c1")};
    return detail::materialize(spaces, [&](int d, const std::vector<int>& y) {
      return Rat((1 - d) * (1 - y[0])) * l0 + Rat(d * y[0]) * lt1 + c[d];
    });
  }
  if (name == "classification-general") {
    const Spaces spaces(2, 2, std::move(strata));
    const Rat l[2] = {param(params, "l0"), param(params, "l1")};
    const Rat lt[2] = {param(params, "lt0"), param(params, "lt1")};
    const Rat c[2] = {param(params, "c0"), param(params, "c1")};
    return detail::materialize(spaces, [&](int d, const std::vector<int>& y) {
      return l[y[static_cast<std::size_t>(d)]] + lt[y[static_cast<std::size_t>(1 - d)]] + c[d];
    });
  }
  if (name == "asymmetric") {
    const Spaces spaces(2, 2, std::move(strata));
    const Rat lR[2] = {param(params, "lR0"), param(params, "lR1")};
    const Rat lH[2] = {param(params, "lH0"), param(params, "lH1")};
    const Rat l[2] = {param(params, "l0"), param(params, "l1")};
    const Rat c[2] = {param(params, "c0"), param(params, "c1")};
    if (!(lR[0] > lR[1] && lR[1] >= 0))
      throw ConstraintViolatedError("asymmetric loss requires lR0 > lR1 >= 0");
    if (!(lH[0] > lH[1] && lH[1] >= 0))
      throw ConstraintViolatedError("asymmetric loss requires lH0 > lH1 >= 0");
    return detail::materialize(spaces, [&](int d, const std::vector<int>& y) {
      const int y0 = y[0], y1 = y[1];
      return Rat((1 - y0) * y1) * lR[d] + Rat(y0 * (1 - y1)) * lH[1 - d] +
             Rat(y0 * y1) * l[1] + Rat((1 - y0) * (1 - y1)) * l[0] + c[d];
    });
  }
  if (name == "trichotomous") {
    const Spaces spaces(3, 2, std::move(strata));
    const Rat l[2] = {param(params, "l0"), param(params, "l1")};
    const Rat c[3] = {param(params, "c0"), param(params, "c1"), param(params, "c2")};
    const Rat r[2] = {param(params, "r0"), param(params, "r1")};
    return detail::materialize(spaces, [&](int d, const std::vector<int>& y) {
      Rat value = l[y[static_cast<std::size_t>(d)]] + c[d];
      for (int k = 0; k < d; ++k) value += r[k] * Rat(y[static_cast<std::size_t>(k)]);
      return value;
    });
  }
  throw MissingParamError("unknown builtin example '" + name + "'");
}

}  // namespace cfl
