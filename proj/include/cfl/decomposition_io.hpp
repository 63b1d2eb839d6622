#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cfl/additivity.hpp"
#include "cfl/json_util.hpp"

namespace cfl {

// Decomposition-file schema: mirrors the loss-file layout with `weights`,
// `intercept`, and `free_params` sections.
//
// {
//   "K": 2, "M": 2, "variant": "full",
//   "free_params": [ { "column": "omega0(1,1)", "symbol": "t0" } ],
//   "strata": [
//     { "label": "x0",
//       "weights":   [ { "k": 0, "d": 0, "y": 0, "value": "1" }, ... ],
//       "intercept": [ { "y": [0, 0], "value": "0" }, ... ] }
//   ]
// }

inline jsonio::json decomposition_to_json(const AdditiveDecomposition& decomp) {
  using jsonio::json;
  const Spaces& spaces = decomp.spaces();
  json doc;
  doc["K"] = spaces.K();
  doc["M"] = spaces.M();
  doc["variant"] = decomp.variant() == Variant::full ? "full" : "restricted";
  doc["free_params"] = json::array();
  for (const FreeParam& fp : decomp.free_params()) {
    json p;
    p["column"] = fp.column_name;
    p["symbol"] = fp.symbol;
    doc["free_params"].push_back(std::move(p));
  }
  doc["strata"] = json::array();
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    json stratum;
    stratum["label"] = spaces.strata()[s];
    stratum["weights"] = json::array();
    for (int k = 0; k < spaces.K(); ++k)
      for (int d = 0; d < spaces.K(); ++d)
        for (int y = 0; y < spaces.M(); ++y) {
          json w;
          w["k"] = k;
          w["d"] = d;
          w["y"] = y;
          w["value"] = rat_to_string(decomp.omega(s, k, d, y));
          stratum["weights"].push_back(std::move(w));
        }
    stratum["intercept"] = json::array();
    for (std::size_t code = 0; code < spaces.outcome_vectors(); ++code) {
      json v;
      v["y"] = spaces.unpack_outcomes(code);
      v["value"] = rat_to_string(decomp.varpi(s, code));
      stratum["intercept"].push_back(std::move(v));
    }
    doc["strata"].push_back(std::move(stratum));
  }
  return doc;
}

inline AdditiveDecomposition load_decomposition(const std::string& text) {
  using jsonio::json;
  const json doc = jsonio::parse_document(text, "decomposition file");
  jsonio::reject_unknown_fields(doc, {"K", "M", "variant", "free_params", "strata"},
                                "decomposition file");
  const int K = jsonio::require_int(doc, "K", "decomposition file");
  const int M = jsonio::require_int(doc, "M", "decomposition file");
  const std::string variant_name =
      jsonio::require_string(doc, "variant", "decomposition file");
  Variant variant;
  if (variant_name == "full") variant = Variant::full;
  else if (variant_name == "restricted") variant = Variant::restricted;
  else throw SchemaError("decomposition file: variant must be 'full' or 'restricted'");

  const json& strata = jsonio::require_field(doc, "strata", "decomposition file");
  if (!strata.is_array() || strata.empty())
    throw SchemaError("decomposition file: 'strata' must be a nonempty array");
  std::vector<std::string> labels;
  for (const json& s : strata) labels.push_back(jsonio::require_string(s, "label", "stratum"));
  const Spaces spaces(K, M, labels);

  std::vector<FreeParam> free_params;
  if (doc.contains("free_params")) {
    for (const json& p : doc["free_params"]) {
      jsonio::reject_unknown_fields(p, {"column", "symbol"}, "free param");
      free_params.push_back(FreeParam{0, jsonio::require_string(p, "column", "free param"),
                                      jsonio::require_string(p, "symbol", "free param")});
    }
  }

  std::vector<RatVec> weights(spaces.num_strata(), RatVec(spaces.weight_cols(), Rat(0)));
  std::vector<RatVec> intercept(spaces.num_strata(), RatVec(spaces.intercept_cols(), Rat(0)));
  std::size_t si = 0;
  for (const json& s : strata) {
    jsonio::reject_unknown_fields(s, {"label", "weights", "intercept"}, "stratum");
    const json& ws = jsonio::require_field(s, "weights", "stratum");
    std::vector<bool> seen_w(spaces.weight_cols(), false);
    for (const json& w : ws) {
      jsonio::reject_unknown_fields(w, {"k", "d", "y", "value"}, "weight entry");
      const std::size_t idx = spaces.weight_index(jsonio::require_int(w, "k", "weight entry"),
                                                  jsonio::require_int(w, "d", "weight entry"),
                                                  jsonio::require_int(w, "y", "weight entry"));
      if (seen_w[idx]) throw DuplicateEntryError("duplicate weight entry");
      seen_w[idx] = true;
      weights[si][idx] = jsonio::require_rational(w, "value", "weight entry");
    }
    for (bool seen : seen_w)
      if (!seen) throw MissingEntryError("decomposition stratum '" + labels[si] +
                                         "' is missing weight entries");
    const json& vs = jsonio::require_field(s, "intercept", "stratum");
    std::vector<bool> seen_v(spaces.intercept_cols(), false);
    for (const json& v : vs) {
      jsonio::reject_unknown_fields(v, {"y", "value"}, "intercept entry");
      const std::size_t code =
          spaces.pack_outcomes(jsonio::require_int_array(v, "y", "intercept entry"));
      if (seen_v[code]) throw DuplicateEntryError("duplicate intercept entry");
      seen_v[code] = true;
      intercept[si][code] = jsonio::require_rational(v, "value", "intercept entry");
    }
    for (bool seen : seen_v)
      if (!seen) throw MissingEntryError("decomposition stratum '" + labels[si] +
                                         "' is missing intercept entries");
    ++si;
  }
  return AdditiveDecomposition(spaces, variant, std::move(weights), std::move(intercept),
                               std::move(free_params));
}

}  // namespace cfl
