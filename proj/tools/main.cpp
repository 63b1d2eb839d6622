// cfl: counterfactual-loss decision theory on finite spaces.
//
// One binary, subcommand dispatch, deterministic output.  Exit codes:
//   0  success
//   2  validation error (parse failure, schema violation, misuse)
//   3  infeasible input or negative certificate (non-additive loss,
//      no standard loss, infeasible marginals, empty propensity cell)
//   4  enumeration guard exceeded

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cfl/cfl.hpp"

namespace {

using cfl::jsonio::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cfl::ValidationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw cfl::ValidationError("cannot write file: " + out_path);
  out << content;
  if (!content.empty() && content.back() != '\n') out << '\n';
}

cfl::ParamMap parse_params(const std::vector<std::string>& raw) {
  cfl::ParamMap params;
  for (const std::string& item : raw) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw cfl::ValidationError("expected --param name=value, got '" + item + "'");
    params[item.substr(0, eq)] = cfl::parse_rational(item.substr(eq + 1));
  }
  return params;
}

cfl::ViewVariant view_variant_of(const std::string& name) {
  if (name == "a" || name == "marginals") return cfl::ViewVariant::marginals_only;
  if (name == "b" || name == "extended") return cfl::ViewVariant::extended;
  throw cfl::ValidationError("unknown view variant '" + name + "' (use a|b)");
}

json residual_json(const cfl::NotAdditive& cert) {
  json out;
  out["variant"] = cert.variant == cfl::Variant::full ? "full" : "restricted";
  out["strata"] = json::array();
  for (std::size_t s = 0; s < cert.spaces.num_strata(); ++s) {
    json stratum;
    stratum["label"] = cert.spaces.strata()[s];
    stratum["residual"] = json::array();
    for (int d = 0; d < cert.spaces.K(); ++d)
      for (std::size_t code = 0; code < cert.spaces.outcome_vectors(); ++code) {
        const cfl::Rat& v = cert.residual[s][cert.spaces.joint_index(d, code)];
        if (v == 0) continue;
        json cell;
        cell["d"] = d;
        cell["y"] = cert.spaces.unpack_outcomes(code);
        cell["value"] = cfl::rat_to_string(v);
        stratum["residual"].push_back(std::move(cell));
      }
    out["strata"].push_back(std::move(stratum));
  }
  return out;
}

json risk_report_json(const cfl::RiskReport& report, const cfl::Spaces& spaces) {
  json out;
  if (report.has_level) {
    out["total"] = cfl::rat_to_string(report.total);
    out["conditional"] = json::object();
    for (std::size_t s = 0; s < report.conditional.size(); ++s)
      out["conditional"][spaces.strata()[s]] = cfl::rat_to_string(report.conditional[s]);
  }
  if (report.has_identified) {
    out["identified_total"] = cfl::rat_to_string(report.identified_total);
    out["identified_part"] = json::object();
    for (std::size_t s = 0; s < report.identified_part.size(); ++s)
      out["identified_part"][spaces.strata()[s]] = cfl::rat_to_string(report.identified_part[s]);
    out["constant_part"] = json::object();
    for (std::size_t s = 0; s < report.constant_part.size(); ++s)
      out["constant_part"][spaces.strata()[s]] =
          report.constant_part[s] ? json(cfl::rat_to_string(*report.constant_part[s]))
                                  : json("unknown");
    out["exact"] = report.exact;
  }
  return out;
}

std::string corollary3_table(const cfl::BinaryDecomposition& bd) {
  std::ostringstream out;
  const cfl::Spaces& spaces = bd.spaces;
  for (std::size_t s = 0; s < spaces.num_strata(); ++s) {
    out << "stratum " << spaces.strata()[s] << "\n";
    out << "  term        d  k  weight         probability\n";
    for (int d = 0; d < spaces.K(); ++d) {
      const std::size_t du = static_cast<std::size_t>(d);
      out << "  accuracy    " << d << "  " << d << "  "
          << cfl::rat_to_string(bd.zeta[s][du][du]) << "  "
          << cfl::rat_to_string(bd.accuracy[s][du]) << "\n";
      for (int k = 0; k < spaces.K(); ++k)
        if (k != d)
          out << "  difficulty  " << d << "  " << k << "  "
              << cfl::rat_to_string(bd.zeta[s][static_cast<std::size_t>(k)][du]) << "  "
              << cfl::rat_to_string(bd.difficulty[s][du][static_cast<std::size_t>(k)]) << "\n";
      out << "  baseline    " << d << "  -  " << cfl::rat_to_string(bd.xi[s][du]) << "  "
          << cfl::rat_to_string(bd.baseline[s][du]) << "\n";
    }
    out << "  constant    -  -  "
        << (bd.constant[s] ? cfl::rat_to_string(*bd.constant[s]) : std::string("unknown"))
        << "  1\n";
    out << "  conditional " << (bd.constant[s] ? "risk" : "identified part") << ": "
        << cfl::rat_to_string(bd.reassembled[s]) << "\n";
  }
  return out.str();
}

// --- subcommand runners ----------------------------------------------------

int run_example(const std::string& name, const std::vector<std::string>& raw_params,
                const std::vector<std::string>& strata, const std::string& out_path) {
  std::vector<std::string> labels = strata.empty() ? std::vector<std::string>{"x0"} : strata;
  const cfl::LossTensor loss = cfl::builtin_example(name, parse_params(raw_params), labels);
  write_output(out_path, cfl::loss_to_json(loss).dump(2));
  return 0;
}

int run_matrix(int K, int M, const std::string& variant, bool paper_layout,
               const std::string& out_path) {
  std::vector<std::string> labels{"x0"};
  const cfl::Spaces spaces(K, M, labels);
  cfl::RatMat grid;
  if (paper_layout) {
    cfl::GridKind kind;
    if (variant == "standard") kind = cfl::GridKind::standard;
    else if (variant == "restricted") kind = cfl::GridKind::restricted;
    else if (variant == "full") kind = cfl::GridKind::full;
    else throw cfl::ValidationError("unknown matrix variant '" + variant + "'");
    grid = cfl::paper_layout_matrix(spaces, kind);
  } else if (variant == "standard") {
    grid = cfl::standard_structure_matrix(spaces);
  } else if (variant == "restricted" || variant == "full") {
    grid = cfl::build_structure_matrix(
               spaces, variant == "full" ? cfl::Variant::full : cfl::Variant::restricted)
               .m;
  } else {
    throw cfl::ValidationError("unknown matrix variant '" + variant + "'");
  }
  std::ostringstream out;
  for (const cfl::RatVec& row : grid) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      out << cfl::rat_to_string(row[j]);
    }
    out << '\n';
  }
  out << "rank " << cfl::linalg::rank(grid) << '\n';
  write_output(out_path, out.str());
  return 0;
}

int run_check_additivity(const std::string& loss_path, const std::string& variant,
                         const std::string& out_path) {
  const cfl::LossTensor loss = cfl::load_loss(read_file(loss_path));
  json doc;
  int code = 0;
  if (variant.empty()) {
    const cfl::RegimeLabel label = cfl::classify(loss);
    doc["regime"] = cfl::regime_name(label.regime);
    if (label.witness) doc["decomposition"] = cfl::decomposition_to_json(*label.witness);
    if (label.residual) {
      doc["residual_certificate"] = residual_json(*label.residual);
      code = 3;
    }
  } else {
    const cfl::Variant v =
        variant == "full" ? cfl::Variant::full : cfl::Variant::restricted;
    if (variant != "full" && variant != "restricted")
      throw cfl::ValidationError("variant must be restricted|full");
    cfl::DecomposeResult result = cfl::decompose(loss, v);
    if (cfl::is_additive(result)) {
      doc["additive"] = true;
      doc["decomposition"] =
          cfl::decomposition_to_json(std::get<cfl::AdditiveDecomposition>(result));
    } else {
      doc["additive"] = false;
      doc["residual_certificate"] = residual_json(std::get<cfl::NotAdditive>(result));
      code = 3;
    }
  }
  write_output(out_path, doc.dump(2));
  return code;
}

int run_weights(const std::string& loss_path, const std::string& variant,
                const std::string& out_path) {
  const cfl::LossTensor loss = cfl::load_loss(read_file(loss_path));
  const cfl::Variant v = variant == "restricted" ? cfl::Variant::restricted : cfl::Variant::full;
  cfl::DecomposeResult result = cfl::decompose(loss, v);
  if (!cfl::is_additive(result)) {
    json doc;
    doc["additive"] = false;
    doc["residual_certificate"] = residual_json(std::get<cfl::NotAdditive>(result));
    write_output(out_path, doc.dump(2));
    return 3;
  }
  write_output(out_path,
               cfl::decomposition_to_json(std::get<cfl::AdditiveDecomposition>(result)).dump(2));
  return 0;
}

int run_risk(const std::string& loss_path, const std::string& model_path,
             const std::string& variant, const std::string& mode, const std::string& out_path) {
  const cfl::LossTensor loss = cfl::load_loss(read_file(loss_path));
  const cfl::JointModel model = cfl::load_model(
      read_file(model_path),
      mode == "float" ? cfl::NumericMode::floating : cfl::NumericMode::rational);
  const cfl::RiskReport truth = cfl::true_risk(loss, model);

  json doc;
  doc["true_risk"] = risk_report_json(truth, loss.spaces());
  const cfl::RegimeLabel label = cfl::classify(loss);
  doc["regime"] = cfl::regime_name(label.regime);
  if (label.witness) {
    cfl::ViewVariant vv;
    if (variant == "auto")
      vv = label.witness->intercept_zero() ? cfl::ViewVariant::marginals_only
                                           : cfl::ViewVariant::extended;
    else
      vv = view_variant_of(variant);
    const cfl::ObservableView view = cfl::marginalize(model, vv);
    const cfl::RiskReport identified = cfl::identified_risk(*label.witness, view);
    doc["identified_risk"] = risk_report_json(identified, loss.spaces());
    if (identified.has_level && mode != "float" && identified.total != truth.total)
      throw cfl::DimensionMismatchError("identified and true risk disagree");
    if (loss.spaces().M() == 2) {
      const cfl::BinaryDecomposition bd = cfl::binary_decomposition(*label.witness, view);
      doc["corollary3_table"] = corollary3_table(bd);
    }
  }
  if (mode == "float") {
    doc["true_risk"]["total_float"] = cfl::to_double(truth.total);
  }
  write_output(out_path, doc.dump(2));
  return 0;
}

int run_risk_diff(const std::string& loss_path, const std::vector<std::string>& model_paths,
                  const std::string& out_path) {
  if (model_paths.size() != 2)
    throw cfl::ValidationError("risk-diff needs exactly two --model files");
  const cfl::LossTensor loss = cfl::load_loss(read_file(loss_path));
  const cfl::JointModel m1 = cfl::load_model(read_file(model_paths[0]));
  const cfl::JointModel m2 = cfl::load_model(read_file(model_paths[1]));
  const cfl::RiskReport t1 = cfl::true_risk(loss, m1);
  const cfl::RiskReport t2 = cfl::true_risk(loss, m2);

  json doc;
  doc["true_difference"] = cfl::rat_to_string(t1.total - t2.total);
  const cfl::RegimeLabel label = cfl::classify(loss);
  doc["regime"] = cfl::regime_name(label.regime);
  if (!label.witness) {
    doc["identified"] = false;
    write_output(out_path, doc.dump(2));
    return 3;
  }
  if (!label.witness->intercept_zero()) {
    // Difference identification across systems needs a shared population.
    for (std::size_t s = 0; s < loss.spaces().num_strata(); ++s)
      if (m1.outcome_joint(s) != m2.outcome_joint(s) ||
          m1.stratum_weights() != m2.stratum_weights())
        throw cfl::DimensionMismatchError(
            "models must share the potential-outcome law for difference identification");
  }
  const cfl::ObservableView v1 = cfl::marginalize(m1, cfl::ViewVariant::marginals_only);
  const cfl::ObservableView v2 = cfl::marginalize(m2, cfl::ViewVariant::marginals_only);
  const cfl::RiskReport r1 = cfl::identified_risk(*label.witness, v1, /*require_level=*/false);
  const cfl::RiskReport r2 = cfl::identified_risk(*label.witness, v2, /*require_level=*/false);
  cfl::Rat diff = r1.identified_total - r2.identified_total;
  doc["identified"] = true;
  doc["identified_difference"] = cfl::rat_to_string(diff);
  doc["agrees_with_truth"] = (diff == t1.total - t2.total);
  write_output(out_path, doc.dump(2));
  return 0;
}

int run_optimize_policy(const std::string& loss_path, const std::string& model_path,
                        unsigned jobs, const std::string& out_path) {
  const cfl::LossTensor loss = cfl::load_loss(read_file(loss_path));
  const cfl::JointModel model = cfl::load_model(read_file(model_path));
  const cfl::RegimeLabel label = cfl::classify(loss);
  if (!label.witness)
    throw cfl::RestrictionViolatedError("loss is not additive: no identifiable policy objective");
  std::vector<cfl::RatMat> marginals;
  for (std::size_t s = 0; s < model.spaces().num_strata(); ++s)
    marginals.push_back(model.potential_marginals(s));
  const cfl::PolicySearchResult result =
      cfl::optimize_policy(*label.witness, marginals, model.stratum_weights(), jobs);

  json doc;
  doc["policy"] = json::object();
  doc["policy"]["strata"] = json::array();
  for (std::size_t s = 0; s < model.spaces().num_strata(); ++s) {
    json row;
    row["label"] = model.spaces().strata()[s];
    row["decision"] = result.policy.decision(s);
    doc["policy"]["strata"].push_back(std::move(row));
  }
  doc["score"] = cfl::rat_to_string(result.score);
  doc["stratum_scores"] = json::object();
  for (std::size_t s = 0; s < model.spaces().num_strata(); ++s)
    doc["stratum_scores"][model.spaces().strata()[s]] =
        cfl::rat_to_string(result.stratum_scores[s]);
  write_output(out_path, doc.dump(2));
  return 0;
}

int run_to_standard(const std::string& loss_path, const std::string& out_path) {
  const cfl::LossTensor loss = cfl::load_loss(read_file(loss_path));
  if (loss.spaces().K() != 2)
    throw cfl::DecisionNotBinaryError("to-standard requires K = 2 (see std-exists)");
  const cfl::RegimeLabel label = cfl::classify(loss);
  if (!label.witness) {
    json doc;
    doc["additive"] = false;
    doc["residual_certificate"] = residual_json(*label.residual);
    write_output(out_path, doc.dump(2));
    return 3;
  }
  const cfl::StandardLoss std_loss = cfl::to_standard_loss(*label.witness);
  write_output(out_path, cfl::standard_loss_to_json(std_loss).dump(2));
  return 0;
}

int run_std_exists(const std::string& loss_path, const std::string& out_path) {
  const cfl::LossTensor loss = cfl::load_loss(read_file(loss_path));
  const cfl::RegimeLabel label = cfl::classify(loss);
  if (!label.witness)
    throw cfl::RestrictionViolatedError("loss is not additive; no decomposition to test");
  const cfl::EquivalenceCertificate cert = cfl::standard_loss_exists(*label.witness);
  json doc;
  doc["exists"] = cert.exists;
  if (cert.exists) {
    doc["standard_loss"] = cfl::standard_loss_to_json(*cert.standard);
    write_output(out_path, doc.dump(2));
    return 0;
  }
  const cfl::NoStandardWitness& w = *cert.witness;
  json witness;
  witness["k"] = w.k;
  witness["j"] = w.j;
  witness["j_prime"] = w.j_prime;
  witness["y"] = w.y;
  witness["stratum"] = loss.spaces().strata()[w.stratum];
  witness["law1"] = json::array();
  witness["law2"] = json::array();
  for (std::size_t code = 0; code < loss.spaces().outcome_vectors(); ++code) {
    if (w.law1[code] != 0) {
      json cell;
      cell["y"] = loss.spaces().unpack_outcomes(code);
      cell["prob"] = cfl::rat_to_string(w.law1[code]);
      witness["law1"].push_back(std::move(cell));
    }
    if (w.law2[code] != 0) {
      json cell;
      cell["y"] = loss.spaces().unpack_outcomes(code);
      cell["prob"] = cfl::rat_to_string(w.law2[code]);
      witness["law2"].push_back(std::move(cell));
    }
  }
  witness["gap_pi_j"] = cfl::rat_to_string(w.gap_j);
  witness["gap_pi_j_prime"] = cfl::rat_to_string(w.gap_j_prime);
  doc["witness"] = std::move(witness);
  write_output(out_path, doc.dump(2));
  return 3;
}

// Wraps a single stratum's joint vector as a standalone model document so
// oracle counterexamples re-parse under the model loader.
json joint_as_model_doc(const cfl::Spaces& spaces, std::size_t stratum, const cfl::RatVec& p) {
  const cfl::Spaces single(spaces.K(), spaces.M(), {spaces.strata()[stratum]});
  const cfl::RatVec uniform_prop(static_cast<std::size_t>(spaces.K()),
                                 cfl::Rat(1) / cfl::Rat(spaces.K()));
  const cfl::JointModel model(single, {p}, {uniform_prop}, cfl::RatVec{cfl::Rat(1)});
  return cfl::model_to_json(model);
}

int run_oracle(const std::string& loss_path, const std::string& variant, std::size_t trials,
               std::uint64_t seed, unsigned jobs, const std::string& out_path) {
  const cfl::LossTensor loss = cfl::load_loss(read_file(loss_path));
  const cfl::CertifyReport report =
      cfl::certify_identifiability(loss, view_variant_of(variant), trials, seed, jobs);
  json doc;
  doc["verdict"] = report.identifiable ? "EMPIRICALLY-IDENTIFIABLE" : "NON-IDENTIFIABLE";
  doc["view"] = variant;
  doc["trials"] = report.trials;
  doc["max_width"] = cfl::rat_to_string(report.max_width);
  doc["classify"] = cfl::regime_name(report.regime);
  doc["agreement"] = report.agreement;
  if (report.widest_interval) {
    json interval;
    interval["min"] = cfl::rat_to_string(report.widest_interval->min);
    interval["max"] = cfl::rat_to_string(report.widest_interval->max);
    auto vec_json = [](const cfl::RatVec& v) {
      json arr = json::array();
      for (const cfl::Rat& x : v) arr.push_back(cfl::rat_to_string(x));
      return arr;
    };
    interval["argmin_p"] = vec_json(report.widest_interval->argmin);
    interval["argmax_p"] = vec_json(report.widest_interval->argmax);
    doc["interval"] = std::move(interval);
  }
  if (report.counterexample) {
    const cfl::FiberCounterexample& cx = *report.counterexample;
    json c;
    c["stratum"] = loss.spaces().strata()[cx.stratum];
    c["gap"] = cfl::rat_to_string(cx.gap);
    json q = json::array();
    for (const cfl::Rat& x : cx.q) q.push_back(cfl::rat_to_string(x));
    c["q"] = std::move(q);
    c["p1"] = joint_as_model_doc(loss.spaces(), cx.stratum, cx.p1);
    c["p2"] = joint_as_model_doc(loss.spaces(), cx.stratum, cx.p2);
    doc["counterexample"] = std::move(c);
  }
  write_output(out_path, doc.dump(2));
  return report.identifiable ? 0 : 3;
}

int run_simulate(const std::string& model_path, std::size_t n, std::uint64_t seed,
                 const std::string& mode, const std::string& out_path) {
  const cfl::JointModel model = cfl::load_model(
      read_file(model_path),
      mode == "float" ? cfl::NumericMode::floating : cfl::NumericMode::rational);
  const std::vector<cfl::Record> records = cfl::simulate_records(model, n, seed);
  write_output(out_path, cfl::records_to_csv(records));
  return 0;
}

int run_estimate(const std::string& records_path, const std::string& weights_path,
                 const std::string& model_path, std::size_t n, std::uint64_t seed,
                 std::size_t reps, unsigned jobs, const std::string& out_path) {
  const cfl::AdditiveDecomposition decomp = cfl::load_decomposition(read_file(weights_path));
  json doc;
  if (!records_path.empty()) {
    const std::vector<cfl::Record> records = cfl::parse_records_csv(read_file(records_path));
    const cfl::EmpiricalView view = cfl::empirical_view(records, decomp.spaces());
    const cfl::EstimateReport report = cfl::estimate_identified_risk(decomp, view);
    doc["n"] = report.n;
    doc["identified_risk"] = report.identified_total;
    doc["per_stratum"] = report.per_stratum;
    doc["constant_omitted"] = report.constant_omitted;
  } else {
    if (model_path.empty())
      throw cfl::ValidationError("estimate needs --records or --model with --n/--seed");
    const cfl::JointModel model = cfl::load_model(read_file(model_path));
    std::vector<double> estimates(reps, 0.0);
    cfl::parallel_map_chunks(reps, jobs, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t r = lo; r < hi; ++r) {
        const std::uint64_t rep_seed = cfl::CounterRng(seed).stream(100 + r).next_u64();
        const std::vector<cfl::Record> records = cfl::simulate_records(model, n, rep_seed);
        const cfl::EmpiricalView view = cfl::empirical_view(records, decomp.spaces());
        estimates[r] = cfl::estimate_identified_risk(decomp, view).identified_total;
      }
      return 0;
    });
    doc["n"] = n;
    doc["reps"] = reps;
    doc["estimates"] = estimates;
    double mean = 0.0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(reps);
    doc["mean_estimate"] = mean;
  }
  write_output(out_path, doc.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterfactual-loss decision theory toolkit"};
  app.require_subcommand(1);

  int exit_code = 0;
  try {
    // example
    auto* example = app.add_subcommand("example", "materialize a built-in loss");
    std::string ex_name, ex_out;
    std::vector<std::string> ex_params, ex_strata;
    example->add_option("--name", ex_name)->required();
    example->add_option("--param", ex_params, "name=value, repeatable");
    example->add_option("--strata", ex_strata, "stratum labels (default x0)");
    example->add_option("--out", ex_out);
    example->callback([&] { exit_code = run_example(ex_name, ex_params, ex_strata, ex_out); });

    // matrix
    auto* matrix = app.add_subcommand("matrix", "print a structure matrix and its rank");
    int mx_K = 2, mx_M = 2;
    std::string mx_variant = "full", mx_out;
    bool mx_paper = false;
    matrix->add_option("--K", mx_K)->required();
    matrix->add_option("--M", mx_M)->required();
    matrix->add_option("--variant", mx_variant, "standard|restricted|full");
    matrix->add_flag("--paper-layout", mx_paper, "published row/column order (K=M=2)");
    matrix->add_option("--out", mx_out);
    matrix->callback([&] { exit_code = run_matrix(mx_K, mx_M, mx_variant, mx_paper, mx_out); });

    // check-additivity
    auto* check = app.add_subcommand("check-additivity", "classify the identifiability regime");
    std::string ca_loss, ca_variant, ca_out;
    check->add_option("--loss", ca_loss)->required();
    check->add_option("--variant", ca_variant, "restricted|full (default: classify both)");
    check->add_option("--out", ca_out);
    check->callback([&] { exit_code = run_check_additivity(ca_loss, ca_variant, ca_out); });

    // weights
    auto* weights = app.add_subcommand("weights", "emit an additive decomposition");
    std::string w_loss, w_variant = "full", w_out;
    weights->add_option("--loss", w_loss)->required();
    weights->add_option("--variant", w_variant, "restricted|full");
    weights->add_option("--out", w_out);
    weights->callback([&] { exit_code = run_weights(w_loss, w_variant, w_out); });

    // risk
    auto* risk = app.add_subcommand("risk", "true and identified risks for a model");
    std::string r_loss, r_model, r_variant = "auto", r_mode = "rational", r_out;
    risk->add_option("--loss", r_loss)->required();
    risk->add_option("--model", r_model)->required();
    risk->add_option("--variant", r_variant, "a|b|auto observable view");
    risk->add_option("--mode", r_mode, "rational|float");
    risk->add_option("--out", r_out);
    risk->callback([&] { exit_code = run_risk(r_loss, r_model, r_variant, r_mode, r_out); });

    // risk-diff
    auto* diff = app.add_subcommand("risk-diff", "identified risk difference of two systems");
    std::string rd_loss, rd_out;
    std::vector<std::string> rd_models;
    diff->add_option("--loss", rd_loss)->required();
    diff->add_option("--model", rd_models, "model file (give twice)")->expected(1, 2);
    diff->add_option("--out", rd_out);
    diff->callback([&] { exit_code = run_risk_diff(rd_loss, rd_models, rd_out); });

    // optimize-policy
    auto* opt = app.add_subcommand("optimize-policy", "argmin deterministic rule");
    std::string op_loss, op_model, op_out;
    unsigned op_jobs = 1;
    opt->add_option("--loss", op_loss)->required();
    opt->add_option("--model", op_model)->required();
    opt->add_option("--jobs", op_jobs);
    opt->add_option("--out", op_out);
    opt->callback([&] { exit_code = run_optimize_policy(op_loss, op_model, op_jobs, op_out); });

    // to-standard
    auto* tostd = app.add_subcommand("to-standard", "binary-decision standard-loss reduction");
    std::string ts_loss, ts_out;
    tostd->add_option("--loss", ts_loss)->required();
    tostd->add_option("--out", ts_out);
    tostd->callback([&] { exit_code = run_to_standard(ts_loss, ts_out); });

    // std-exists
    auto* stde = app.add_subcommand("std-exists", "standard-loss existence for K >= 3");
    std::string se_loss, se_out;
    stde->add_option("--loss", se_loss)->required();
    stde->add_option("--out", se_out);
    stde->callback([&] { exit_code = run_std_exists(se_loss, se_out); });

    // oracle
    auto* oracle = app.add_subcommand("oracle", "brute-force identifiability certification");
    std::string or_loss, or_variant = "b", or_out;
    std::size_t or_trials = 50;
    std::uint64_t or_seed = 0;
    unsigned or_jobs = 1;
    oracle->add_option("--loss", or_loss)->required();
    oracle->add_option("--variant", or_variant, "a|b observable view");
    oracle->add_option("--trials", or_trials);
    oracle->add_option("--seed", or_seed)->required();
    oracle->add_option("--jobs", or_jobs);
    oracle->add_option("--out", or_out);
    oracle->callback(
        [&] { exit_code = run_oracle(or_loss, or_variant, or_trials, or_seed, or_jobs, or_out); });

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw IID records from a model");
    std::string sm_model, sm_mode = "rational", sm_out;
    std::size_t sm_n = 0;
    std::uint64_t sm_seed = 0;
    sim->add_option("--model", sm_model)->required();
    sim->add_option("--n", sm_n)->required();
    sim->add_option("--seed", sm_seed)->required();
    sim->add_option("--mode", sm_mode, "rational|float model validation");
    sim->add_option("--out", sm_out);
    sim->callback([&] { exit_code = run_simulate(sm_model, sm_n, sm_seed, sm_mode, sm_out); });

    // estimate
    auto* est = app.add_subcommand("estimate", "plug-in identified risk from records");
    std::string es_records, es_weights, es_model, es_out;
    std::size_t es_n = 0, es_reps = 1;
    std::uint64_t es_seed = 0;
    unsigned es_jobs = 1;
    est->add_option("--records", es_records);
    est->add_option("--weights", es_weights)->required();
    est->add_option("--model", es_model, "simulate internally instead of --records");
    est->add_option("--n", es_n);
    est->add_option("--seed", es_seed);
    est->add_option("--reps", es_reps);
    est->add_option("--jobs", es_jobs);
    est->add_option("--out", es_out);
    est->callback([&] {
      exit_code = run_estimate(es_records, es_weights, es_model, es_n, es_seed, es_reps, es_jobs,
                               es_out);
    });

    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const cfl::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return exit_code;
}
