// End-to-end checks of the cfl binary: exit codes, document contracts,
// and byte-level idempotence.  Usage: cfl_cli_tests <path-to-cfl>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "cfl/cfl.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

#define CHECK_MSG(cond, msg)                                                        \
  do {                                                                              \
    if (!(cond)) {                                                                  \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << "  " << msg << "\n"; \
      ++g_failures;                                                                 \
    }                                                                               \
  } while (0)

std::string g_binary;
fs::path g_dir;

int run_cli(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " >" + (g_dir / "stdout.txt").string() +
                          " 2>" + (g_dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

fs::path path(const std::string& name) { return g_dir / name; }

void write_inputs() {
  using namespace cfl;
  // Running classification-general instance.
  const LossTensor eq3 = builtin_example(
      "classification-general", {{"l0", Rat(1)}, {"l1", Rat(0)}, {"lt0", Rat(0)},
                                 {"lt1", Rat(1, 2)}, {"c0", Rat(0)}, {"c1", Rat(1, 10)}});
  spit(path("eq3.json"), loss_to_json(eq3).dump(2));

  const LossTensor asym = builtin_example(
      "asymmetric", {{"lR0", Rat(1)}, {"lR1", Rat(0)}, {"lH0", Rat(3)}, {"lH1", Rat(0)},
                     {"l0", Rat(0)}, {"l1", Rat(0)}, {"c0", Rat(0)}, {"c1", Rat(0)}});
  spit(path("asym.json"), loss_to_json(asym).dump(2));

  spit(path("zero.json"),
       loss_to_json(LossTensor(Spaces(2, 2, {"x0"}), {RatVec(8, Rat(0))})).dump(2));

  const Spaces spaces(2, 2, {"x0"});
  const JointModel uniform(spaces, {RatVec(8, Rat(1, 8))}, {RatVec{Rat(1, 2), Rat(1, 2)}},
                           RatVec{Rat(1)});
  spit(path("uniform.json"), model_to_json(uniform).dump(2));

  // Two constant policies over a shared interior law.
  CounterRng rng(5);
  const RatVec law = random_interior_point(rng, 4);
  const JointModel m0 =
      embed_policy(Policy::deterministic(spaces, {0}), spaces, {law}, RatVec{Rat(1)});
  const JointModel m1 =
      embed_policy(Policy::deterministic(spaces, {1}), spaces, {law}, RatVec{Rat(1)});
  spit(path("m0.json"), model_to_json(m0).dump(2));
  spit(path("m1.json"), model_to_json(m1).dump(2));

  const char* names[3] = {"tri_r0.json", "tri_r3.json", "tri_r1.json"};
  const Rat r0s[3] = {Rat(0), Rat(3, 10), Rat(1, 10)};
  for (int i = 0; i < 3; ++i) {
    const LossTensor tri = builtin_example(
        "trichotomous", {{"l0", Rat(1)}, {"l1", Rat(0)}, {"c0", Rat(0)}, {"c1", Rat(1, 10)},
                         {"c2", Rat(3, 10)}, {"r0", r0s[i]}, {"r1", Rat(0)}});
    spit(path(names[i]), loss_to_json(tri).dump(2));
  }
  const LossTensor tri_pos = builtin_example(
      "trichotomous", {{"l0", Rat(1)}, {"l1", Rat(0)}, {"c0", Rat(0)}, {"c1", Rat(1, 10)},
                       {"c2", Rat(3, 10)}, {"r0", Rat(1, 2)}, {"r1", Rat(1, 2)}});
  spit(path("tri_pos.json"), loss_to_json(tri_pos).dump(2));

  // Trichotomous population with mu = (1/2, 7/10, 4/5): product law.
  const Spaces s3(3, 2, {"x0"});
  RatVec nu(8, Rat(0));
  const Rat mu[3] = {Rat(1, 2), Rat(7, 10), Rat(4, 5)};
  for (std::size_t code = 0; code < 8; ++code) {
    const std::vector<int> y = s3.unpack_outcomes(code);
    Rat mass(1);
    for (int k = 0; k < 3; ++k)
      mass *= y[static_cast<std::size_t>(k)] ? mu[k] : Rat(1) - mu[k];
    nu[code] = mass;
  }
  const JointModel tri_model =
      embed_policy(Policy::deterministic(s3, {0}), s3, {nu}, RatVec{Rat(1)});
  spit(path("tri_model.json"), model_to_json(tri_model).dump(2));

  // K = 4 zero loss to trip the oracle guard (joint size 64 > 40).
  const Spaces s4(4, 2, {"x0"});
  spit(path("k4.json"),
       loss_to_json(LossTensor(s4, {RatVec(s4.joint_size(), Rat(0))})).dump(2));
}

void test_example_subcommand() {
  const int rc = run_cli("example --name classification-general --param l0=1 --param l1=0 "
                         "--param lt0=0 --param lt1=1/2 --param c0=0 --param c1=1/10 --out " +
                         path("ex.json").string());
  CHECK_MSG(rc == 0, "example exit code " << rc);
  CHECK_MSG(cfl::load_loss(slurp(path("ex.json"))) == cfl::load_loss(slurp(path("eq3.json"))),
            "example output differs from the library builtin");

  CHECK_MSG(run_cli("example --name classification-general --param l0=1") == 2,
            "missing params should exit 2");
  CHECK_MSG(run_cli("example --name asymmetric --param lR0=0 --param lR1=1 --param lH0=1 "
                    "--param lH1=0 --param l0=0 --param l1=0 --param c0=0 --param c1=0") == 2,
            "constraint violation should exit 2");
}

void test_matrix_subcommand() {
  const fs::path out1 = path("grid1.txt"), out2 = path("grid2.txt");
  CHECK_MSG(run_cli("matrix --K 2 --M 2 --variant full --paper-layout --out " + out1.string()) ==
                0,
            "matrix exit code");
  CHECK_MSG(run_cli("matrix --K 2 --M 2 --variant full --paper-layout --out " + out2.string()) ==
                0,
            "matrix second run exit code");
  CHECK_MSG(slurp(out1) == slurp(out2), "matrix output must be byte-identical across runs");
  CHECK_MSG(slurp(out1).find("rank 7") != std::string::npos, "full variant rank 7");

  CHECK_MSG(run_cli("matrix --K 3 --M 2 --variant restricted --paper-layout") == 2,
            "paper layout outside K=M=2 should exit 2");
}

void test_additivity_subcommands() {
  CHECK_MSG(run_cli("check-additivity --loss " + path("zero.json").string() + " --out " +
                    path("zero_check.json").string()) == 0,
            "zero loss is additive");
  CHECK_MSG(slurp(path("zero_check.json")).find("\"regime\": \"exact\"") != std::string::npos,
            "zero loss classifies exact");

  CHECK_MSG(run_cli("check-additivity --loss " + path("asym.json").string() + " --out " +
                    path("asym_check.json").string()) == 3,
            "unequal-gap asymmetric loss should exit 3");
  CHECK_MSG(slurp(path("asym_check.json")).find("residual_certificate") != std::string::npos,
            "residual certificate emitted");

  CHECK_MSG(run_cli("weights --loss " + path("eq3.json").string() + " --variant restricted "
                    "--out " + path("eq3_decomp.json").string()) == 0,
            "weights exit code");
  // Schema round trip: the emitted document re-parses and reconstructs.
  const cfl::AdditiveDecomposition decomp =
      cfl::load_decomposition(slurp(path("eq3_decomp.json")));
  CHECK_MSG(decomp.reconstruct() == cfl::load_loss(slurp(path("eq3.json"))),
            "decomposition document reconstructs the loss");
}

void test_risk_subcommands() {
  CHECK_MSG(run_cli("risk --loss " + path("eq3.json").string() + " --model " +
                    path("uniform.json").string() + " --out " + path("risk.json").string()) == 0,
            "risk exit code");
  const std::string risk = slurp(path("risk.json"));
  CHECK_MSG(risk.find("\"total\": \"4/5\"") != std::string::npos, "uniform risk is 4/5");
  CHECK_MSG(risk.find("corollary3_table") != std::string::npos, "binary table emitted");

  CHECK_MSG(run_cli("risk-diff --loss " + path("eq3.json").string() + " --model " +
                    path("m0.json").string() + " --model " + path("m1.json").string() +
                    " --out " + path("diff.json").string()) == 0,
            "risk-diff exit code");
  CHECK_MSG(slurp(path("diff.json")).find("\"agrees_with_truth\": true") != std::string::npos,
            "identified difference equals true difference");

  CHECK_MSG(run_cli("risk-diff --loss " + path("asym.json").string() + " --model " +
                    path("m0.json").string() + " --model " + path("m1.json").string()) == 3,
            "non-additive loss: difference not identified, exit 3");
}

void test_policy_subcommand() {
  CHECK_MSG(run_cli("optimize-policy --loss " + path("tri_r0.json").string() + " --model " +
                    path("tri_model.json").string() + " --out " + path("pol0.json").string()) ==
                0,
            "optimize-policy exit code");
  CHECK_MSG(slurp(path("pol0.json")).find("\"decision\": 1") != std::string::npos,
            "standard-risk argmin is d=1");
  run_cli("optimize-policy --loss " + path("tri_r3.json").string() + " --model " +
          path("tri_model.json").string() + " --out " + path("pol3.json").string());
  CHECK_MSG(slurp(path("pol3.json")).find("\"decision\": 0") != std::string::npos,
            "large penalty flips the argmin to d=0");
  run_cli("optimize-policy --loss " + path("tri_r1.json").string() + " --model " +
          path("tri_model.json").string() + " --out " + path("pol1.json").string());
  CHECK_MSG(slurp(path("pol1.json")).find("\"decision\": 1") != std::string::npos,
            "small penalty keeps d=1");
}

void test_equivalence_subcommands() {
  CHECK_MSG(run_cli("to-standard --loss " + path("eq3.json").string() + " --out " +
                    path("std.json").string()) == 0,
            "to-standard exit code");
  CHECK_MSG(cfl::load_standard_loss(slurp(path("std.json"))).spaces().K() == 2,
            "standard loss document re-parses");
  CHECK_MSG(run_cli("to-standard --loss " + path("tri_r0.json").string()) == 2,
            "to-standard on K=3 should exit 2");

  CHECK_MSG(run_cli("std-exists --loss " + path("tri_pos.json").string() + " --out " +
                    path("cert.json").string()) == 3,
            "positive penalties: no standard loss, exit 3");
  const std::string cert = slurp(path("cert.json"));
  CHECK_MSG(cert.find("\"witness\"") != std::string::npos, "witness emitted");
  CHECK_MSG(run_cli("std-exists --loss " + path("tri_r0.json").string() + " --out " +
                    path("cert0.json").string()) == 0,
            "zero penalties: standard loss exists, exit 0");
  CHECK_MSG(slurp(path("cert0.json")).find("standard_loss") != std::string::npos,
            "standard loss emitted");
}

void test_oracle_subcommand() {
  CHECK_MSG(run_cli("oracle --loss " + path("eq3.json").string() +
                    " --variant b --trials 5 --seed 1 --out " + path("oracle1.json").string()) ==
                0,
            "identifiable loss: exit 0");
  CHECK_MSG(slurp(path("oracle1.json")).find("EMPIRICALLY-IDENTIFIABLE") != std::string::npos,
            "identifiable verdict");
  CHECK_MSG(run_cli("oracle --loss " + path("asym.json").string() +
                    " --variant b --trials 5 --seed 1 --out " + path("oracle2.json").string()) ==
                3,
            "non-identifiable loss: exit 3");
  const std::string report = slurp(path("oracle2.json"));
  CHECK_MSG(report.find("NON-IDENTIFIABLE") != std::string::npos, "negative verdict");
  CHECK_MSG(report.find("\"agreement\": true") != std::string::npos,
            "oracle agrees with classify");
  CHECK_MSG(report.find("counterexample") != std::string::npos, "counterexample emitted");
  CHECK_MSG(report.find("argmin_p") != std::string::npos, "attaining vertices emitted");

  // The counterexample pair re-parses as model documents and shares the
  // observable marginals while separating the risks.
  const auto doc = cfl::jsonio::json::parse(report);
  const cfl::JointModel p1 = cfl::load_model(doc["counterexample"]["p1"].dump());
  const cfl::JointModel p2 = cfl::load_model(doc["counterexample"]["p2"].dump());
  const cfl::LossTensor asym = cfl::load_loss(slurp(path("asym.json")));
  const auto v1 = cfl::marginalize(p1, cfl::ViewVariant::extended);
  const auto v2 = cfl::marginalize(p2, cfl::ViewVariant::extended);
  CHECK_MSG(v1.q(0) == v2.q(0), "counterexample pair must share the observable q");
  CHECK_MSG(cfl::true_risk(asym, p1).total != cfl::true_risk(asym, p2).total,
            "counterexample pair must separate the risks");

  CHECK_MSG(run_cli("oracle --loss " + path("k4.json").string() + " --trials 1 --seed 1") == 4,
            "guard exceeded: exit 4");

  // Idempotence with a fixed seed.
  run_cli("oracle --loss " + path("asym.json").string() +
          " --variant b --trials 5 --seed 1 --out " + path("oracle2b.json").string());
  CHECK_MSG(slurp(path("oracle2.json")) == slurp(path("oracle2b.json")),
            "oracle output must be byte-identical across runs");
}

void test_idempotence() {
  // Byte-identical outputs for document-producing subcommands.
  const struct { const char* name; std::string args; } cases[] = {
      {"check", "check-additivity --loss " + path("eq3.json").string()},
      {"weights", "weights --loss " + path("eq3.json").string()},
      {"risk", "risk --loss " + path("eq3.json").string() + " --model " +
                   path("uniform.json").string()},
      {"std", "to-standard --loss " + path("eq3.json").string()},
      {"est", "estimate --weights " + path("eq3_decomp.json").string() + " --model " +
                  path("uniform.json").string() + " --n 3000 --seed 2 --reps 2"},
  };
  for (const auto& c : cases) {
    run_cli(c.args + " --out " + path(std::string(c.name) + "_a.json").string());
    run_cli(c.args + " --out " + path(std::string(c.name) + "_b.json").string());
    CHECK_MSG(slurp(path(std::string(c.name) + "_a.json")) ==
                  slurp(path(std::string(c.name) + "_b.json")),
              std::string(c.name) << " output must be byte-identical across runs");
  }
}

void test_simulate_estimate() {
  const fs::path rec1 = path("rec1.csv"), rec2 = path("rec2.csv");
  CHECK_MSG(run_cli("simulate --model " + path("uniform.json").string() +
                    " --n 2000 --seed 3 --out " + rec1.string()) == 0,
            "simulate exit code");
  run_cli("simulate --model " + path("uniform.json").string() + " --n 2000 --seed 3 --out " +
          rec2.string());
  CHECK_MSG(slurp(rec1) == slurp(rec2), "same seed gives byte-identical records");
  CHECK_MSG(slurp(rec1).substr(0, 13) == "x,d_star,d,y\n", "records carry the CSV header");

  CHECK_MSG(run_cli("estimate --records " + rec1.string() + " --weights " +
                    path("eq3_decomp.json").string() + " --out " + path("est.json").string()) ==
                0,
            "estimate exit code");
  const std::string est = slurp(path("est.json"));
  CHECK_MSG(est.find("\"identified_risk\"") != std::string::npos, "estimate reports the risk");

  CHECK_MSG(run_cli("estimate --weights " + path("eq3_decomp.json").string() + " --model " +
                    path("uniform.json").string() + " --n 5000 --seed 11 --reps 3 --out " +
                    path("mc.json").string()) == 0,
            "replicated estimate exit code");
  CHECK_MSG(slurp(path("mc.json")).find("\"mean_estimate\"") != std::string::npos,
            "replication report emitted");
}

void test_validation_errors() {
  CHECK_MSG(run_cli("risk --loss /nonexistent.json --model " + path("uniform.json").string()) ==
                2,
            "missing file: exit 2");
  spit(path("broken.json"), "{\"K\": 2");
  CHECK_MSG(run_cli("check-additivity --loss " + path("broken.json").string()) == 2,
            "malformed document: exit 2");
  CHECK_MSG(run_cli("matrix --K 1 --M 2 --variant full") == 2, "bad dimensions: exit 2");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cfl_cli_tests <path-to-cfl-binary>\n";
    return 2;
  }
  g_binary = argv[1];
  g_dir = fs::temp_directory_path() / "cfl_cli_tests";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  write_inputs();
  test_example_subcommand();
  test_matrix_subcommand();
  test_additivity_subcommands();
  test_risk_subcommands();
  test_policy_subcommand();
  test_equivalence_subcommands();
  test_oracle_subcommand();
  test_simulate_estimate();
  test_idempotence();
  test_validation_errors();

  if (g_failures == 0) {
    std::cout << "cli harness: all checks passed\n";
    return 0;
  }
  std::cout << "cli harness: " << g_failures << " failures\n";
  return 1;
}
