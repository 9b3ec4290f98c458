#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rrl/io.hpp"
#include "rrl/rrl.hpp"

using namespace rrl;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("rrl_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(RRL_CLI_PATH) + " " + args + " >" + (workdir() / "stdout.txt").string() +
                          " 2>" + (workdir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream o;
  o << f.rdbuf();
  return o.str();
}

std::string write_config(const std::string& name, const json& cfg) {
  const auto p = workdir() / name;
  std::ofstream(p) << cfg.dump();
  return p.string();
}

}  // namespace

TEST(Cli, UnknownFlagIsUsageError) {
  EXPECT_EQ(run("gen --no-such-flag 1"), 2);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, MissingOptionIsUsageError) {
  EXPECT_EQ(run("gen --m 10"), 2);
  EXPECT_NE(slurp(workdir() / "stderr.txt").find("--dist"), std::string::npos);
}

TEST(Cli, VersionFingerprint) {
  EXPECT_EQ(run("--version"), 0);
  EXPECT_EQ(slurp(workdir() / "stdout.txt").rfind("rrl ", 0), 0u);
}

TEST(Cli, CertifyMatchesLibrary) {
  const auto train = (workdir() / "train.csv").string();
  const auto pts = (workdir() / "pts.csv").string();
  const auto certs = (workdir() / "certs.json").string();
  ASSERT_EQ(run("gen --dist '{\"kind\":\"gaussian\",\"d\":2}' --hstar '{\"kind\":\"linear\",\"w\":[0.6,0.8]}' --m 50 "
                "--seed 3 --out " + train),
            0);
  {
    std::ofstream f(pts);
    std::vector<Point> qs;
    CounterRng rng(4);
    for (int i = 0; i < 40; ++i) qs.push_back(Point{2 * rng.normal(), 2 * rng.normal()});
    io::write_points(f, qs, 2);
  }
  for (const char* loss : {"st", "tl", "ca"}) {
    ASSERT_EQ(run(std::string("certify --data ") + train + " --points " + pts + " --loss " + loss + " --seed 5 --out " +
                  certs),
              0)
        << slurp(workdir() / "stderr.txt");
    const auto doc = json::parse(slurp(certs));
    const auto data = io::load_dataset(train);
    const auto vs = fit_version_space(data, HypothesisClass::linear(2));
    CertifyOptions co;
    co.constancy_seed = derive_seed(5, "constancy");
    const auto points = io::load_points(pts);
    ASSERT_EQ(doc["certificates"].size(), points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = certify(vs, points[i], parse_loss_kind(loss), co);
      EXPECT_EQ(doc["certificates"][i], io::certificate_json(points[i], c, 5));
    }
    EXPECT_EQ(doc["config"]["seed"], 5);
    EXPECT_FALSE(doc["config"].contains("out"));
  }
}

TEST(Cli, ThresholdCertifyAgainstInterval) {
  const auto train = (workdir() / "thr.csv").string();
  const auto pts = (workdir() / "thr_pts.csv").string();
  const auto certs = (workdir() / "thr_certs.json").string();
  std::ofstream(train) << "x1,label\n-0.5,0\n0.2,0\n0.8,1\n1.5,1\n";
  std::ofstream(pts) << "x1\n0.0\n0.5\n1.0\n";
  ASSERT_EQ(run("certify --data " + train + " --points " + pts + " --out " + certs), 0);
  const auto doc = json::parse(slurp(certs));
  // Interval (0.2, 0.8]: distances 0.2, abstain, 0.2.
  EXPECT_DOUBLE_EQ(doc["certificates"][0]["radius"].get<double>(), 0.2);
  EXPECT_EQ(doc["certificates"][0]["prediction"], 0);
  EXPECT_EQ(doc["certificates"][1]["prediction"], "abstain");
  EXPECT_DOUBLE_EQ(doc["certificates"][2]["radius"].get<double>(), 0.2);
  EXPECT_EQ(doc["certificates"][2]["prediction"], 1);
}

TEST(Cli, AttackVerifyPasses) {
  const auto out = (workdir() / "av.json").string();
  ASSERT_EQ(run("attack-verify --class '{\"kind\":\"linear\",\"d\":2}' --hstar '{\"kind\":\"linear\",\"w\":[1,1]}' "
                "--dist '{\"kind\":\"gaussian\",\"d\":2}' --m 30 --trials 300 --budget 0.5 --seed 1 --out " + out),
            0);
  const auto doc = json::parse(slurp(out));
  EXPECT_EQ(doc["report"]["violations"], 0);
  EXPECT_EQ(doc["report"]["trials"], 300);
}

TEST(Cli, ConfigFileAndFlagOverride) {
  const auto out = (workdir() / "sr.csv").string();
  const auto cfg = write_config("sr.json", {{"class", {{"kind", "threshold"}}},
                                            {"hstar", {{"kind", "threshold"}, {"t", 0.0}}},
                                            {"dist", {{"kind", "uniform_cube"}, {"d", 1}, {"lo", -1}, {"hi", 1}}},
                                            {"m", 100},
                                            {"trials", 3},
                                            {"n", 500},
                                            {"seed", 9}});
  ASSERT_EQ(run("--config " + cfg + " sr-mass --eta1 0.05 --out " + out), 0);
  const auto text = slurp(out);
  EXPECT_NE(text.find("\"eta1\":0.05"), std::string::npos);
  EXPECT_NE(text.find(std::string(io::kEstimateHeader)), std::string::npos);
  EXPECT_NE(text.find("\nsr_mass,threshold,st,0.05,0,100,1,3,1500,"), std::string::npos);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto cfg = write_config(
      "theta.json", {{"class", {{"kind", "threshold"}}},
                     {"hstar", {{"kind", "threshold"}, {"t", 0.0}}},
                     {"p", {{"kind", "uniform_cube"}, {"d", 1}, {"lo", -0.5}, {"hi", 0.5}}},
                     {"q", {{"kind", "uniform_cube"}, {"d", 1}, {"lo", -1}, {"hi", 1}}},
                     {"n", 20000},
                     {"seed", 2}});
  const auto a = (workdir() / "theta_a.csv").string();
  const auto b = (workdir() / "theta_b.csv").string();
  ASSERT_EQ(run("--config " + cfg + " theta --out " + a + " --curve-out " + a + ".curve"), 0);
  ASSERT_EQ(run("--config " + cfg + " theta --out " + b + " --curve-out " + b + ".curve --jobs 4"), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(slurp(a + ".curve"), slurp(b + ".curve"));
  EXPECT_FALSE(slurp(a).empty());
}

TEST(Cli, ShiftRejectsBadLoss) {
  const auto out = (workdir() / "shift.csv").string();
  EXPECT_EQ(run("shift --class '{\"kind\":\"threshold\"}' --hstar '{\"kind\":\"threshold\",\"t\":0}' "
                "--p '{\"kind\":\"uniform_cube\",\"d\":1}' --q '{\"kind\":\"uniform_cube\",\"d\":1}' --m 10 "
                "--loss xx --out " + out),
            2);
}
