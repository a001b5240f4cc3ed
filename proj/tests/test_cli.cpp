#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fracpow/certificate.hpp"
#include "fracpow/cli.hpp"

using namespace fracpow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fracpow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static void spit(const std::string& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

  // Relaxed toy construction: t = 3, small psi constant, short blocks.
  static std::vector<std::string> toy(const std::string& out, std::vector<std::string> extra = {}) {
    std::vector<std::string> a{"construct-eps", "--t", "3", "--a-psi", "4", "--h-log2", "-1", "--steps", "2",
                               "--relaxed", "--threads", "1", "--out", out};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ParamsExitCodes) {
  const Outcome ok = run({"params", "--t", "8"});
  EXPECT_EQ(ok.code, kExitAccepted);
  EXPECT_NE(ok.out.find("h = 229376"), std::string::npos);
  EXPECT_EQ(run({"params", "--t", "2"}).code, kExitRejected);
  EXPECT_EQ(run({"params"}).code, kExitUsage);
  EXPECT_EQ(run({"params", "--t", "1"}).code, kExitUsage);
  EXPECT_EQ(run({"params", "--t", "8", "--a-psi", "x"}).code, kExitUsage);
  EXPECT_EQ(run({"params", "--t", "8", "--xi", "2"}).code, kExitUsage);  // needs theorem2
  EXPECT_EQ(run({"bogus"}).code, kExitUsage);
}

TEST_F(Cli, ExplicitDefaultConstant) {
  EXPECT_EQ(run({"params", "--t", "10"}).out, run({"params", "--t", "10", "--a-psi", "16384"}).out);
}

TEST_F(Cli, ConstructThenVerify) {
  ASSERT_EQ(run(toy(path("toy.json"))).code, kExitAccepted);
  const Outcome v = run({"verify", "cert", path("toy.json")});
  EXPECT_EQ(v.code, kExitAccepted) << v.err;
  EXPECT_NE(v.out.find("\"accepted\": true"), std::string::npos);
  EXPECT_EQ(run({"verify", "eps", "--cert", path("toy.json")}).code, kExitAccepted);

  std::vector<std::string> zero = toy(path("zero.json"));
  zero[8] = "0";
  EXPECT_EQ(run(zero).code, kExitUsage);
  EXPECT_EQ(run(toy(path("x.json"), {"--strict"})).code, kExitUsage);  // with --relaxed
}

TEST_F(Cli, StrictConstructionFailsOnToyParameters) {
  std::vector<std::string> a = toy(path("strict.json"));
  a.erase(a.begin() + 9);  // drop --relaxed
  const Outcome r = run(a);
  EXPECT_EQ(r.code, kExitRejected);
  EXPECT_NE(r.err.find("construction failed"), std::string::npos);
}

TEST_F(Cli, ModeReductionChangesOnlyTheTag) {
  ASSERT_EQ(run(toy(path("t1.json"))).code, kExitAccepted);
  ASSERT_EQ(run(toy(path("t2.json"), {"--mode", "theorem2", "--xi", "1"})).code, kExitAccepted);
  std::istringstream a(slurp(path("t1.json"))), b(slurp(path("t2.json")));
  std::string la, lb;
  int differing = 0;
  while (std::getline(a, la) && std::getline(b, lb)) {
    if (la == lb) continue;
    ++differing;
    EXPECT_NE(la.find("\"mode\""), std::string::npos) << la;
  }
  EXPECT_EQ(differing, 1);
}

TEST_F(Cli, OutputIndependentOfThreads) {
  ASSERT_EQ(run(toy(path("a.json"), {"--census"})).code, kExitAccepted);
  std::vector<std::string> two = toy(path("b.json"), {"--census"});
  two[11] = "2";
  ASSERT_EQ(run(two).code, kExitAccepted);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(Cli, CertificateRoundTrip) {
  ASSERT_EQ(run(toy(path("c.json"), {"--scan"})).code, kExitAccepted);
  const std::string text = slurp(path("c.json"));
  const Certificate cert = read_certificate(text);
  ASSERT_TRUE(cert.verification.has_value());
  EXPECT_EQ(write_certificate(cert), text);
  // "-" writes the same bytes to stdout.
  ASSERT_EQ(run(toy(path("d.json"))).code, kExitAccepted);
  const Outcome to_stdout = run(toy("-"));
  EXPECT_EQ(to_stdout.out, slurp(path("d.json")));
  EXPECT_EQ(read_certificate(to_stdout.out).chain.k_max, cert.chain.k_max);
}

TEST_F(Cli, TamperedCertificatesAreRejected) {
  ASSERT_EQ(run(toy(path("c.json"))).code, kExitAccepted);
  const nlohmann::ordered_json doc = nlohmann::ordered_json::parse(slurp(path("c.json")));

  nlohmann::ordered_json k = doc;
  k["k_max"] = k["k_max"].get<long>() + 1;
  spit(path("k.json"), k.dump(2));
  const Outcome rk = run({"verify", "cert", path("k.json")});
  EXPECT_EQ(rk.code, kExitRejected);
  EXPECT_NE(rk.err.find("[guarantee]"), std::string::npos) << rk.err;

  nlohmann::ordered_json l = doc;
  l["steps"][1]["level"] = l["steps"][1]["level"].get<long>() + 1;
  spit(path("l.json"), l.dump(2));
  const Outcome rl = run({"verify", "cert", path("l.json")});
  EXPECT_EQ(rl.code, kExitRejected);
  EXPECT_NE(rl.err.find("[schedule]"), std::string::npos) << rl.err;
}

TEST_F(Cli, BadFilesAreUsageErrors) {
  EXPECT_EQ(run({"verify", "cert", path("missing.json")}).code, kExitUsage);
  spit(path("junk.json"), "{\"version\": 1");
  EXPECT_EQ(run({"verify", "cert", path("junk.json")}).code, kExitUsage);
  spit(path("v9.json"), "{\"version\": 9}");
  EXPECT_EQ(run({"verify", "cert", path("v9.json")}).code, kExitUsage);
}

TEST_F(Cli, VerifyEps) {
  const Outcome r = run({"verify", "eps", "--value", "3/2", "--K", "4", "--threshold", "1/32"});
  EXPECT_EQ(r.code, kExitAccepted) << r.err;
  EXPECT_EQ(run({"verify", "eps", "--value", "3/2", "--K", "4", "--threshold", "1/8"}).code, kExitRejected);
  EXPECT_EQ(run({"verify", "eps", "--value", "2", "--K", "3"}).code, kExitRejected);
  EXPECT_EQ(run({"verify", "eps", "--epsilon", "2/5", "--K", "10"}).code, kExitAccepted);
  EXPECT_EQ(run({"verify", "eps", "--value", "3/2", "--epsilon", "1/2", "--K", "4"}).code, kExitUsage);
  EXPECT_EQ(run({"verify", "eps", "--value", "3/2"}).code, kExitUsage);
}

TEST_F(Cli, ConstructAndVerifyAlpha) {
  spit(path("bands.json"), R"({"epsilon": "0.15", "eta": "1/2", "H": 100, "bands": {"constant": "0.4"}})");
  ASSERT_EQ(run({"construct-alpha", "--bands", path("bands.json"), "--depth", "1", "--out", path("p1.json")}).code,
            kExitAccepted);
  EXPECT_EQ(run({"verify", "alpha", "--path", path("p1.json")}).code, kExitAccepted);

  const Outcome built = run({"construct-alpha", "--bands", path("bands.json"), "--depth", "12", "--out", path("p12.json")});
  ASSERT_EQ(built.code, kExitAccepted) << built.err;
  EXPECT_EQ(run({"verify", "alpha", "--path", path("p12.json")}).code, kExitAccepted);
  const PathDocument doc = read_path(slurp(path("p12.json")));
  EXPECT_EQ(doc.nodes.size(), 12u);
  EXPECT_NEAR(doc.dimension.mid_double(), 0.45154, 1e-4);

  // alpha = 2 sits in band 0 but not in band 1/4.
  spit(path("zero.json"), R"({"epsilon": "1/10", "eta": "1/2", "H": 100, "bands": {"constant": 0}})");
  spit(path("quarter.json"), R"({"epsilon": "1/10", "eta": "1/2", "H": 100, "bands": {"constant": "1/4"}})");
  EXPECT_EQ(run({"verify", "alpha", "--bands", path("zero.json"), "--alpha", "2", "--N", "6"}).code, kExitAccepted);
  const Outcome q = run({"verify", "alpha", "--bands", path("quarter.json"), "--alpha", "2", "--N", "6"});
  EXPECT_EQ(q.code, kExitRejected);
  EXPECT_NE(q.err.find("n = 1"), std::string::npos) << q.err;

  EXPECT_EQ(run({"construct-alpha", "--bands", path("bands.json"), "--depth", "3", "--select", "indices",
                 "--indices", "9,0"}).code,
            kExitUsage);
}
