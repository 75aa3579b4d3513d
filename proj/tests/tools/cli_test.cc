#include "cli.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "linrank/model.h"

namespace linrank::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("linrank_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  void Write(const std::string& name, const std::string& text) const { std::ofstream(Path(name)) << text; }

  int Call(std::vector<std::string> args) {
    args.insert(args.begin(), "linrank");
    out_.str("");
    err_.str("");
    return cli::Run(args, out_, err_);
  }

  nlohmann::json OutJson() const { return nlohmann::json::parse(out_.str()); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(Call({"--help"}), kExitOk);
  EXPECT_EQ(Call({}), kExitUsage);
  EXPECT_EQ(Call({"frobnicate"}), kExitUsage);
  EXPECT_EQ(Call({"sat", "--data", Path("missing.csv"), "--ranking", Path("missing.txt")}), kExitUsage);
  EXPECT_NE(err_.str().find("cannot open"), std::string::npos);
}

TEST_F(CliTest, UnsatConstructionExitsThree) {
  ASSERT_EQ(Call({"gen", "--n", "100", "--m", "4", "--seed", "42", "--unsat", "--data-out", Path("d.csv"),
                  "--ranking-out", Path("r.txt")}),
            kExitOk);
  EXPECT_EQ(Call({"sat", "--data", Path("d.csv"), "--ranking", Path("r.txt"), "--k", "5", "--no-timestamp"}),
            kExitUnsatisfiable);
  EXPECT_EQ(OutJson()["status"], "UNSATISFIABLE");
}

TEST_F(CliTest, OptOnThreeTuplesHasZeroError) {
  Write("d.csv", "id,A1,A2,A3\nr,3,2,8\ns,4,1,15\nt,1,1,14\n");
  Write("r.txt", "r\n> s\n> t\n");
  ASSERT_EQ(Call({"opt", "--data", Path("d.csv"), "--ranking", Path("r.txt"), "--k", "3", "--out", Path("o.json")}),
            kExitOk);
  std::ifstream in(Path("o.json"));
  const nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_EQ(j["status"], "OPTIMAL");
  EXPECT_EQ(j["total_error"], 0.0);
  EXPECT_TRUE(j["verified"].get<bool>());
}

TEST_F(CliTest, VerifyEqualWeightsOnSumRanking) {
  ASSERT_EQ(Call({"gen", "--n", "40", "--m", "3", "--seed", "7", "--data-out", Path("d.csv"), "--ranking-out",
                  Path("r.txt")}),
            kExitOk);
  Write("w.txt", "1, 1, 1\n");
  ASSERT_EQ(Call({"verify", "--data", Path("d.csv"), "--ranking", Path("r.txt"), "--k", "10", "--weights",
                  Path("w.txt"), "--no-timestamp"}),
            kExitOk);
  EXPECT_EQ(OutJson()["total_error"], 0.0);
  EXPECT_EQ(OutJson()["weights"].size(), 3u);
}

TEST_F(CliTest, OutputIsStableWithoutTimestamp) {
  ASSERT_EQ(Call({"gen", "--n", "30", "--m", "3", "--seed", "3", "--unsat", "--data-out", Path("d.csv"),
                  "--ranking-out", Path("r.txt")}),
            kExitOk);
  const std::vector<std::string> args = {"opt", "--data", Path("d.csv"), "--ranking", Path("r.txt"), "--k", "3",
                                         "--no-timestamp"};
  ASSERT_EQ(Call(args), kExitOk);
  const std::string first = out_.str();
  ASSERT_EQ(Call(args), kExitOk);
  EXPECT_EQ(out_.str(), first);
}

TEST_F(CliTest, BaselineCellAndLocalRun) {
  ASSERT_EQ(Call({"gen", "--n", "40", "--m", "3", "--seed", "5", "--unsat", "--data-out", Path("d.csv"),
                  "--ranking-out", Path("r.txt")}),
            kExitOk);
  const std::vector<std::string> base = {"--data", Path("d.csv"), "--ranking", Path("r.txt"), "--k", "5"};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), base.begin(), base.end());
    return head;
  };
  for (const char* method : {"lr", "ordreg", "sample"}) {
    EXPECT_EQ(Call(with({"baseline", "--method", method, "--samples", "100"})), kExitOk) << method;
    EXPECT_EQ(OutJson()["mode"], "baseline");
  }
  EXPECT_EQ(Call(with({"baseline", "--method", "svm"})), kExitUsage);
  EXPECT_EQ(Call(with({"cell", "--seed-strategy", "lr", "--cell-size", "0.1"})), kExitOk);
  EXPECT_EQ(OutJson()["mode"], "cell");
  EXPECT_EQ(Call(with({"cell", "--seed-strategy", "explicit"})), kExitUsage);
  EXPECT_EQ(Call(with({"local"})), kExitOk);
  EXPECT_EQ(OutJson()["mode"], "local");
}

TEST_F(CliTest, ConstraintFileIsApplied) {
  ASSERT_EQ(Call({"gen", "--n", "30", "--m", "3", "--seed", "9", "--data-out", Path("d.csv"), "--ranking-out",
                  Path("r.txt")}),
            kExitOk);
  Write("c.txt", "A1 <= 0.1\n");
  ASSERT_EQ(Call({"opt", "--data", Path("d.csv"), "--ranking", Path("r.txt"), "--k", "4", "--constraints",
                  Path("c.txt"), "--no-timestamp"}),
            kExitOk);
  EXPECT_LE(OutJson()["weights"][0].get<double>(), 0.1 + 1e-9);
  Write("bad.txt", "A1 < 0.1\n");
  EXPECT_EQ(Call({"opt", "--data", Path("d.csv"), "--ranking", Path("r.txt"), "--constraints", Path("bad.txt")}),
            kExitUsage);
}

TEST_F(CliTest, NormalizeTransformsWeights) {
  Write("d.csv", "id,A,B\na,0,10\nb,1,30\nc,2,20\n");
  Write("w.json", "[0.5, 0.5]");
  ASSERT_EQ(Call({"normalize", "--data", Path("d.csv"), "--mode", "minmax", "--weights", Path("w.json"),
                  "--data-out", Path("n.csv")}),
            kExitOk);
  const nlohmann::json j = OutJson();
  // min-max scales are 1/2 and 1/20, so w_i / c_i is proportional to 1 and 10.
  EXPECT_NEAR(j["normalized_weights"][0].get<double>(), 1.0 / 11.0, 1e-12);
  EXPECT_NEAR(j["normalized_weights"][1].get<double>(), 10.0 / 11.0, 1e-12);
  const Relation normalized = LoadRelation(Path("n.csv"), false);
  EXPECT_DOUBLE_EQ(normalized.tuple(1).attrs[1], 1.0);
}

TEST(ParseWeightsTextTest, AcceptsThreeFormats) {
  EXPECT_EQ(ParseWeightsText("[0.2, 0.8]"), (std::vector<double>{0.2, 0.8}));
  EXPECT_EQ(ParseWeightsText("{\"weights\": [1, 2]}"), (std::vector<double>{1, 2}));
  EXPECT_EQ(ParseWeightsText("0.1 0.2,0.7\n"), (std::vector<double>{0.1, 0.2, 0.7}));
  EXPECT_THROW(ParseWeightsText("0.1 abc"), InputError);
  EXPECT_THROW(ParseWeightsText("{\"w\": [1]}"), InputError);
  EXPECT_THROW(ParseWeightsText(""), InputError);
}

}  // namespace
}  // namespace linrank::cli
