#include <gtest/gtest.h>

#include <fstream>

#include "kvbench/results_io.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace kvbench;
using namespace kvbench::results;

TEST(Persistence, JsonRoundTripIsFieldExact) {
  Xoshiro256 rng(31);
  for (int i = 0; i < 500; ++i) {
    const auto r = kvtest::random_result(rng);
    const auto text = to_json(r).dump();
    EXPECT_EQ(run_result_from_json(nlohmann::json::parse(text)), r) << text;
  }
}

TEST(Persistence, RecordsCarrySchemaVersion) {
  Xoshiro256 rng(1);
  auto j = to_json(kvtest::random_result(rng));
  EXPECT_EQ(j.at("schema_version"), 1);
  j["schema_version"] = 2;
  EXPECT_THROW(run_result_from_json(j), Error);
}

TEST(Persistence, FileNames) {
  EXPECT_EQ(result_file_name("base", "A"), "base__A.jsonl");
  EXPECT_EQ(result_file_name("key db/7", "B x"), "key_db_7__B_x.jsonl");
}

TEST(ResultLogTest, AppendThenLoad) {
  kvtest::TempDir dir;
  ResultLog log(dir / "sub" / "r.jsonl");
  Xoshiro256 rng(2);
  std::vector<metrics::RunResult> written;
  for (int i = 0; i < 20; ++i) {
    written.push_back(kvtest::random_result(rng));
    log.append(written.back());
  }
  EXPECT_EQ(log.load(), written);
  EXPECT_EQ(kvtest::count_lines(log.path()), 20u);
}

TEST(ResultLogTest, MissingFileLoadsEmpty) {
  kvtest::TempDir dir;
  EXPECT_TRUE(ResultLog(dir / "none.jsonl").load().empty());
  EXPECT_FALSE(ResultLog(dir / "none.jsonl").repair());
}

TEST(ResultLogTest, TornTailIsSkippedThenRepaired) {
  kvtest::TempDir dir;
  ResultLog log(dir / "r.jsonl");
  Xoshiro256 rng(3);
  const auto a = kvtest::random_result(rng);
  const auto b = kvtest::random_result(rng);
  log.append(a);
  log.append(b);
  const auto full = kvtest::slurp(log.path());
  {
    std::ofstream out(log.path(), std::ios::app | std::ios::binary);
    out << to_json(a).dump().substr(0, 40);
  }
  std::vector<std::string> warnings;
  const auto loaded = log.load(&warnings);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(warnings.size(), 1u);
  EXPECT_TRUE(log.repair());
  EXPECT_EQ(kvtest::slurp(log.path()), full);
  EXPECT_FALSE(log.repair());
  log.append(a);
  EXPECT_EQ(log.load().size(), 3u);
}

TEST(ResultLogTest, CorruptMiddleLineIsSkippedWithWarning) {
  kvtest::TempDir dir;
  Xoshiro256 rng(4);
  const auto a = kvtest::random_result(rng);
  const auto path = dir.write("r.jsonl", to_json(a).dump() + "\n{not json}\n" + to_json(a).dump() + "\n");
  std::vector<std::string> warnings;
  EXPECT_EQ(ResultLog(path).load(&warnings).size(), 2u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find(":2:"), std::string::npos);
}

TEST(ResultLogTest, DirectoryLoadIsOrderedByFileName) {
  kvtest::TempDir dir;
  Xoshiro256 rng(5);
  auto a = kvtest::random_result(rng);
  auto b = kvtest::random_result(rng);
  a.system = "zeta";
  b.system = "alpha";
  ResultLog(dir / "zeta__A.jsonl").append(a);
  ResultLog(dir / "alpha__A.jsonl").append(b);
  dir.write("notes.txt", "ignored");
  const auto all = load_results_dir(dir.path());
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].system, "alpha");
  EXPECT_EQ(all[1].system, "zeta");
  EXPECT_TRUE(load_results_dir(dir / "missing").empty());
}
