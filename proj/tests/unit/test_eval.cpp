#include <gtest/gtest.h>

#include <json.hpp>

#include "repoctx/error.hpp"
#include "repoctx/eval.hpp"
#include "test_support.hpp"

using namespace repoctx;
namespace rt = repoctx::testing;
using nlohmann::json;

namespace {

std::filesystem::path dataset() { return rt::fixture("eval") / "dataset.jsonl"; }

}  // namespace

TEST(LoadDataset, ResolvesRelativeRoots) {
  auto ex = load_dataset(dataset());
  ASSERT_EQ(ex.size(), 10u);
  EXPECT_EQ(ex[0].example_id, "ex00");
  EXPECT_EQ(ex[0].reference, "setSignalTypeFromTypeStr()");
  EXPECT_TRUE(ex[0].repo_root.is_absolute() || ex[0].repo_root.has_parent_path());
  EXPECT_TRUE(std::filesystem::equivalent(ex[0].repo_root, rt::fixture("recordloader")));
  EXPECT_TRUE(ex[0].prefix.ends_with("newSignal."));
}

TEST(LoadDataset, MalformedLineIsCited) {
  try {
    load_dataset(rt::fixture("eval") / "malformed.jsonl");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("malformed.jsonl:3:"), std::string::npos) << e.what();
  }
  rt::TempDir dir;
  rt::write_text(dir.path() / "d.jsonl", "{\"example_id\": \"a\"}\n");
  EXPECT_THROW(load_dataset(dir.path() / "d.jsonl"), FormatError);
  EXPECT_THROW(load_dataset(dir.path() / "absent.jsonl"), std::runtime_error);
}

TEST(LoadPredictions, FirstLineOnly) {
  auto p = load_predictions(rt::fixture("eval") / "predictions_perfect.jsonl");
  EXPECT_EQ(p.at("ex00"), "setSignalTypeFromTypeStr()");
}

TEST(TimingStats, NearestRank) {
  auto s = timing_stats({5, 1, 4, 2, 3});
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.p50, 3.0);
  EXPECT_DOUBLE_EQ(s.p95, 5.0);
  EXPECT_DOUBLE_EQ(s.max, 5.0);
  std::vector<double> hundred;
  for (int i = 1; i <= 100; ++i) hundred.push_back(i);
  EXPECT_DOUBLE_EQ(timing_stats(hundred).p95, 95.0);
  EXPECT_DOUBLE_EQ(timing_stats({}).mean, 0.0);
}

TEST(RunEval, PerfectPredictions) {
  EvalOptions opt;
  opt.predictions = rt::fixture("eval") / "predictions_perfect.jsonl";
  auto r = run_eval(dataset(), opt);
  EXPECT_EQ(r.examples, 10u);
  EXPECT_EQ(r.scored, 10u);
  EXPECT_EQ(r.skipped, 0u);
  EXPECT_DOUBLE_EQ(r.em, 1.0);
  EXPECT_DOUBLE_EQ(r.es, 1.0);
  EXPECT_DOUBLE_EQ(r.id_em, 1.0);
  EXPECT_DOUBLE_EQ(r.f1, 1.0);
  EXPECT_TRUE(r.diagnostics.empty());
  EXPECT_GT(r.prompt_ms.max, 0.0);
}

TEST(RunEval, TimingOnlyWithoutPredictions) {
  auto r = run_eval(dataset(), {});
  EXPECT_EQ(r.scored, 0u);
  auto j = json::parse(report_json(r));
  EXPECT_EQ(j["schema_version"], kReportSchemaVersion);
  EXPECT_TRUE(j["metrics"].is_null());
  EXPECT_EQ(j["examples"], 10);
  EXPECT_LE(j["prompt_ms"]["p50"].get<double>(), j["prompt_ms"]["p95"].get<double>());
  EXPECT_EQ(records_jsonl(r).find("\"em\""), std::string::npos);
}

TEST(RunEval, HandScoredBatch) {
  rt::TempDir dir;
  auto all = load_dataset(dataset());
  std::vector<BenchExample> three = {all[0], all[0], all[0]};
  three[0].example_id = "a";
  three[1].example_id = "b";
  three[2].example_id = "c";
  three[2].reference = "foo.baz(x)";
  rt::write_text(dir.path() / "p.jsonl",
                 "{\"example_id\": \"a\", \"prediction\": \"setSignalTypeFromTypeStr()\"}\n"
                 "{\"example_id\": \"b\", \"prediction\": \"channel = newChannelName\"}\n"
                 "{\"example_id\": \"c\", \"prediction\": \"foo.bar(x)\"}\n");
  EvalOptions opt;
  opt.predictions = dir.path() / "p.jsonl";
  auto r = run_eval(three, opt);
  // a: 1, 1, 1, 1.  b: 0, 0.24, 0, 0.  c: 0, 0.9 (one substitution = two indels over 20), 0, 2/3.
  EXPECT_NEAR(r.em, 1.0 / 3, 1e-12);
  EXPECT_NEAR(r.es, (1.0 + 0.24 + 0.9) / 3, 1e-12);
  EXPECT_NEAR(r.id_em, 1.0 / 3, 1e-12);
  EXPECT_NEAR(r.f1, (1.0 + 0.0 + 2.0 / 3) / 3, 1e-12);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_NEAR(r.records[1].es, 0.24, 0.005);
  auto lines = records_jsonl(r);
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 3);
  EXPECT_EQ(json::parse(lines.substr(0, lines.find('\n')))["example_id"], "a");
}

TEST(RunEval, MissingRepoAndPrediction) {
  rt::TempDir dir;
  rt::write_text(dir.path() / "p.jsonl", "");
  EvalOptions opt;
  opt.predictions = dir.path() / "p.jsonl";
  auto r = run_eval(rt::fixture("eval") / "with_missing_repo.jsonl", opt);
  EXPECT_EQ(r.examples, 2u);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.scored, 1u);
  ASSERT_EQ(r.diagnostics.size(), 2u);
  std::set<std::string> kinds;
  for (const auto& d : r.diagnostics) kinds.insert(d.kind);
  EXPECT_EQ(kinds, (std::set<std::string>{"missing-repo", "missing-prediction"}));
}

TEST(RunEval, GraphCacheAndJobsDoNotChangeResults) {
  rt::TempDir dir;
  EvalOptions a;
  a.predictions = rt::fixture("eval") / "predictions_perfect.jsonl";
  a.jobs = 1;
  EvalOptions b = a;
  b.jobs = 4;
  b.graph_cache_dir = dir.path() / "cache";
  auto ra = run_eval(dataset(), a);
  auto rb = run_eval(dataset(), b);
  auto rc = run_eval(dataset(), b);  // served from the cache
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir.path() / "cache"), {}), 5);
  for (const auto* r : {&rb, &rc}) {
    ASSERT_EQ(r->records.size(), ra.records.size());
    for (std::size_t i = 0; i < ra.records.size(); ++i) {
      EXPECT_EQ(r->records[i].example_id, ra.records[i].example_id);
      EXPECT_EQ(r->records[i].prompt_tokens, ra.records[i].prompt_tokens);
      EXPECT_EQ(r->records[i].relevant, ra.records[i].relevant);
    }
  }
}
