#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <sys/wait.h>

#include "test_support.hpp"

namespace rt = repoctx::testing;
using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
  std::string err;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run run(const std::string& args, const std::string& env = "") {
  static rt::TempDir dir;
  const auto out = dir.path() / "out";
  const auto err = dir.path() / "err";
  const std::string cmd = env + " " + quote(REPOCTX_CLI) + " " + args + " >" + quote(out.string()) + " 2>" +
                          quote(err.string());
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = rt::read_text(out);
  r.err = rt::read_text(err);
  return r;
}

std::string path(const std::filesystem::path& p) { return quote(p.string()); }

}  // namespace

TEST(CliIndex, EmptyDirectory) {
  rt::TempDir dir;
  auto r = run("index " + path(dir.path()) + " -o " + path(dir.path() / "g"));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("modules 0\n"), std::string::npos);
  auto s = run("stats " + path(dir.path() / "g"));
  EXPECT_EQ(s.out, "modules 0\nclasses 0\nfunctions 0\nvariables 0\ncontains 0\ndepends 0\ndiagnostics 0\n");
}

TEST(CliIndex, CountsMatchHandOracle) {
  rt::TempDir dir;
  auto r = run("index " + path(rt::fixture("pkgrel")) + " -o " + path(dir.path() / "g") + " -j 2");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("indexed in "), std::string::npos);
  // 5 files plus the synthetic app/util; Model, Report; fit, __init__,
  // summary, render, train, publish; Model.weights.
  auto s = run("stats " + path(dir.path() / "g") + " --json");
  auto j = json::parse(s.out);
  EXPECT_EQ(j["modules"], 6);
  EXPECT_EQ(j["classes"], 2);
  EXPECT_EQ(j["functions"], 6);
  EXPECT_EQ(j["variables"], 1);
  EXPECT_EQ(j["contains"], 9);
  EXPECT_EQ(j["depends"], 2);
}

TEST(CliIndex, NonexistentPathFails) {
  auto r = run("index /nonexistent/repoctx/path -o /tmp/never.graph");
  EXPECT_NE(r.status, 0);
  EXPECT_FALSE(r.err.empty());
}

TEST(CliPrompt, GoldenSnapshots) {
  rt::TempDir dir;
  const auto g = dir.path() / "g";
  ASSERT_EQ(run("index " + path(rt::fixture("recordloader")) + " -o " + path(g)).status, 0);
  const auto file = rt::fixture("recordloader") / "pyPhasesRecordloader/RecordLoader.py";
  auto r = run("prompt " + path(g) + " " + path(file) + " 13:19 --timing");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, rt::read_text(rt::golden("recordloader_complete.txt")));
  EXPECT_NE(r.err.find(" ms"), std::string::npos);
  auto d = run("prompt " + path(g) + " " + path(file) + " 13:19 --scope definition");
  EXPECT_EQ(d.out, rt::read_text(rt::golden("recordloader_definition.txt")));
  auto o = run("prompt " + path(g) + " " + path(file) + " 13:19 -o " + path(dir.path() / "p.txt"));
  EXPECT_EQ(o.status, 0);
  EXPECT_EQ(rt::read_text(dir.path() / "p.txt"), r.out);
}

TEST(CliPrompt, NoImportsAndBadCursor) {
  rt::TempDir dir;
  const auto g = dir.path() / "g";
  ASSERT_EQ(run("index " + path(rt::fixture("mutual")) + " -o " + path(g)).status, 0);
  rt::write_text(dir.path() / "solo.py", "x = 1\ny = x +\n");
  auto r = run("prompt " + path(g) + " " + path(dir.path() / "solo.py") + " 2:8 --as solo.py");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "x = 1\ny = x +");
  auto bad = run("prompt " + path(g) + " " + path(dir.path() / "solo.py") + " 9:1 --as solo.py");
  EXPECT_NE(bad.status, 0);
  EXPECT_FALSE(bad.err.empty());
  auto badcol = run("prompt " + path(g) + " " + path(dir.path() / "solo.py") + " 1:40 --as solo.py");
  EXPECT_NE(badcol.status, 0);
}

TEST(CliPrompt, FlagBeatsEnvBeatsConfig) {
  rt::TempDir dir;
  const auto g = dir.path() / "g";
  ASSERT_EQ(run("index " + path(rt::fixture("recordloader")) + " -o " + path(g)).status, 0);
  const auto file = path(rt::fixture("recordloader") / "pyPhasesRecordloader/RecordLoader.py");
  rt::write_text(dir.path() / "cfg.json", "{\"scope\": \"definition\", \"max_tokens\": 100}");
  const std::string cfg = "--config " + path(dir.path() / "cfg.json") + " ";
  const auto def = rt::read_text(rt::golden("recordloader_definition.txt"));
  const auto full = rt::read_text(rt::golden("recordloader_complete.txt"));

  auto from_cfg = run(cfg + "prompt " + path(g) + " " + file + " 13:19");
  EXPECT_EQ(from_cfg.status, 0) << from_cfg.err;
  EXPECT_NE(from_cfg.out, def);  // 100 tokens cannot hold it
  auto from_env = run(cfg + "prompt " + path(g) + " " + file + " 13:19", "REPOCTX_MAX_TOKENS=2048");
  EXPECT_EQ(from_env.out, def);
  auto from_flag = run(cfg + "prompt " + path(g) + " " + file + " 13:19 --scope complete",
                       "REPOCTX_MAX_TOKENS=2048 REPOCTX_SCOPE=definition");
  EXPECT_EQ(from_flag.out, full);
  auto env_cfg = run("prompt " + path(g) + " " + file + " 13:19",
                     "REPOCTX_CONFIG=" + path(dir.path() / "cfg.json") + " REPOCTX_MAX_TOKENS=4096");
  EXPECT_EQ(env_cfg.out, def);
  auto too_small = run("prompt " + path(g) + " " + file + " 13:19 --max-tokens 10");
  EXPECT_NE(too_small.status, 0);
  auto bad_scope = run("prompt " + path(g) + " " + file + " 13:19 --scope everything");
  EXPECT_NE(bad_scope.status, 0);
}

TEST(CliEval, PerfectTimingOnlyAndMalformed) {
  rt::TempDir dir;
  const auto ds = path(rt::fixture("eval") / "dataset.jsonl");
  auto perfect = run("eval " + ds + " --predictions " + path(rt::fixture("eval") / "predictions_perfect.jsonl") +
                     " --records " + path(dir.path() / "rec.jsonl"));
  ASSERT_EQ(perfect.status, 0) << perfect.err;
  auto j = json::parse(perfect.out);
  for (auto m : {"em", "es", "id_em", "f1"}) EXPECT_DOUBLE_EQ(j["metrics"][m].get<double>(), 1.0) << m;
  const auto rec = rt::read_text(dir.path() / "rec.jsonl");
  EXPECT_EQ(std::count(rec.begin(), rec.end(), '\n'), 10);

  auto timing = run("eval " + ds + " -o " + path(dir.path() / "report.json"));
  ASSERT_EQ(timing.status, 0) << timing.err;
  auto t = json::parse(rt::read_text(dir.path() / "report.json"));
  EXPECT_TRUE(t["metrics"].is_null());
  EXPECT_EQ(t["examples"], 10);
  EXPECT_TRUE(t["prompt_ms"].contains("p95"));

  auto bad = run("eval " + path(rt::fixture("eval") / "malformed.jsonl"));
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.err.find(":3:"), std::string::npos) << bad.err;
}

TEST(CliDebug, DfgAndRetrieve) {
  rt::TempDir dir;
  rt::write_text(dir.path() / "v.py", "v = u\n");
  auto d = run("dfg " + path(dir.path() / "v.py"));
  EXPECT_EQ(d.out, "u -Assigns-> v @1,1\n");
  const auto g = dir.path() / "g";
  ASSERT_EQ(run("index " + path(rt::fixture("mutual")) + " -o " + path(g)).status, 0);
  auto r = run("retrieve " + path(g) + " " + path(rt::fixture("mutual") / "use.py") + " 6:18");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("relevant a.py:Klass\n"), std::string::npos);
}

TEST(CliErrors, UnknownCommandAndCorruptGraph) {
  EXPECT_NE(run("frobnicate").status, 0);
  rt::TempDir dir;
  rt::write_text(dir.path() / "g", "garbage");
  auto r = run("stats " + path(dir.path() / "g"));
  EXPECT_NE(r.status, 0);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run("--help").status, 0);
}
