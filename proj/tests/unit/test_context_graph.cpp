#include <gtest/gtest.h>

#include <fstream>
#include <regex>

#include "repoctx/context_graph.hpp"
#include "repoctx/error.hpp"
#include "test_support.hpp"

using namespace repoctx;
namespace rt = repoctx::testing;

namespace {

ContextGraph graph_of(std::vector<std::pair<std::string, std::string>> files) {
  std::vector<FileIndex> parts;
  for (auto& [path, text] : files) parts.push_back(index_file(SourceFile::from_text(path, text)));
  return link_imports(std::move(parts));
}

EntityId id(const ContextGraph& g, std::string_view qp) {
  auto i = g.find(qp);
  EXPECT_TRUE(i.has_value()) << qp;
  return i.value_or(0);
}

bool depends_on(const ContextGraph& g, std::string_view a, std::string_view b) {
  auto d = g.depends(id(g, a));
  return std::find(d.begin(), d.end(), id(g, b)) != d.end();
}

}  // namespace

TEST(Kinds, NamesRoundTrip) {
  for (auto k : {EntityKind::Module, EntityKind::Class, EntityKind::Function, EntityKind::Variable})
    EXPECT_EQ(parse_kind(kind_name(k)), k);
  EXPECT_FALSE(parse_kind("method").has_value());
}

TEST(IndexFile, EmptyFileIsALoneModule) {
  auto fi = index_file(SourceFile::from_text("empty.py", ""));
  ASSERT_EQ(fi.entities.size(), 1u);
  EXPECT_EQ(fi.entities[0].kind, EntityKind::Module);
  EXPECT_EQ(fi.entities[0].file_path, "empty.py");
  EXPECT_FALSE(fi.entities[0].docstring.has_value());
  EXPECT_TRUE(fi.depends.empty());
}

TEST(IndexFile, EntityProperties) {
  auto g = graph_of({{"m.py",
                      "\"\"\"Module doc.\"\"\"\n"
                      "X = 1\n"
                      "\n"
                      "@decorate\n"
                      "class K:\n"
                      "    \"\"\"K doc.\"\"\"\n"
                      "    attr: int = 0\n"
                      "\n"
                      "    def method(self, a):\n"
                      "        local = a\n"
                      "        return local\n"
                      "\n"
                      "def top():\n"
                      "    pass\n"}});
  const auto& mod = g.entity(id(g, "m.py"));
  EXPECT_EQ(mod.docstring, "\"\"\"Module doc.\"\"\"");
  EXPECT_EQ(mod.start_line, 0u);

  const auto& k = g.entity(id(g, "m.py:K"));
  EXPECT_EQ(k.kind, EntityKind::Class);
  EXPECT_EQ(k.signature, "@decorate\nclass K:");
  EXPECT_EQ(k.docstring, "    \"\"\"K doc.\"\"\"");
  EXPECT_EQ(k.start_line, 4u);

  const auto& m = g.entity(id(g, "m.py:K.method"));
  EXPECT_EQ(m.kind, EntityKind::Function);
  EXPECT_EQ(m.signature, "    def method(self, a):");
  EXPECT_EQ(m.body, "    def method(self, a):\n        local = a\n        return local");
  EXPECT_EQ(m.body_indent, "        ");

  const auto& attr = g.entity(id(g, "m.py:K.attr"));
  EXPECT_EQ(attr.kind, EntityKind::Variable);
  EXPECT_EQ(attr.body, "    attr: int = 0");
  EXPECT_EQ(g.entity(id(g, "m.py:X")).body, "X = 1");

  EXPECT_FALSE(g.find("m.py:K.method.local").has_value());  // locals are not entities
  EXPECT_EQ(g.parent(id(g, "m.py:K.method")), id(g, "m.py:K"));
  EXPECT_EQ(g.parent(id(g, "m.py:K")), id(g, "m.py"));
}

TEST(IndexFile, ReturnTypeAndInheritance) {
  auto g = graph_of({{"RecordSignal.py",
                      "class Signal:\n    pass\n\n"
                      "class RecordSignal:\n"
                      "    def getSignalByName(self, name) -> Signal:\n"
                      "        pass\n"},
                     {"ab.py", "class A:\n    pass\n\nclass B(A):\n    pass\n"}});
  EXPECT_EQ(g.parent(id(g, "RecordSignal.py:RecordSignal")), id(g, "RecordSignal.py"));
  EXPECT_EQ(g.parent(id(g, "RecordSignal.py:RecordSignal.getSignalByName")), id(g, "RecordSignal.py:RecordSignal"));
  EXPECT_TRUE(depends_on(g, "RecordSignal.py:RecordSignal.getSignalByName", "RecordSignal.py:Signal"));
  EXPECT_TRUE(depends_on(g, "ab.py:B", "ab.py:A"));
  EXPECT_FALSE(depends_on(g, "ab.py:A", "ab.py:B"));
}

TEST(IndexFile, DuplicateNamesGetLineSuffix) {
  auto g = graph_of({{"d.py", "x = 1\nx = 2\ndef f():\n    pass\ndef f():\n    pass\n"}});
  EXPECT_TRUE(g.find("d.py:x").has_value());
  EXPECT_TRUE(g.find("d.py:x@2").has_value());
  EXPECT_TRUE(g.find("d.py:f@5").has_value());
}

TEST(LinkImports, CrossFileEdges) {
  auto g = graph_of({{"Signal.py", "class Signal:\n    pass\n"},
                     {"RecordSignal.py",
                      "import os\n"
                      "from Signal import Signal\n\n"
                      "class RecordSignal:\n"
                      "    def get(self) -> Signal:\n"
                      "        return os.getcwd()\n"}});
  EXPECT_TRUE(depends_on(g, "RecordSignal.py:RecordSignal.get", "Signal.py:Signal"));
  EXPECT_EQ(g.depends_count(), 1u);  // `import os` adds nothing
  EXPECT_TRUE(g.diagnostics().empty());
}

TEST(LinkImports, AliasesAndStar) {
  auto g = graph_of({{"lib.py", "class T:\n    pass\n"},
                     {"use.py",
                      "from lib import T as U\n"
                      "import lib as L\n"
                      "from lib import *\n"
                      "a: U = None\n"
                      "b: L.T = None\n"
                      "c: T = None\n"}});
  EXPECT_TRUE(depends_on(g, "use.py:a", "lib.py:T"));
  EXPECT_TRUE(depends_on(g, "use.py:b", "lib.py:T"));
  EXPECT_TRUE(depends_on(g, "use.py:c", "lib.py:T"));
}

TEST(LinkImports, RelativeImportInNestedPackage) {
  auto g = index_repository_serial(rt::fixture("pkgrel"));
  // Oracle: path arithmetic on the importer's directory.
  const std::string importer = "app/core/model.py";
  std::string dir = importer.substr(0, importer.rfind('/'));  // app/core
  dir = dir.substr(0, dir.rfind('/'));                         // one level up for `..`
  const std::string target = dir + "/util/report.py";
  EXPECT_EQ(target, "app/util/report.py");
  EXPECT_TRUE(depends_on(g, "app/core/model.py:Model.fit", target + ":Report"));
  // app/util has no __init__.py and becomes a synthetic module.
  auto util = g.module_at("app/util");
  ASSERT_TRUE(util);
  EXPECT_TRUE(g.entity(*util).synthetic);
  EXPECT_EQ(g.entity(*util).qualified_path, "app/util/");
}

TEST(LinkImports, DanglingImportIsAWarning) {
  auto g = index_repository_serial(rt::fixture("mutual"));
  ASSERT_EQ(g.diagnostics().size(), 1u);
  const auto& d = g.diagnostics()[0];
  EXPECT_EQ(d.kind, "dangling-import");
  EXPECT_EQ(d.file, "b.py");
  EXPECT_EQ(d.line, 2u);
  EXPECT_EQ(d.severity, Diagnostic::Severity::Warning);
  EXPECT_TRUE(depends_on(g, "a.py:ALPHA", "b.py:BETA"));
  EXPECT_TRUE(depends_on(g, "b.py:BETA", "a.py:ALPHA"));
}

TEST(Resolve, PathArithmeticAndDeepestMatch) {
  auto g = index_repository_serial(rt::fixture("recordloader"));
  const std::string importer = "pyPhasesRecordloader/RecordLoader.py";
  auto r = g.resolve(importer, 0, "pyPhasesRecordloader.RecordSignal", "RecordSignal.getSignalByName");
  ASSERT_TRUE(r);
  EXPECT_EQ(rt::qpath(g, r->entity), "pyPhasesRecordloader/RecordSignal.py:RecordSignal.getSignalByName");
  EXPECT_TRUE(r->exact);
  auto partial = g.resolve(importer, 0, "pyPhasesRecordloader.RecordSignal", "RecordSignal.nonexistent");
  ASSERT_TRUE(partial);
  EXPECT_EQ(rt::qpath(g, partial->entity), "pyPhasesRecordloader/RecordSignal.py:RecordSignal");
  EXPECT_FALSE(partial->exact);
  EXPECT_FALSE(g.resolve(importer, 0, "os", "path").has_value());
  // Sibling lookup from the importer's directory.
  auto sib = g.resolve(importer, 0, "Signal", "Signal");
  ASSERT_TRUE(sib);
  EXPECT_EQ(rt::qpath(g, sib->entity), "pyPhasesRecordloader/Signal.py:Signal");
  auto rel = g.resolve(importer, 1, "Signal", "SignalType.EEG");
  ASSERT_TRUE(rel);
  EXPECT_EQ(rt::qpath(g, rel->entity), "pyPhasesRecordloader/Signal.py:SignalType.EEG");
  auto pkg = g.resolve(importer, 0, "pyPhasesRecordloader", "");
  ASSERT_TRUE(pkg);
  EXPECT_EQ(rt::qpath(g, pkg->entity), "pyPhasesRecordloader/__init__.py");
  EXPECT_FALSE(g.resolve(importer, 3, "x", "").has_value());  // climbs above the root
}

TEST(GraphProperty, CompletenessAgainstLineScan) {
  for (const auto& repo : rt::fixture_repos()) {
    auto g = index_repository_serial(rt::fixture(repo));
    for (const auto& rel : discover_sources(rt::fixture(repo))) {
      const auto text = rt::read_text(rt::fixture(repo) / rel);
      // Oracle: definition keywords and unindented assignments found by regex.
      std::size_t defs = 0;
      std::size_t module_vars = 0;
      const std::regex def_re(R"(^\s*(class|def)\s+\w+)");
      const std::regex var_re(R"(^[A-Za-z_]\w*\s*(:[^=]*)?=[^=])");
      std::istringstream in(text);
      for (std::string line; std::getline(in, line);) {
        if (std::regex_search(line, def_re)) ++defs;
        if (std::regex_search(line, var_re)) ++module_vars;
      }
      std::size_t got_defs = 0;
      std::size_t got_module_vars = 0;
      for (EntityId i = 0; i < g.size(); ++i) {
        const auto& e = g.entity(i);
        if (e.file_path != rel || e.kind == EntityKind::Module) continue;
        if (e.kind == EntityKind::Class || e.kind == EntityKind::Function) ++got_defs;
        if (e.kind == EntityKind::Variable && g.entity(*g.parent(i)).kind == EntityKind::Module) ++got_module_vars;
      }
      EXPECT_EQ(got_defs, defs) << repo << "/" << rel;
      EXPECT_EQ(got_module_vars, module_vars) << repo << "/" << rel;
    }
  }
}

TEST(GraphProperty, ContainsIsAForest) {
  for (const auto& repo : rt::fixture_repos()) {
    auto g = index_repository_serial(rt::fixture(repo));
    std::vector<int> visits(g.size(), 0);
    std::function<void(EntityId)> dfs = [&](EntityId v) {
      ++visits[v];
      for (EntityId c : g.children(v)) {
        EXPECT_EQ(g.parent(c), v);
        dfs(c);
      }
    };
    for (EntityId m : g.modules()) {
      EXPECT_FALSE(g.parent(m).has_value());
      dfs(m);
    }
    for (EntityId i = 0; i < g.size(); ++i) {
      EXPECT_EQ(visits[i], 1) << repo << " " << rt::qpath(g, i);
      if (g.entity(i).kind != EntityKind::Module) EXPECT_TRUE(g.parent(i).has_value());
      for (EntityId d : g.depends(i)) {
        EXPECT_LT(d, g.size());
        EXPECT_FALSE(g.entity(g.module_of(d)).file_path.starts_with("/"));
      }
    }
    EXPECT_EQ(g.contains_count(), g.size() - g.modules().size());
  }
}

TEST(GraphProperty, ParallelIndexEqualsSerial) {
  for (const auto& repo : rt::fixture_repos()) {
    auto serial = index_repository_serial(rt::fixture(repo));
    for (int jobs : {1, 2, 4, 8}) EXPECT_TRUE(index_repository(rt::fixture(repo), {jobs}) == serial) << repo << jobs;
  }
  rt::TempDir dir;
  rt::write_synthetic_repo(dir.path(), 30, 100, 42);
  auto serial = index_repository_serial(dir.path());
  EXPECT_TRUE(index_repository(dir.path(), {4}) == serial);
  EXPECT_EQ(serialize_graph(index_repository(dir.path(), {0})), serialize_graph(serial));
}

TEST(Discover, SkipsHiddenAndCaches) {
  rt::TempDir dir;
  rt::write_text(dir.path() / "a.py", "");
  rt::write_text(dir.path() / "pkg/b.py", "");
  rt::write_text(dir.path() / ".hidden/c.py", "");
  rt::write_text(dir.path() / "pkg/__pycache__/d.py", "");
  rt::write_text(dir.path() / "notes.txt", "");
  EXPECT_EQ(discover_sources(dir.path()), (std::vector<std::string>{"a.py", "pkg/b.py"}));
}

TEST(IndexRepository, UnreadableFileBecomesWarning) {
  rt::TempDir dir;
  rt::write_text(dir.path() / "good.py", "x = 1\n");
  rt::write_text(dir.path() / "bad.py", "x = '\xFF'\n");
  auto g = index_repository(dir.path(), {2});
  ASSERT_EQ(g.diagnostics().size(), 1u);
  EXPECT_EQ(g.diagnostics()[0].kind, "unreadable-file");
  EXPECT_TRUE(g.module_at("bad.py").has_value());
  EXPECT_TRUE(g.find("good.py:x").has_value());
}

TEST(IndexRepository, EmptyDirectory) {
  rt::TempDir dir;
  auto g = index_repository(dir.path());
  EXPECT_EQ(g.size(), 0u);
  EXPECT_EQ(format_stats(stats_of(g)),
            "modules 0\nclasses 0\nfunctions 0\nvariables 0\ncontains 0\ndepends 0\ndiagnostics 0\n");
}

TEST(Stats, CountsPerKind) {
  auto g = index_repository_serial(rt::fixture("mutual"));
  EXPECT_EQ(format_stats(stats_of(g)),
            "modules 3\nclasses 1\nfunctions 1\nvariables 4\ncontains 6\ndepends 4\ndiagnostics 1\n");
}

TEST(Persistence, RoundTripEveryFixture) {
  rt::TempDir dir;
  for (const auto& repo : rt::fixture_repos()) {
    auto g = index_repository_serial(rt::fixture(repo));
    save_graph(g, dir.path() / (repo + ".graph"));
    auto back = load_graph(dir.path() / (repo + ".graph"));
    EXPECT_TRUE(back == g) << repo;
    EXPECT_EQ(serialize_graph(back), serialize_graph(g));
  }
  ContextGraph empty;
  EXPECT_TRUE(deserialize_graph(serialize_graph(empty)) == empty);
}

TEST(Persistence, CorruptionIsAFormatError) {
  auto data = serialize_graph(index_repository_serial(rt::fixture("cycle4")));
  EXPECT_THROW(deserialize_graph(data.substr(0, data.size() / 2)), FormatError);
  EXPECT_THROW(deserialize_graph(""), FormatError);
  EXPECT_THROW(deserialize_graph("{\"format_version\": 1}"), FormatError);
  std::string bumped = data;
  auto at = bumped.find("\"format_version\": 1");
  ASSERT_NE(at, std::string::npos);
  bumped.replace(at, 19, "\"format_version\": 99");
  try {
    deserialize_graph(bumped);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
  }
  rt::TempDir dir;
  rt::write_text(dir.path() / "t.graph", data.substr(0, 40));
  EXPECT_THROW(load_graph(dir.path() / "t.graph"), FormatError);
}
