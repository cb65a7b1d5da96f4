#include "test_support.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace repoctx::testing {

namespace fs = std::filesystem;

fs::path fixture_root() { return fs::path(REPOCTX_TEST_DATA) / "fixtures"; }
fs::path fixture(std::string_view name) { return fixture_root() / name; }
fs::path golden(std::string_view name) { return fs::path(REPOCTX_TEST_DATA) / "golden" / name; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, std::string_view text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

SourceFile source(std::string_view text, std::string_view path) {
  return SourceFile::from_text(path, std::string(text));
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("repoctx-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<QueryCase> retrieval_cases() {
  const std::string rs = "pyPhasesRecordloader/RecordSignal.py:";
  return {
      {"recordloader",
       "recordloader",
       fixture("recordloader") / "pyPhasesRecordloader/RecordLoader.py",
       "pyPhasesRecordloader/RecordLoader.py",
       {12, 18},
       {rs + "RecordSignal", rs + "RecordSignal.getSignalByName"},
       {"pyPhasesRecordloader/util.py:channelAliases"}},
      {"cycle4",
       "cycle4",
       fixture("queries") / "cycle4_main.py",
       "main.py",
       {5, 6},
       {"square.py:Square"},
       {"units.py:convert", "base.py:Base"}},
      {"pkgrel",
       "pkgrel",
       fixture("pkgrel") / "app/core/train.py",
       "app/core/train.py",
       {10, 15},
       {"app/util/report.py:Report", "app/core/model.py:Model", "app/core/model.py:Model.fit"},
       {"app/util/report.py"}},
      {"starpkg",
       "starpkg",
       fixture("starpkg") / "main.py",
       "main.py",
       {6, 6},
       {"lib/shapes.py:make_circle"},
       {"lib/shapes.py:Circle", "lib/shapes.py:PI", "lib/shapes.py:Rect", "lib/colors.py:RED", "lib/colors.py:blend",
        "lib/colors.py"}},
      {"mutual",
       "mutual",
       fixture("mutual") / "use.py",
       "use.py",
       {5, 17},
       {"a.py:Klass"},
       {"a.py:ALPHA", "b.py:BETA"}},
      {"mutual-comment",
       "mutual",
       fixture("mutual") / "use.py",
       "use.py",
       {3, 30},
       {},
       {"a.py:ALPHA", "a.py:Klass", "b.py:BETA"}},
  };
}

SourceFile unfinished_of(const QueryCase& c) {
  const auto full = SourceFile::from_text(c.as_path, read_text(c.file));
  const auto off = offset_of(full.text, c.cursor);
  return SourceFile::from_text(c.as_path, full.text.substr(0, off));
}

std::vector<std::string> fixture_repos() { return {"recordloader", "cycle4", "pkgrel", "starpkg", "mutual"}; }

namespace {

std::string two(int k) {
  std::string s = std::to_string(k);
  return s.size() < 2 ? "0" + s : s;
}

}  // namespace

void write_synthetic_repo(const fs::path& root, int files, int lines, unsigned seed) {
  std::mt19937 rng(seed);
  write_text(root / "gen/__init__.py", "\"\"\"Generated package.\"\"\"\n");
  for (int k = 0; k < files; ++k) {
    std::ostringstream out;
    const std::string me = two(k);
    out << "\"\"\"Generated module " << k << ".\"\"\"\n";
    out << "import json\n";
    std::vector<int> deps;
    for (int d = 0; d < k && deps.size() < 3; ++d) {
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0 || d + 3 >= k) deps.push_back(d);
    }
    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
    for (int d : deps) out << "from gen.mod_" << two(d) << " import Widget" << two(d) << ", helper" << two(d) << "\n";
    if (!deps.empty()) out << "from . import mod_" << two(deps.front()) << " as base_mod\n";
    out << "\nLIMIT_" << me << " = " << (k + 1) * 10 << "\n";
    out << "NAMES_" << me << ": list = [\"a\", \"b\"]\n\n\n";
    const std::string parent = deps.empty() ? "" : "(Widget" + two(deps.back()) + ")";
    out << "class Widget" << me << parent << ":\n";
    out << "    \"\"\"Widget number " << k << ".\"\"\"\n\n";
    out << "    size = " << k << "\n\n";
    out << "    def __init__(self, value: int):\n";
    out << "        self.value = value\n";
    out << "        self.items = []\n\n";
    int line_estimate = 24 + static_cast<int>(deps.size());
    int m = 0;
    while (line_estimate < lines - 20) {
      out << "    def op" << m << "(self, amount) -> \"Widget" << me << "\":\n";
      out << "        total = self.value + amount\n";
      out << "        for item in self.items:\n";
      out << "            total += item\n";
      out << "        self.value = total % LIMIT_" << me << "\n";
      out << "        return self\n\n";
      line_estimate += 7;
      ++m;
    }
    out << "\ndef helper" << me << "(x) -> Widget" << me << ":\n";
    out << "    w = Widget" << me << "(x)\n";
    out << "    return w\n\n\n";
    out << "def run" << me << "(data):\n";
    out << "    result = helper" << me << "(len(data))\n";
    for (int d : deps) {
      out << "    other" << two(d) << " = helper" << two(d) << "(result.value)\n";
      out << "    other" << two(d) << ".op0(1)\n";
    }
    out << "    encoded = json.dumps(data)\n";
    out << "    result.op0(len(encoded))\n";
    out << "    return result.value\n";
    write_text(root / ("gen/mod_" + me + ".py"), out.str());
  }
}

SourceFile random_query(unsigned seed, int files) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> mod(0, files - 1);
  std::ostringstream out;
  std::vector<int> used;
  const int imports = std::uniform_int_distribution<int>(0, 6)(rng);
  for (int i = 0; i < imports; ++i) {
    const int k = mod(rng);
    used.push_back(k);
    out << "from gen.mod_" << two(k) << " import Widget" << two(k) << ", helper" << two(k) << "\n";
  }
  if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) out << "import os\n";
  out << "\n";
  const int body = std::uniform_int_distribution<int>(0, 40)(rng);
  for (int i = 0; i < body; ++i) {
    if (used.empty()) {
      out << "x" << i << " = " << i << "\n";
      continue;
    }
    const int k = used[rng() % used.size()];
    switch (rng() % 3) {
      case 0: out << "w" << i << " = helper" << two(k) << "(" << i << ")\n"; break;
      case 1: out << "w" << i << ": Widget" << two(k) << " = None\n"; break;
      default: out << "print(w" << i << ")\n"; break;
    }
  }
  if (!used.empty() && rng() % 2) {
    out << "last = helper" << two(used[rng() % used.size()]) << "(1).";
  } else {
    out << "last = 1";
  }
  return SourceFile::from_text("gen/query.py", out.str());
}

std::vector<std::vector<bool>> transitive_closure(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (auto [a, b] : edges) r[a][b] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  return r;
}

bool topologically_sortable(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> indeg(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (auto [a, b] : edges) {
    out[a].push_back(b);
    ++indeg[b];
  }
  std::queue<std::size_t> q;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) q.push(i);
  std::size_t seen = 0;
  while (!q.empty()) {
    auto v = q.front();
    q.pop();
    ++seen;
    for (auto w : out[v])
      if (--indeg[w] == 0) q.push(w);
  }
  return seen == n;
}

std::size_t levenshtein_dp(std::string_view a, std::string_view b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

std::size_t lcs_dp(std::string_view a, std::string_view b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = a[i - 1] == b[j - 1] ? d[i - 1][j - 1] + 1 : std::max(d[i - 1][j], d[i][j - 1]);
  return d[a.size()][b.size()];
}

std::vector<Edge> dfg_edges(const DataflowGraph& g) {
  std::vector<Edge> out;
  for (const auto& e : g.edges()) out.emplace_back(e.head, e.tail);
  return out;
}

std::vector<Edge> depends_edges(const ContextGraph& g) {
  std::vector<Edge> out;
  for (EntityId i = 0; i < g.size(); ++i)
    for (EntityId d : g.depends(i)) out.emplace_back(i, d);
  return out;
}

std::string qpath(const ContextGraph& g, EntityId id) { return g.entity(id).qualified_path; }

std::vector<std::string> qpaths(const ContextGraph& g, const std::vector<EntityId>& ids) {
  std::vector<std::string> out;
  for (EntityId i : ids) out.push_back(qpath(g, i));
  return out;
}

}  // namespace repoctx::testing
