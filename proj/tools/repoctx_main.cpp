// repoctx: index a Python repository and build completion prompts from it.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "repoctx/context_graph.hpp"
#include "repoctx/dataflow.hpp"
#include "repoctx/error.hpp"
#include "repoctx/eval.hpp"
#include "repoctx/prompt.hpp"
#include "repoctx/retrieval.hpp"
#include "repoctx/syntax.hpp"

namespace fs = std::filesystem;
using namespace repoctx;

namespace {

constexpr std::size_t kMinTokens = 64;

struct Settings {
  std::size_t max_tokens = 2048;
  std::string scope = "complete";
  std::string tokenizer = "approx";
  int jobs = 0;
};

// Values given on the command line; unset ones fall back to the
// environment, then to the config file.
struct Flags {
  std::optional<std::size_t> max_tokens;
  std::optional<std::string> scope;
  std::optional<std::string> tokenizer;
  std::optional<int> jobs;
  std::string config;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

Settings resolve_settings(const Flags& flags) {
  Settings s;
  nlohmann::json cfg = nlohmann::json::object();
  std::string config_path = flags.config;
  if (config_path.empty()) config_path = env("REPOCTX_CONFIG").value_or("");
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot read config " + config_path);
    try {
      cfg = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("invalid config " + config_path + ": " + e.what());
    }
    if (!cfg.is_object()) throw std::runtime_error("config " + config_path + " is not an object");
  }
  auto pick = [&](auto flag, const char* var, const char* key, auto& out, auto convert) {
    if (flag) {
      out = *flag;
    } else if (auto e = env(var)) {
      out = convert(*e);
    } else if (cfg.contains(key)) {
      out = cfg.at(key).template get<std::remove_reference_t<decltype(out)>>();
    }
  };
  auto to_size = [](const std::string& v) { return static_cast<std::size_t>(std::stoull(v)); };
  auto to_int = [](const std::string& v) { return std::stoi(v); };
  auto same = [](const std::string& v) { return v; };
  try {
    pick(flags.max_tokens, "REPOCTX_MAX_TOKENS", "max_tokens", s.max_tokens, to_size);
    pick(flags.scope, "REPOCTX_SCOPE", "scope", s.scope, same);
    pick(flags.tokenizer, "REPOCTX_TOKENIZER", "tokenizer", s.tokenizer, same);
    pick(flags.jobs, "REPOCTX_JOBS", "jobs", s.jobs, to_int);
  } catch (const std::logic_error& e) {
    throw std::runtime_error(std::string("invalid setting: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("invalid config value: ") + e.what());
  }
  if (s.max_tokens < kMinTokens) throw std::runtime_error("max tokens must be at least 64");
  parse_scope(s.scope);
  make_tokenizer(s.tokenizer);
  return s;
}

void add_prompt_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--max-tokens", f.max_tokens, "Total prompt budget in tokens (>= 64, default 2048)");
  cmd->add_option("--scope", f.scope, "Entity rendering: definition or complete (default complete)")
      ->check(CLI::IsMember({"definition", "complete"}));
  cmd->add_option("--tokenizer", f.tokenizer, "Token counter: approx or char (default approx)")
      ->check(CLI::IsMember({"approx", "char"}));
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) {
    std::cerr << (d.severity == Diagnostic::Severity::Error ? "error" : "warning") << ": " << d.file;
    if (d.line > 0) std::cerr << ':' << d.line;
    std::cerr << ": " << d.message << " [" << d.kind << "]\n";
  }
}

// Repo-relative name of `file` for import resolution.
std::string relative_to_root(const fs::path& file, const std::string& root, const std::string& as) {
  if (!as.empty()) return normalize_relative_path(as);
  if (!root.empty()) {
    auto rel = fs::absolute(file).lexically_normal().lexically_relative(root);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  }
  return file.filename().generic_string();
}

// "LINE:COL", both 1-based; COL counts characters and may point just past
// the end of the line.
Position parse_cursor(const std::string& spec, const std::string& text) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::runtime_error("cursor must be LINE:COL");
  long line = 0;
  long col = 0;
  try {
    line = std::stol(spec.substr(0, colon));
    col = std::stol(spec.substr(colon + 1));
  } catch (const std::logic_error&) {
    throw std::runtime_error("cursor must be LINE:COL");
  }
  const auto lines = count_lines(text);
  const bool trailing_empty = text.empty() || text.back() == '\n';
  const long last = static_cast<long>(lines) + (trailing_empty ? 1 : 0);
  if (line < 1 || line > last || col < 1) throw std::runtime_error("cursor " + spec + " is outside the file");
  const auto l = static_cast<std::uint32_t>(line - 1);
  const auto line_start = offset_of(text, {l, 0});
  auto line_end = text.find('\n', line_start);
  if (line_end == std::string::npos) line_end = text.size();
  std::size_t chars = 0;
  for (std::size_t i = line_start; i < line_end; ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) ++chars;
  }
  if (static_cast<std::size_t>(col) > chars + 1) throw std::runtime_error("cursor " + spec + " is outside the file");
  return {l, byte_column(text, l, static_cast<std::uint32_t>(col - 1))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repository context engine for code completion prompts.\n"
               "Settings resolve as: command-line flag, then REPOCTX_* environment variable\n"
               "(REPOCTX_MAX_TOKENS, REPOCTX_SCOPE, REPOCTX_TOKENIZER, REPOCTX_JOBS), then the\n"
               "JSON config file given by --config or REPOCTX_CONFIG, then built-in defaults.",
               "repoctx"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "JSON file with max_tokens, scope, tokenizer, jobs");

  std::string repo;
  std::string graph_path;
  std::string output;
  std::string file;
  std::string cursor;
  std::string as_path;
  bool json_stats = false;
  bool timing = false;

  auto* index = app.add_subcommand("index", "Index a repository into a graph file");
  index->add_option("repo", repo, "Repository root")->required();
  index->add_option("-o,--output", output, "Graph file (default <repo>/.repoctx.graph)");
  index->add_option("-j,--jobs", flags.jobs, "Worker threads (default: all cores)");

  auto* stats = app.add_subcommand("stats", "Print entity and edge counts of a graph file");
  stats->add_option("graph", graph_path, "Graph file")->required();
  stats->add_flag("--json", json_stats, "Emit JSON instead of text");

  auto* prompt = app.add_subcommand("prompt", "Build the prompt for a cursor position");
  prompt->add_option("graph", graph_path, "Graph file")->required();
  prompt->add_option("file", file, "Unfinished source file")->required();
  prompt->add_option("cursor", cursor, "LINE:COL, 1-based")->required();
  prompt->add_option("--as", as_path, "Repo-relative path of the file (default: derived from the graph root)");
  prompt->add_option("-o,--output", output, "Write the prompt here instead of stdout");
  prompt->add_flag("--timing", timing, "Print prompt generation time to stderr");
  add_prompt_flags(prompt, flags);

  auto* retrieve_cmd = app.add_subcommand("retrieve", "Print resolved imports and the relevant/other partition");
  retrieve_cmd->add_option("graph", graph_path, "Graph file")->required();
  retrieve_cmd->add_option("file", file, "Unfinished source file")->required();
  retrieve_cmd->add_option("cursor", cursor, "LINE:COL, 1-based")->required();
  retrieve_cmd->add_option("--as", as_path, "Repo-relative path of the file");

  auto* dfg = app.add_subcommand("dfg", "Print the dataflow triplets of a file");
  dfg->add_option("file", file, "Source file")->required();

  std::string dataset;
  std::string predictions;
  std::string records;
  std::string cache_dir;
  auto* eval = app.add_subcommand("eval", "Build prompts for a dataset and score predictions");
  eval->add_option("dataset", dataset, "Dataset JSONL")->required();
  eval->add_option("--predictions", predictions, "Predictions JSONL (example_id, prediction)");
  eval->add_option("-o,--output", output, "Report JSON (default stdout)");
  eval->add_option("--records", records, "Per-example JSONL");
  eval->add_option("--cache-dir", cache_dir, "Directory for cached repository graphs");
  eval->add_option("-j,--jobs", flags.jobs, "Worker threads (default: all cores)");
  add_prompt_flags(eval, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    const Settings settings = resolve_settings(flags);

    if (*index) {
      const auto t0 = std::chrono::steady_clock::now();
      auto g = index_repository(repo, {settings.jobs});
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      const std::string out = output.empty() ? (fs::path(repo) / ".repoctx.graph").string() : output;
      save_graph(g, out);
      print_diagnostics(g.diagnostics());
      std::cerr << format_stats(stats_of(g));
      std::cerr << "indexed in " << static_cast<long long>(ms + 0.5) << " ms -> " << out << '\n';
      return 0;
    }

    if (*stats) {
      auto g = load_graph(graph_path);
      auto s = stats_of(g);
      if (json_stats) {
        nlohmann::json j{{"modules", s.entities[EntityKind::Module]},
                         {"classes", s.entities[EntityKind::Class]},
                         {"functions", s.entities[EntityKind::Function]},
                         {"variables", s.entities[EntityKind::Variable]},
                         {"contains", s.contains},
                         {"depends", s.depends},
                         {"diagnostics", s.diagnostics}};
        std::cout << j.dump() << '\n';
      } else {
        std::cout << format_stats(s);
      }
      return 0;
    }

    if (*dfg) {
      auto text = read_file(file);
      auto src = SourceFile::from_text(fs::path(file).filename().generic_string(), std::move(text));
      auto tree = parse(src);
      std::cout << dump_triplets(build_dfg(tree, src));
      return 0;
    }

    if (*prompt || *retrieve_cmd) {
      auto g = load_graph(graph_path);
      auto text = read_file(file);
      const auto pos = parse_cursor(cursor, text);
      auto src = SourceFile::from_text(relative_to_root(file, g.root(), as_path), std::move(text));
      auto unfinished = unfinished_prefix(src, pos);
      if (*retrieve_cmd) {
        auto r = retrieve(unfinished, pos.line + 1, g);
        std::cout << format_retrieval(r, g);
        return 0;
      }
      const auto tok = make_tokenizer(settings.tokenizer);
      PromptOptions opts{settings.max_tokens, parse_scope(settings.scope)};
      auto plan = build_prompt(unfinished, g, opts, *tok);
      write_output(output, plan.final_prompt);
      if (timing) std::cerr << "prompt generated in " << plan.elapsed_ms << " ms\n";
      return 0;
    }

    if (*eval) {
      EvalOptions opts;
      opts.prompt = {settings.max_tokens, parse_scope(settings.scope)};
      opts.tokenizer = settings.tokenizer;
      opts.jobs = settings.jobs;
      if (!predictions.empty()) opts.predictions = predictions;
      if (!cache_dir.empty()) opts.graph_cache_dir = cache_dir;
      auto report = run_eval(fs::path(dataset), opts);
      print_diagnostics(report.diagnostics);
      write_output(output, report_json(report));
      if (!records.empty()) write_output(records, records_jsonl(report));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
