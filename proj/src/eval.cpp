#include "repoctx/eval.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "repoctx/error.hpp"
#include "repoctx/metrics.hpp"

namespace repoctx {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

template <typename F>
void for_each_jsonl(const fs::path& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (strip(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw FormatError(path.string() + ":" + std::to_string(n) + ": expected an object");
    try {
      f(j);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<BenchExample> load_dataset(const fs::path& path) {
  std::vector<BenchExample> out;
  const fs::path base = path.parent_path();
  for_each_jsonl(path, [&](const json& j) {
    BenchExample e;
    e.example_id = j.at("example_id").get<std::string>();
    fs::path root = j.at("repo_root").get<std::string>();
    e.repo_root = root.is_relative() ? base / root : root;
    e.file_path = j.at("file_path").get<std::string>();
    e.prefix = j.at("prefix").get<std::string>();
    e.reference = j.at("reference").get<std::string>();
    out.push_back(std::move(e));
  });
  return out;
}

std::map<std::string, std::string> load_predictions(const fs::path& path) {
  std::map<std::string, std::string> out;
  for_each_jsonl(path, [&](const json& j) {
    out[j.at("example_id").get<std::string>()] = first_line(j.at("prediction").get<std::string>());
  });
  return out;
}

TimingStats timing_stats(std::vector<double> samples) {
  TimingStats s;
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  double sum = 0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(samples.size());
  auto rank = [&](double q) {
    auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(k, 1, samples.size()) - 1];
  };
  s.p50 = rank(0.50);
  s.p95 = rank(0.95);
  s.max = samples.back();
  return s;
}

MetricReport run_eval(const fs::path& dataset, const EvalOptions& options) {
  return run_eval(load_dataset(dataset), options);
}

MetricReport run_eval(const std::vector<BenchExample>& examples, const EvalOptions& options) {
  MetricReport report;
  report.examples = examples.size();
  const auto tokenizer = make_tokenizer(options.tokenizer);
  std::map<std::string, std::string> predictions;
  if (options.predictions) predictions = load_predictions(*options.predictions);

  std::map<std::string, std::shared_ptr<const ContextGraph>> graphs;
  std::vector<double> index_ms;
  for (const auto& ex : examples) {
    const std::string key = ex.repo_root.lexically_normal().string();
    if (graphs.contains(key)) continue;
    std::error_code ec;
    if (!fs::is_directory(ex.repo_root, ec)) {
      graphs[key] = nullptr;
      continue;
    }
    std::optional<fs::path> cache;
    if (options.graph_cache_dir) {
      std::ostringstream name;
      name << std::hex << std::hash<std::string>{}(fs::weakly_canonical(ex.repo_root).string()) << ".graph";
      cache = *options.graph_cache_dir / name.str();
    }
    if (cache && fs::exists(*cache)) {
      try {
        graphs[key] = std::make_shared<const ContextGraph>(load_graph(*cache));
        continue;
      } catch (const FormatError&) {
        // stale or foreign cache entry; rebuild below
      }
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto g = std::make_shared<const ContextGraph>(index_repository(ex.repo_root, {options.jobs}));
    index_ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    if (cache) {
      fs::create_directories(*options.graph_cache_dir);
      save_graph(*g, *cache);
    }
    graphs[key] = std::move(g);
  }
  report.index_ms = timing_stats(index_ms);

  std::vector<std::optional<ExampleRecord>> records(examples.size());
  std::vector<std::optional<Diagnostic>> problems(examples.size());
  const int jobs = options.jobs > 0 ? options.jobs : omp_get_max_threads();
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& ex = examples[i];
    const auto& graph = graphs.at(ex.repo_root.lexically_normal().string());
    if (!graph) {
      problems[i] = Diagnostic{Diagnostic::Severity::Warning, "missing-repo", ex.repo_root.string(), 0,
                               "example " + ex.example_id + " skipped: repository not found"};
      continue;
    }
    try {
      auto file = SourceFile::from_text(ex.file_path, ex.prefix);
      auto plan = build_prompt(file, *graph, options.prompt, *tokenizer);
      ExampleRecord rec;
      rec.example_id = ex.example_id;
      rec.prompt_ms = plan.elapsed_ms;
      rec.prompt_tokens = plan.prompt_tokens;
      rec.relevant = plan.retrieval.relevant.size();
      rec.other = plan.retrieval.other.size();
      if (options.predictions) {
        auto it = predictions.find(ex.example_id);
        const std::string pred = it == predictions.end() ? std::string() : it->second;
        if (it == predictions.end()) {
          problems[i] = Diagnostic{Diagnostic::Severity::Warning, "missing-prediction", ex.example_id, 0,
                                   "no prediction for example " + ex.example_id};
        }
        rec.scored = true;
        rec.em = exact_match(pred, ex.reference);
        rec.es = edit_similarity(pred, ex.reference);
        const auto ids = identifier_metrics(pred, ex.reference);
        rec.id_em = ids.id_em;
        rec.f1 = ids.f1;
      }
      records[i] = rec;
    } catch (const std::exception& e) {
      problems[i] = Diagnostic{Diagnostic::Severity::Warning, "example-failed", ex.file_path, 0,
                               "example " + ex.example_id + " skipped: " + e.what()};
    }
  }

  std::vector<double> prompt_ms;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (problems[i]) report.diagnostics.push_back(*problems[i]);
    if (!records[i]) {
      ++report.skipped;
      continue;
    }
    const auto& r = *records[i];
    prompt_ms.push_back(r.prompt_ms);
    if (r.scored) {
      ++report.scored;
      report.em += r.em;
      report.es += r.es;
      report.id_em += r.id_em;
      report.f1 += r.f1;
    }
    report.records.push_back(r);
  }
  if (report.scored > 0) {
    const auto k = static_cast<double>(report.scored);
    report.em /= k;
    report.es /= k;
    report.id_em /= k;
    report.f1 /= k;
  }
  report.prompt_ms = timing_stats(prompt_ms);
  return report;
}

namespace {

json timing_json(const TimingStats& t) { return {{"mean", t.mean}, {"p50", t.p50}, {"p95", t.p95}, {"max", t.max}}; }

}  // namespace

std::string report_json(const MetricReport& r) {
  json j{{"schema_version", kReportSchemaVersion},
         {"examples", r.examples},
         {"skipped", r.skipped},
         {"scored", r.scored},
         {"prompt_ms", timing_json(r.prompt_ms)},
         {"index_ms", timing_json(r.index_ms)}};
  if (r.scored > 0) {
    j["metrics"] = {{"em", r.em}, {"es", r.es}, {"id_em", r.id_em}, {"f1", r.f1}};
  } else {
    j["metrics"] = nullptr;
  }
  json diags = json::array();
  for (const auto& d : r.diagnostics) diags.push_back({{"kind", d.kind}, {"file", d.file}, {"message", d.message}});
  j["diagnostics"] = std::move(diags);
  return j.dump(2) + "\n";
}

std::string records_jsonl(const MetricReport& r) {
  std::string out;
  for (const auto& rec : r.records) {
    json j{{"schema_version", kReportSchemaVersion},
           {"example_id", rec.example_id},
           {"prompt_ms", rec.prompt_ms},
           {"prompt_tokens", rec.prompt_tokens},
           {"relevant", rec.relevant},
           {"other", rec.other}};
    if (rec.scored) {
      j["em"] = rec.em;
      j["es"] = rec.es;
      j["id_em"] = rec.id_em;
      j["f1"] = rec.f1;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace repoctx
