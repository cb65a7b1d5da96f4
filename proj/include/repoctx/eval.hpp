#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "repoctx/context_graph.hpp"
#include "repoctx/prompt.hpp"

namespace repoctx {

struct BenchExample {
  std::string example_id;
  std::filesystem::path repo_root;  // absolute after loading
  std::string file_path;            // repo-relative
  std::string prefix;
  std::string reference;
};

/// One JSON object per line with example_id, repo_root, file_path, prefix
/// and reference. A relative repo_root is taken from the dataset's
/// directory. Throws FormatError naming the offending line.
std::vector<BenchExample> load_dataset(const std::filesystem::path& path);

/// example_id -> first line of the prediction.
std::map<std::string, std::string> load_predictions(const std::filesystem::path& path);

struct ExampleRecord {
  std::string example_id;
  double prompt_ms = 0;
  std::size_t prompt_tokens = 0;
  std::size_t relevant = 0;
  std::size_t other = 0;
  bool scored = false;
  int em = 0;
  double es = 0;
  int id_em = 0;
  double f1 = 0;
};

struct TimingStats {
  double mean = 0;
  double p50 = 0;
  double p95 = 0;
  double max = 0;
};

/// Nearest-rank percentiles over `samples`.
TimingStats timing_stats(std::vector<double> samples);

struct MetricReport {
  std::size_t examples = 0;
  std::size_t skipped = 0;
  std::size_t scored = 0;
  double em = 0;
  double es = 0;
  double id_em = 0;
  double f1 = 0;
  TimingStats prompt_ms;
  TimingStats index_ms;
  std::vector<ExampleRecord> records;
  std::vector<Diagnostic> diagnostics;
};

struct EvalOptions {
  PromptOptions prompt;
  std::string tokenizer = "approx";
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> graph_cache_dir;
  int jobs = 0;
};

MetricReport run_eval(const std::filesystem::path& dataset, const EvalOptions& options);
/// Same, over already loaded examples.
MetricReport run_eval(const std::vector<BenchExample>& examples, const EvalOptions& options);

inline constexpr int kReportSchemaVersion = 1;

std::string report_json(const MetricReport& report);
/// One JSON object per example.
std::string records_jsonl(const MetricReport& report);

}  // namespace repoctx
