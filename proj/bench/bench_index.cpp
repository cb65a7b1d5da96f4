// Serial reference vs OpenMP indexing, plus prompt construction, on
// generated repositories.
#include <benchmark/benchmark.h>

#include <map>
#include <memory>

#include "repoctx/context_graph.hpp"
#include "repoctx/prompt.hpp"
#include "test_support.hpp"

namespace rt = repoctx::testing;

namespace {

// One generated repository per file count, alive for the whole run.
const std::filesystem::path& repo(int files) {
  static std::map<int, std::unique_ptr<rt::TempDir>> repos;
  auto& dir = repos[files];
  if (!dir) {
    dir = std::make_unique<rt::TempDir>();
    rt::write_synthetic_repo(dir->path(), files, 100, 17);
  }
  return dir->path();
}

void BM_IndexSerial(benchmark::State& state) {
  const auto& root = repo(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(repoctx::index_repository_serial(root));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_IndexParallel(benchmark::State& state) {
  const auto& root = repo(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(repoctx::index_repository(root));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BuildPrompt(benchmark::State& state) {
  const auto graph = repoctx::index_repository(repo(25));
  const repoctx::ApproxTokenizer tok;
  const repoctx::PromptOptions opts{static_cast<std::size_t>(state.range(0)), repoctx::Scope::Complete};
  unsigned seed = 0;
  for (auto _ : state) {
    state.PauseTiming();
    const auto code = rt::random_query(seed++ % 64, 25);
    state.ResumeTiming();
    benchmark::DoNotOptimize(repoctx::build_prompt(code, graph, opts, tok));
  }
}

}  // namespace

BENCHMARK(BM_IndexSerial)->Arg(30)->Arg(120)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IndexParallel)->Arg(30)->Arg(120)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildPrompt)->Arg(512)->Arg(2048)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
