#include <benchmark/benchmark.h>

#include <sstream>
#include <string>

#include "aapp/analysis.hpp"
#include "aapp/encoder.hpp"
#include "aapp/parser.hpp"
#include "aapp/semantics.hpp"

namespace {

std::string sample_script(int tags) {
  std::ostringstream os;
  for (int i = 0; i < tags; ++i) {
    os << "- t" << i << ":\n"
       << "  - workers:\n"
       << "      - w0\n"
       << "      - w1\n"
       << "    strategy: best_first\n"
       << "    invalidate:\n"
       << "      - capacity_used 50%\n"
       << "  - workers: *\n"
       << "    invalidate:\n"
       << "      - max_concurrent_invocations 4\n";
  }
  return os.str();
}

std::string sample_config(int workers, int functions) {
  std::ostringstream os;
  os << "workers:\n";
  for (int i = 0; i < workers; ++i) {
    os << "  - name: w" << i << "\n    max_memory: 16\n";
  }
  os << "functions:\n";
  for (int i = 0; i < functions; ++i) {
    os << "  - name: f" << i << "\n    memory: 2\n    tag: t" << (i % 4) << "\n";
  }
  return os.str();
}

void BM_ParseScript(benchmark::State& state) {
  const std::string text = sample_script(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(aapp::parse_script(text));
  }
}
BENCHMARK(BM_ParseScript)->Arg(4)->Arg(16)->Arg(64);

void BM_Schedule(benchmark::State& state) {
  auto policy = aapp::encode(aapp::parse_script(sample_script(4)));
  auto platform = aapp::parse_config(sample_config(4, 8));
  auto registry = platform.registry();
  auto conf = platform.configuration();
  aapp::FunctionId function{"f1"};
  for (auto _ : state) {
    benchmark::DoNotOptimize(aapp::schedule(function, conf, policy, registry));
  }
}
BENCHMARK(BM_Schedule);

void BM_Canonicalize(benchmark::State& state) {
  auto platform = aapp::parse_config(sample_config(8, 16));
  auto conf = platform.configuration();
  for (int i = 0; i < 8; ++i) {
    conf = aapp::apply_start(conf, aapp::FunctionId{"f" + std::to_string(i)},
                             aapp::WorkerId{"w" + std::to_string(i % 8)},
                             platform.registry());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(aapp::canonicalize(conf));
  }
}
BENCHMARK(BM_Canonicalize);

void BM_GoalSearch(benchmark::State& state) {
  auto policy = aapp::encode(aapp::parse_script(sample_script(4)));
  auto platform = aapp::parse_config(sample_config(3, 6));
  auto registry = platform.registry();
  auto conf = platform.configuration();
  aapp::GoalSpec goal;
  goal.constraints.push_back(aapp::GoalConstraint{aapp::WorkerId{"w2"},
                                                  aapp::FunctionId{"f5"}, 2});
  aapp::SearchOptions options;
  options.max_states = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(aapp::goal_search(policy, registry, conf, goal, options));
  }
}
BENCHMARK(BM_GoalSearch)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
