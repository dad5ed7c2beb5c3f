#include "ekisel/experiments/runner.hpp"

#include "ekisel/experiments/variants.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace ekisel {

void parallel_for(int count, int threads, const std::function<void(int)>& task) {
  if (count <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (threads > count) threads = count;

  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

FamilyRunResult run_family(const ExperimentConfig& config) {
  config.validate();

  struct Cell {
    int ensemble_size;
    double beta;
    int experiment_index;
  };
  std::vector<Cell> cells;
  cells.reserve(config.ensemble_sizes.size() * config.betas.size() *
                static_cast<std::size_t>(config.experiment_count));
  for (int j : config.ensemble_sizes)
    for (double beta : config.betas)
      for (int i = 0; i < config.experiment_count; ++i)
        cells.push_back({j, beta, i});

  std::vector<std::vector<VariantOutcome>> slots(cells.size());
  parallel_for(static_cast<int>(cells.size()), config.parallelism, [&](int t) {
    slots[t] = run_experiment(config, cells[t].experiment_index,
                              cells[t].ensemble_size, cells[t].beta);
  });

  FamilyRunResult result;
  for (std::vector<VariantOutcome>& slot : slots)
    for (VariantOutcome& out : slot) result.outcomes.push_back(std::move(out));
  result.aggregates = aggregate(result.outcomes);
  return result;
}

}  // namespace ekisel
