// Times the serial reference kernels against their OpenMP counterparts.
//   atise_bench [entities] [d] [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "atise/kernels.hpp"
#include "atise/trainer.hpp"

using namespace atise;

namespace {

template <typename F>
double seconds_per_call(F&& fn, int repeats) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return elapsed.count() / repeats;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-18s serial %10.3f ms   parallel %10.3f ms   speedup %5.2fx\n", name, serial * 1e3, parallel * 1e3,
              serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int n_entities = argc > 1 ? std::atoi(argv[1]) : 2000;
  const int d = argc > 2 ? std::atoi(argv[2]) : 128;
  const int threads = argc > 3 ? std::atoi(argv[3]) : 0;

  ModelConfig config;
  config.d = d;
  config.n_entities = n_entities;
  config.n_relations = 20;
  config.n_steps = 365;
  const ModelParams params = init_params(config, 1);

  std::printf("entities %d, d %d, threads %d\n", n_entities, d, resolve_threads(threads));

  const IntervalFact fact{3, 7, 11, 100, 104};
  std::vector<double> out(static_cast<std::size_t>(n_entities));
  const double score_serial =
      seconds_per_call([&] { kernels::score_candidates_serial(params, fact, Side::kObject, out); }, 5);
  const double score_parallel =
      seconds_per_call([&] { kernels::score_candidates_parallel(params, fact, Side::kObject, out, threads); }, 5);
  report("candidate scoring", score_serial, score_parallel);

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int32_t> entity(0, n_entities - 1), relation(0, 19), step(0, 364);
  std::vector<Quadruple> positives(512);
  for (auto& q : positives) q = {entity(rng), relation(rng), entity(rng), step(rng)};
  const auto negatives = sample_negatives(positives, 10, n_entities, rng);
  const double loss_serial =
      seconds_per_call([&] { kernels::batch_loss_serial(params, positives, negatives, 1.0, 1.0); }, 3);
  const double loss_parallel =
      seconds_per_call([&] { kernels::batch_loss_parallel(params, positives, negatives, 1.0, 1.0, threads); }, 3);
  report("batch loss", loss_serial, loss_parallel);
  return 0;
}
