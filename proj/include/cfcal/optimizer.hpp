#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace cfcal {

/// Bounded derivative-free global search: differential evolution
/// (current-to-best/1/bin with bound clipping). Deterministic given the seed.
struct OptimizerOptions {
    std::size_t budget = 20000;   ///< total objective evaluations
    std::uint64_t seed = 0;
    std::size_t population = 0;   ///< 0 = auto (max(15, 5 * dim))
    double weight = 0.7;          ///< differential weight F
    double crossover = 0.9;       ///< crossover rate CR
    int threads = 1;              ///< parallel objective evaluations per generation
};

struct OptimizerResult {
    std::vector<double> best;
    double best_value = 0.0;
    std::size_t evaluations = 0;
    std::vector<double> trace;    ///< best-so-far after init and each generation
};

using Objective = std::function<double(const std::vector<double>&)>;

OptimizerResult differential_evolution(const Objective& f,
                                       const std::vector<std::pair<double, double>>& bounds,
                                       const OptimizerOptions& opts);

}  // namespace cfcal
