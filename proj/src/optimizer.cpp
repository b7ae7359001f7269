#include "cfcal/optimizer.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <thread>

namespace cfcal {

namespace {
void parallel_eval(const Objective& f, const std::vector<std::vector<double>>& points,
                   std::vector<double>& values, int threads) {
    values.resize(points.size());
    if (threads <= 1 || points.size() < 2) {
        for (std::size_t i = 0; i < points.size(); ++i) values[i] = f(points[i]);
        return;
    }
    const std::size_t n = points.size();
    const std::size_t workers = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) values[i] = f(points[i]);
        });
    }
    for (auto& th : pool) th.join();
}
}  // namespace

OptimizerResult differential_evolution(const Objective& f,
                                       const std::vector<std::pair<double, double>>& bounds,
                                       const OptimizerOptions& opts) {
    const std::size_t dim = bounds.size();
    if (dim == 0) throw std::runtime_error("optimizer needs at least one dimension");
    for (const auto& [lo, hi] : bounds)
        if (!(lo < hi)) throw std::runtime_error("invalid bounds: lower must be < upper");

    std::size_t pop = opts.population ? opts.population : std::max<std::size_t>(15, 5 * dim);
    if (opts.budget < pop)
        throw std::runtime_error("budget below population minimum (" + std::to_string(pop) + ")");

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto clip = [&bounds](std::vector<double>& x) {
        for (std::size_t d = 0; d < x.size(); ++d)
            x[d] = std::clamp(x[d], bounds[d].first, bounds[d].second);
    };

    std::vector<std::vector<double>> population(pop, std::vector<double>(dim));
    for (auto& x : population)
        for (std::size_t d = 0; d < dim; ++d)
            x[d] = bounds[d].first + unit(rng) * (bounds[d].second - bounds[d].first);

    OptimizerResult res;
    std::vector<double> values;
    parallel_eval(f, population, values, opts.threads);
    res.evaluations = pop;

    std::size_t best_i = std::size_t(
        std::min_element(values.begin(), values.end()) - values.begin());
    res.best = population[best_i];
    res.best_value = values[best_i];
    res.trace.push_back(res.best_value);

    std::uniform_int_distribution<std::size_t> pick(0, pop - 1);
    std::uniform_int_distribution<std::size_t> pick_dim(0, dim - 1);

    std::vector<std::vector<double>> trials(pop, std::vector<double>(dim));
    std::vector<double> trial_values;
    while (res.evaluations + pop <= opts.budget) {
        for (std::size_t i = 0; i < pop; ++i) {
            std::size_t r1 = pick(rng), r2 = pick(rng);
            while (r1 == i) r1 = pick(rng);
            while (r2 == i || r2 == r1) r2 = pick(rng);
            const std::size_t forced = pick_dim(rng);
            for (std::size_t d = 0; d < dim; ++d) {
                const double mutant = population[i][d] +
                                      opts.weight * (res.best[d] - population[i][d]) +
                                      opts.weight * (population[r1][d] - population[r2][d]);
                trials[i][d] =
                    (d == forced || unit(rng) < opts.crossover) ? mutant : population[i][d];
            }
            clip(trials[i]);
        }
        parallel_eval(f, trials, trial_values, opts.threads);
        res.evaluations += pop;
        for (std::size_t i = 0; i < pop; ++i) {
            if (trial_values[i] <= values[i]) {
                population[i] = trials[i];
                values[i] = trial_values[i];
                if (values[i] < res.best_value) {
                    res.best_value = values[i];
                    res.best = population[i];
                }
            }
        }
        res.trace.push_back(res.best_value);
    }
    return res;
}

}  // namespace cfcal
