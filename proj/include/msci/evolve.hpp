#pragma once

// Generic genetic-programming engine.
//
// The engine is parameterized by a genome-operator bundle (random / crossover /
// mutate / text) and a fitness callable. Every random decision for offspring
// slot s of generation g draws from a stream derived from (seed, g, s), so
// results do not depend on evaluation order or thread count.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "msci/random.hpp"
#include "msci/text.hpp"

namespace msci {

struct GPConfig {
    std::size_t population_size = 500;
    std::size_t generations = 100;
    double crossover_prob = 0.70;
    double mutation_prob = 0.05;
    int max_depth = 10;
    int init_depth_min = 2;
    int init_depth_max = 6;
    std::size_t elitism = 1;
    std::uint64_t seed = 1;
    std::size_t enumeration_cap = 12;
    std::size_t mc_draws = 4096;
    std::size_t threads = 1;

    static GPConfig for_xft() { return {}; }
    static GPConfig for_qdt() {
        GPConfig c;
        c.max_depth = 8;
        return c;
    }

    void validate() const {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (!prob(crossover_prob) || !prob(mutation_prob)) throw std::invalid_argument("probabilities must be in [0,1]");
        if (crossover_prob + mutation_prob > 1.0 + 1e-12)
            throw std::invalid_argument("crossover_prob + mutation_prob must not exceed 1");
        if (population_size < 2) throw std::invalid_argument("population_size must be at least 2");
        if (elitism > population_size) throw std::invalid_argument("elitism exceeds population_size");
        if (init_depth_min < 1 || init_depth_max < init_depth_min) throw std::invalid_argument("bad init depth range");
        if (max_depth < 1) throw std::invalid_argument("max_depth must be positive");
        if (mc_draws == 0) throw std::invalid_argument("mc_draws must be positive");
    }

    friend bool operator==(const GPConfig&, const GPConfig&) = default;
};

template <class Ops>
concept GenomeOps = requires(const Ops& ops, const typename Ops::Genome& g, Rng& rng) {
    { ops.random(rng) } -> std::same_as<typename Ops::Genome>;
    { ops.crossover(g, g, rng) } -> std::same_as<std::pair<typename Ops::Genome, typename Ops::Genome>>;
    { ops.mutate(g, rng) } -> std::same_as<typename Ops::Genome>;
    { ops.text(g) } -> std::convertible_to<std::string>;
};

template <class Genome>
struct Individual {
    Genome genome;
    double fitness = std::numeric_limits<double>::lowest();
};

struct GenerationRecord {
    std::size_t generation = 0;
    double best_fitness = 0;
    double mean_fitness = 0;
    std::string best_genome;
    friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

struct RunHistory {
    std::vector<GenerationRecord> records;
    friend bool operator==(const RunHistory&, const RunHistory&) = default;
};

inline void write_history_csv(const RunHistory& h, std::ostream& out) {
    out << "generation,best_fitness,mean_fitness,best_genome\n";
    for (const auto& r : h.records)
        out << r.generation << ',' << format_real(r.best_fitness) << ',' << format_real(r.mean_fitness) << ','
            << r.best_genome << '\n';
}

enum class Variation { crossover, mutation, reproduction };

struct OperatorTally {
    std::size_t crossover = 0;
    std::size_t mutation = 0;
    std::size_t reproduction = 0;
    std::size_t total() const { return crossover + mutation + reproduction; }
    void add(Variation v) {
        switch (v) {
            case Variation::crossover: ++crossover; break;
            case Variation::mutation: ++mutation; break;
            case Variation::reproduction: ++reproduction; break;
        }
    }
};

inline Variation choose_variation(const GPConfig& cfg, Rng& rng) {
    const double u = unit_double(rng);
    if (u < cfg.crossover_prob) return Variation::crossover;
    if (u < cfg.crossover_prob + cfg.mutation_prob) return Variation::mutation;
    return Variation::reproduction;
}

inline double sanitize_fitness(double f) {
    if (std::isnan(f)) return std::numeric_limits<double>::lowest();
    return std::clamp(f, std::numeric_limits<double>::lowest(), std::numeric_limits<double>::max());
}

/// Linear-rank roulette: after sorting by fitness the worst holds rank 1 and
/// the best rank n; selection probability is proportional to rank. Tied
/// fitnesses share their average rank, so equal individuals are equally likely.
class RankRoulette {
public:
    explicit RankRoulette(std::span<const double> fitness) : cumulative_(fitness.size()) {
        if (fitness.empty()) throw std::invalid_argument("cannot select from an empty population");
        std::vector<std::size_t> order(fitness.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fitness[a] < fitness[b]; });
        std::vector<double> rank(fitness.size());
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && fitness[order[j + 1]] == fitness[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
            for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
            i = j + 1;
        }
        std::partial_sum(rank.begin(), rank.end(), cumulative_.begin());
    }

    std::size_t pick(Rng& rng) const {
        const double u = unit_double(rng) * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                                 static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
    }

private:
    std::vector<double> cumulative_;
};

template <class Genome>
std::vector<double> fitness_of(std::span<const Individual<Genome>> pop) {
    std::vector<double> f;
    f.reserve(pop.size());
    for (const auto& ind : pop) f.push_back(ind.fitness);
    return f;
}

template <class Genome>
const Individual<Genome>& select_parent(std::span<const Individual<Genome>> population, Rng& rng) {
    const auto f = fitness_of(population);
    return population[RankRoulette(f).pick(rng)];
}

/// Indices from best to worst; ties keep population order.
template <class Genome>
std::vector<std::size_t> ranking(std::span<const Individual<Genome>> pop) {
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pop[a].fitness > pop[b].fitness; });
    return order;
}

namespace detail {
template <class Genome, class Fitness>
void evaluate_slots(std::vector<Individual<Genome>>& pop, const std::vector<std::size_t>& slots, Fitness& fitness,
                    std::uint64_t seed, std::uint64_t generation, std::size_t threads) {
    auto eval_one = [&](std::size_t slot) {
        Rng rng = derive_rng({seed, generation, slot, 0xF17});
        pop[slot].fitness = sanitize_fitness(fitness(pop[slot].genome, rng));
    };
    threads = std::max<std::size_t>(1, std::min(threads, slots.size()));
    if (threads == 1) {
        for (auto s : slots) eval_one(s);
        return;
    }
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < threads; ++t)
        workers.emplace_back([&, t] {
            for (std::size_t i = t; i < slots.size(); i += threads) eval_one(slots[i]);
        });
    for (auto& w : workers) w.join();
}
}  // namespace detail

template <GenomeOps Ops, class Fitness>
std::vector<Individual<typename Ops::Genome>> initial_population(const GPConfig& cfg, const Ops& ops,
                                                                 Fitness&& fitness) {
    using G = typename Ops::Genome;
    std::vector<Individual<G>> pop;
    pop.reserve(cfg.population_size);
    for (std::size_t s = 0; s < cfg.population_size; ++s) {
        Rng rng = derive_rng({cfg.seed, 0, s});
        pop.push_back({ops.random(rng), std::numeric_limits<double>::lowest()});
    }
    std::vector<std::size_t> all(pop.size());
    std::iota(all.begin(), all.end(), 0);
    detail::evaluate_slots(pop, all, fitness, cfg.seed, 0, cfg.threads);
    return pop;
}

/// Produces generation `generation` from an evaluated population: the top
/// `elitism` individuals are copied, every other slot gets one offspring made
/// by crossover, mutation or reproduction of rank-roulette parents.
template <GenomeOps Ops, class Fitness>
std::vector<Individual<typename Ops::Genome>> step_generation(std::span<const Individual<typename Ops::Genome>> pop,
                                                              const GPConfig& cfg, const Ops& ops, Fitness&& fitness,
                                                              std::size_t generation,
                                                              OperatorTally* tally = nullptr) {
    using G = typename Ops::Genome;
    const auto order = ranking(pop);
    const std::size_t elites = std::min(cfg.elitism, pop.size());
    std::vector<Individual<G>> next;
    next.reserve(pop.size());
    for (std::size_t i = 0; i < elites; ++i) next.push_back(pop[order[i]]);

    const auto f = fitness_of(pop);
    const RankRoulette roulette(f);
    std::vector<std::size_t> pending;
    for (std::size_t slot = elites; slot < pop.size(); ++slot) {
        Rng rng = derive_rng({cfg.seed, generation, slot});
        const Variation v = choose_variation(cfg, rng);
        if (tally) tally->add(v);
        const auto& p1 = pop[roulette.pick(rng)];
        switch (v) {
            case Variation::crossover: {
                const auto& p2 = pop[roulette.pick(rng)];
                next.push_back({ops.crossover(p1.genome, p2.genome, rng).first, 0.0});
                pending.push_back(slot);
                break;
            }
            case Variation::mutation:
                next.push_back({ops.mutate(p1.genome, rng), 0.0});
                pending.push_back(slot);
                break;
            case Variation::reproduction: next.push_back(p1); break;
        }
    }
    detail::evaluate_slots(next, pending, fitness, cfg.seed, generation, cfg.threads);
    return next;
}

template <class Genome>
struct RunResult {
    Individual<Genome> best;
    RunHistory history;
};

template <GenomeOps Ops, class Fitness>
RunResult<typename Ops::Genome> run_from(std::vector<Individual<typename Ops::Genome>> pop, const GPConfig& cfg,
                                         const Ops& ops, Fitness&& fitness) {
    using G = typename Ops::Genome;
    cfg.validate();
    if (pop.size() != cfg.population_size) throw std::invalid_argument("population size does not match config");
    RunResult<G> result{pop.front(), {}};
    bool have_best = false;
    auto record = [&](std::size_t gen) {
        const auto& best = pop[ranking<G>(pop).front()];
        double mean = 0;
        for (const auto& ind : pop) mean += ind.fitness / static_cast<double>(pop.size());
        result.history.records.push_back({gen, best.fitness, mean, std::string(ops.text(best.genome))});
        if (!have_best || best.fitness > result.best.fitness) {
            result.best = best;
            have_best = true;
        }
    };
    record(0);
    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        pop = step_generation<Ops>(pop, cfg, ops, fitness, gen);
        record(gen);
    }
    return result;
}

/// init -> repeat {select, vary, evaluate} -> best-ever individual.
template <GenomeOps Ops, class Fitness>
RunResult<typename Ops::Genome> run(const GPConfig& cfg, const Ops& ops, Fitness&& fitness) {
    cfg.validate();
    auto pop = initial_population(cfg, ops, fitness);
    return run_from<Ops>(std::move(pop), cfg, ops, fitness);
}

}  // namespace msci
