#pragma once

// Fitness functions binding the genomes to observed data.
//
// xFT: negative squared error between model and observed distances.
// qDT: the expected value of betting on each observed state, where a correct
//      bet wins the observed distance d_k and a wrong bet loses it.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "msci/qmat.hpp"
#include "msci/random.hpp"
#include "msci/series.hpp"
#include "msci/xft.hpp"

namespace msci {

/// Per-step expectation: state 0 pays (p1 - p2) d, state 1 pays (p2 - p1) d.
constexpr double expected_value_step(double p1, double p2, int state, double d) noexcept {
    return state == 0 ? (p1 - p2) * d : (p2 - p1) * d;
}

struct BetOutcome {
    std::size_t k = 0;
    int state = 0;
    double p1 = 0.5, p2 = 0.5;
    double d = 0;
    double ev = 0;
};

inline std::vector<BetOutcome> bet_outcomes(double p1, double p2, const TimeSeries& series) {
    std::vector<BetOutcome> out;
    const auto d = distances(series);
    for (std::size_t k = 1; k <= series.size(); ++k) {
        const int q = series.state(k);
        out.push_back({k, q, p1, p2, d[k - 1], expected_value_step(p1, p2, q, d[k - 1])});
    }
    return out;
}

/// sum_k EV_k for one fixed strategy.
inline double strategy_value(double p1, double p2, const TimeSeries& series) {
    double total = 0;
    double prev = series.x0();
    for (const auto& s : series.samples()) {
        total += expected_value_step(p1, p2, s.q, std::abs(s.x - prev));
        prev = s.x;
    }
    return total;
}

enum class FitnessMode { exact, monte_carlo };

/// What a Monte Carlo draw scores: realized +-d payoffs from sampled actions,
/// or the drawn strategy's expected value (strategy sampling only).
enum class McPayoff { sampled, expected };

struct QdtFitnessOptions {
    std::size_t enumeration_cap = default_enumeration_cap;
    std::size_t mc_draws = 4096;
    Normalization normalization = Normalization::squared_modulus;
    McPayoff payoff = McPayoff::sampled;
};

struct FitnessEstimate {
    double value = 0;
    double standard_error = 0;  // 0 in exact mode
};

/// Exact: uniform average of strategy_value over all 2^c strategies.
inline double qdt_fitness_exact(const GateTree& tree, const TimeSeries& series, const QdtFitnessOptions& opt = {}) {
    const auto strategies = enumerate_strategies(tree, opt.enumeration_cap, opt.normalization);
    double sum = 0;
    for (const auto& s : strategies) sum += strategy_value(s.p1, s.p2, series);
    return sum / static_cast<double>(strategies.size());
}

/// Monte Carlo: each draw picks a uniform strategy, then samples an action per
/// step and collects the realized payoff (+d on a correct bet, -d otherwise).
/// With McPayoff::expected the draw scores strategy_value instead.
inline FitnessEstimate qdt_fitness_monte_carlo(const GateTree& tree, const TimeSeries& series, Rng& rng,
                                               const QdtFitnessOptions& opt = {}) {
    if (opt.mc_draws == 0) throw std::invalid_argument("mc_draws must be positive");
    const auto d = distances(series);
    double mean = 0, m2 = 0;
    for (std::size_t n = 1; n <= opt.mc_draws; ++n) {
        const auto s = draw_strategy(tree, rng, opt.normalization);
        double payoff = 0;
        if (opt.payoff == McPayoff::expected) payoff = strategy_value(s.p1, s.p2, series);
        else for (std::size_t k = 1; k <= series.size(); ++k) {
            const int bet_state = sample_action(s.p1, rng) == 1 ? 0 : 1;
            payoff += bet_state == series.state(k) ? d[k - 1] : -d[k - 1];
        }
        const double delta = payoff - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (payoff - mean);
    }
    const double n = static_cast<double>(opt.mc_draws);
    const double var = opt.mc_draws > 1 ? m2 / (n - 1) : 0.0;
    return {mean, std::sqrt(var / n)};
}

inline double qdt_fitness(const GateTree& tree, const TimeSeries& series, FitnessMode mode, Rng& rng,
                          const QdtFitnessOptions& opt = {}) {
    return mode == FitnessMode::exact ? qdt_fitness_exact(tree, series, opt)
                                      : qdt_fitness_monte_carlo(tree, series, rng, opt).value;
}

/// Exact under the enumeration cap, otherwise the mean expected value over
/// sampled strategies. This is what the evolution engine uses.
inline double qdt_fitness_auto(const GateTree& tree, const TimeSeries& series, Rng& rng,
                               QdtFitnessOptions opt = {}) {
    if (tree.choice_count() <= opt.enumeration_cap) return qdt_fitness_exact(tree, series, opt);
    opt.payoff = McPayoff::expected;
    return qdt_fitness_monte_carlo(tree, series, rng, opt).value;
}

inline double xft_objective(const ExprTree& tree, const TimeSeries& series, const TerminalBindings& bindings) {
    return xft_fitness(tree, series, bindings);
}

}  // namespace msci
