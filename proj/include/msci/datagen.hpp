#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "msci/random.hpp"
#include "msci/series.hpp"

namespace msci {

/// Uniformly accelerated motion x_t = v t + a t^2 / 2, sampled at t = 0..steps-1.
struct PuckParams {
    double v = 4;
    double a = 6;
    std::size_t steps = 20;
};

inline TimeSeries gen_puck(const PuckParams& p) {
    if (p.steps < 2) throw std::invalid_argument("puck generator needs steps >= 2");
    std::vector<double> values(p.steps);
    for (std::size_t t = 0; t < p.steps; ++t) {
        const auto td = static_cast<double>(t);
        values[t] = p.v * td + 0.5 * p.a * td * td;
    }
    return derive_states(values);
}

struct CoinParams {
    std::size_t steps = 20;
    std::uint64_t seed = 0;
};

/// Random walk x_0 = 0, x_{t+1} = x_t + 1 on coin 0, x_t - 1 on coin 1.
/// `coin` is any callable returning the next coin value (0 or 1).
template <class CoinSource>
TimeSeries gen_coin_with(std::size_t steps, CoinSource&& coin) {
    if (steps < 1) throw std::invalid_argument("coin generator needs steps >= 1");
    std::vector<Sample> samples;
    samples.reserve(steps);
    double x = 0;
    for (std::size_t i = 0; i < steps; ++i) {
        const int c = coin() ? 1 : 0;
        x += c == 0 ? 1.0 : -1.0;
        samples.push_back({c, x});
    }
    return TimeSeries::from_samples(0.0, std::move(samples));
}

inline TimeSeries gen_coin(const CoinParams& p) {
    Rng rng{p.seed};
    return gen_coin_with(p.steps, [&] { return coin_flip(rng); });
}

/// The published 20-step coin realization (x0 = 0). Its seed is unknown, so it
/// ships as data rather than being regenerated.
inline TimeSeries born_fixture() {
    static constexpr std::array<int, 20> q{1, 0, 0, 1, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1, 0};
    static constexpr std::array<double, 20> x{-1, 0, 1, 0, 1, 0, -1, 0, 1, 2, 3, 2, 1, 2, 1, 0, 1, 0, -1, 0};
    std::vector<Sample> samples;
    for (std::size_t i = 0; i < q.size(); ++i) samples.push_back({q[i], x[i]});
    return TimeSeries::from_samples(0.0, std::move(samples));
}

}  // namespace msci
