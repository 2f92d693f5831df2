#pragma once

// Adapters plugging the two tree genomes and their objectives into the engine.

#include "msci/evolve.hpp"
#include "msci/objectives.hpp"
#include "msci/qmat.hpp"
#include "msci/xft.hpp"

namespace msci {

struct XftOps {
    using Genome = ExprTree;
    XftConfig config;

    ExprTree random(Rng& rng) const { return random_tree(config, rng); }
    std::pair<ExprTree, ExprTree> crossover(const ExprTree& a, const ExprTree& b, Rng& rng) const {
        return msci::crossover(a, b, config, rng);
    }
    ExprTree mutate(const ExprTree& t, Rng& rng) const { return msci::mutate(t, config, rng); }
    std::string text(const ExprTree& t) const { return to_text(t); }
};

struct GateTreeOps {
    using Genome = GateTree;
    GateTreeConfig config;

    GateTree random(Rng& rng) const { return random_gate_tree(config, rng); }
    std::pair<GateTree, GateTree> crossover(const GateTree& a, const GateTree& b, Rng& rng) const {
        return msci::crossover(a, b, config, rng);
    }
    GateTree mutate(const GateTree& t, Rng& rng) const { return msci::mutate(t, config, rng); }
    std::string text(const GateTree& t) const { return to_text(t); }
};

inline XftOps make_xft_ops(const GPConfig& gp, std::vector<std::string> terminals,
                           std::vector<ExprOp> functions = {ExprOp::add, ExprOp::sub, ExprOp::mul, ExprOp::div}) {
    XftOps ops;
    ops.config.functions = std::move(functions);
    ops.config.terminals = std::move(terminals);
    ops.config.init_depth_min = gp.init_depth_min;
    ops.config.init_depth_max = gp.init_depth_max;
    ops.config.max_depth = gp.max_depth;
    return ops;
}

inline GateTreeOps make_gate_ops(const GPConfig& gp) {
    GateTreeOps ops;
    ops.config.init_depth_min = gp.init_depth_min;
    ops.config.init_depth_max = gp.init_depth_max;
    ops.config.max_depth = gp.max_depth;
    return ops;
}

/// xFT fitness over a fixed series, with the environment resolved once.
struct XftObjective {
    const TimeSeries* series;
    Environment env;
    double operator()(const ExprTree& tree, Rng&) const { return xft_fitness(tree, *series, env); }
};

struct QdtObjective {
    const TimeSeries* series;
    QdtFitnessOptions options;
    double operator()(const GateTree& tree, Rng& rng) const { return qdt_fitness_auto(tree, *series, rng, options); }
};

inline RunResult<ExprTree> evolve_xft(const GPConfig& gp, const TimeSeries& series, const TerminalBindings& bindings,
                                      std::vector<ExprOp> functions = {ExprOp::add, ExprOp::sub, ExprOp::mul,
                                                                       ExprOp::div}) {
    if (bindings.empty()) throw std::invalid_argument("xFT evolution needs at least one terminal binding");
    const auto ops = make_xft_ops(gp, bindings.names(), std::move(functions));
    XftObjective objective{&series, Environment(bindings, series)};
    return run(gp, ops, objective);
}

inline RunResult<GateTree> evolve_qdt(const GPConfig& gp, const TimeSeries& series,
                                      Normalization norm = Normalization::squared_modulus) {
    const auto ops = make_gate_ops(gp);
    QdtObjective objective{&series, {gp.enumeration_cap, gp.mc_draws, norm}};
    return run(gp, ops, objective);
}

}  // namespace msci
