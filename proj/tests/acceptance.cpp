// Acceptance gate: one [PASS]/[FAIL] line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "msci/cli.hpp"
#include "msci/msci.hpp"

using namespace msci;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Printed puck positions, t = 0..19.
const std::vector<double> table1{0,   7,   20,  39,  64,  95,  132, 175, 224, 279,
                                 340, 407, 480, 559, 644, 735, 832, 935, 1044, 1159};

const TerminalBindings puck_bindings{{"t", IndexK{}},
                                     {"v", NamedConstant{4}},
                                     {"a", NamedConstant{6}},
                                     {"o", NamedConstant{1}},
                                     {"h", NamedConstant{0.5}}};

const TerminalBindings cat_bindings{{"t", IndexK{}},
                                    {"d", SeriesStat{StatKind::d_avg}},
                                    {"av", SeriesStat{StatKind::av}},
                                    {"h", SeriesStat{StatKind::h}},
                                    {"l", SeriesStat{StatKind::l}}};

const char* const eq30 = "(+ S (* (* (// I X) (* (// D Z) T)) T))";

struct Verdict {
    bool pass;
    std::string detail;
};

struct Suite {
    int failures = 0;
    void check(const std::string& id, const std::string& title, const std::function<Verdict()>& body) {
        const auto t0 = Clock::now();
        Verdict v{false, ""};
        try {
            v = body();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failures;
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.2fs", seconds_since(t0));
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << " " << title << " (" << secs << "): " << v.detail
                  << std::endl;
    }
};

std::string fmt(double v) { return format_real(v); }

// Shared by AC-2 and AC-3.
struct NewtonSeed {
    std::uint64_t seed;
    RunResult<ExprTree> xft;
    double seconds;
    double max_distance_error;
    bool pass;
};
std::vector<NewtonSeed> newton_runs;

}  // namespace

int main() {
    Suite gate;
    const auto wall = Clock::now();

    gate.check("AC-1", "Table 1 regeneration", [] {
        const auto t0 = Clock::now();
        std::ostringstream out, err;
        const int code = cli::run({"datagen", "puck", "--v", "4", "--a", "6", "--steps", "20"}, out, err);
        const double secs = seconds_since(t0);
        if (code != 0) return Verdict{false, "exit " + std::to_string(code) + " " + err.str()};
        std::istringstream in(out.str());
        const auto values = read_csv(in).values();
        std::size_t exact = 0;
        for (std::size_t i = 0; i < std::min(values.size(), table1.size()); ++i) exact += values[i] == table1[i];
        const bool ok = values.size() == 20 && exact == 20 && secs < 1.0;
        return Verdict{ok, std::to_string(exact) + "/20 values exact, runtime " + fmt(secs) + "s (limit 1s)"};
    });

    gate.check("AC-2", "Newton rediscovery, 10 seeds", [] {
        const auto series = derive_states(table1);
        const Environment env(puck_bindings, series);
        std::size_t passes = 0;
        double slowest = 0;
        std::string winners;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            GPConfig cfg = GPConfig::for_xft();
            cfg.seed = seed;
            const auto t0 = Clock::now();
            auto r = evolve_xft(cfg, series, puck_bindings, {ExprOp::add, ExprOp::sub, ExprOp::mul, ExprOp::div});
            const double secs = seconds_since(t0);
            double err = 0;
            for (int t = 1; t <= 19; ++t)
                err = std::max(err, std::abs(distance(r.best.genome, t, env) - (4.0 + 6.0 * t - 0.5 * 6.0)));
            const bool ok = -r.best.fitness < 1e-6 && err <= 1e-9;
            passes += ok;
            if (ok) winners += (winners.empty() ? "" : ",") + std::to_string(seed);
            slowest = std::max(slowest, secs);
            newton_runs.push_back({seed, std::move(r), secs, err, ok});
        }
        const bool ok = passes >= 1 && slowest < 60.0;
        return Verdict{ok, std::to_string(passes) + "/10 seeds with SSE < 1e-6 and d'(t) = 6t+1 (need 1; seeds " +
                               (winners.empty() ? "none" : winners) + "), slowest seed " + fmt(slowest) +
                               "s (limit 60s)"};
    });

    gate.check("AC-3", "Newton reconstruction and forecast", [] {
        const NewtonSeed* win = nullptr;
        for (const auto& r : newton_runs)
            if (r.pass) {
                win = &r;
                break;
            }
        if (!win) return Verdict{false, "no winning theory from AC-2"};
        const auto series = derive_states(table1);
        GPConfig qcfg = GPConfig::for_qdt();
        qcfg.seed = win->seed;
        const auto q = evolve_qdt(qcfg, series);
        const Theory theory{win->xft.best.genome, q.best.genome, puck_bindings, Normalization::squared_modulus, {}};
        const double acc = accuracy(reconstruct(theory, series), series, 1e-9);
        Rng rng{win->seed};
        const auto fc = predict(theory, series, 1, rng);
        const double oracle = 4.0 * 20 + 0.5 * 6.0 * 20 * 20;
        const auto& step = fc.steps.front();
        const bool ok = acc == 1.0 && step.k == 20 && std::abs(step.x_pred - oracle) <= 1e-9;
        return Verdict{ok, "seed " + std::to_string(win->seed) + ": accuracy " + fmt(acc) + " (need 1), x'" +
                               std::to_string(step.k) + " = " + fmt(step.x_pred) + " (oracle " + fmt(oracle) +
                               "), q' = " + std::to_string(step.q_pred)};
    });

    gate.check("AC-4", "cat xFT, 10 seeds", [] {
        const auto series = born_fixture();
        const Environment env(cat_bindings, series);
        std::size_t passes = 0;
        double slowest = 0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            GPConfig cfg = GPConfig::for_xft();
            cfg.seed = seed;
            const auto t0 = Clock::now();
            const auto r = evolve_xft(cfg, series, cat_bindings);
            slowest = std::max(slowest, seconds_since(t0));
            double err = 0;
            for (int t = 1; t <= 20; ++t) err = std::max(err, std::abs(distance(r.best.genome, t, env) - 1.0));
            passes += -r.best.fitness < 1e-6 && err <= 1e-9;
        }
        const bool ok = passes >= 8 && slowest < 30.0;
        return Verdict{ok, std::to_string(passes) + "/10 seeds with fitness 0 and d' = 1 (need 8), slowest seed " +
                               fmt(slowest) + "s (limit 30s)"};
    });

    gate.check("AC-5", "strategy oracle", [] {
        const auto s1 = action_probabilities(resolve(parse_gate_tree("(+ Y I)"), {}));
        const auto tree = parse_gate_tree(eq30);
        const auto strategies = enumerate_strategies(tree);
        const auto xd = action_probabilities(resolve(tree, {1, 0}));
        const auto iz = action_probabilities(resolve(tree, {0, 1}));
        const auto ii = action_probabilities(resolve(tree, {0, 0}));
        const auto xz = action_probabilities(resolve(tree, {1, 1}));
        auto near = [](const ActionProbabilities& p, double p1, double p2) {
            return std::abs(p.p1 - p1) <= 1e-9 && std::abs(p.p2 - p2) <= 1e-9;
        };
        const bool ok = near(s1, 1, 0) && strategies.size() == 4 && near(xd, 0, 1) && near(iz, 1, 0) &&
                        near(ii, 0.5, 0.5) && near(xz, 0.5, 0.5);
        return Verdict{ok, "(Y+I) -> (" + fmt(s1.p1) + ", " + fmt(s1.p2) + "); " + std::to_string(strategies.size()) +
                               " strategies; (X,D) -> (" + fmt(xd.p1) + ", " + fmt(xd.p2) + "); (I,Z) -> (" +
                               fmt(iz.p1) + ", " + fmt(iz.p2) + "); (I,D) and (X,Z) -> 0.5/0.5"};
    });

    gate.check("AC-6", "eigen kernel properties", [] {
        Rng rng{606};
        GateTreeConfig cfg;
        cfg.init_depth_min = 1;
        cfg.init_depth_max = 6;
        double worst_res = 0, worst_tr = 0, worst_det = 0, worst_sum = 0;
        for (int i = 0; i < 1000; ++i) {
            const auto tree = random_gate_tree(cfg, rng);
            ChoiceVector bits(tree.choice_count());
            for (auto& b : bits) b = coin_flip(rng);
            const auto m = resolve(tree, bits);
            const auto e = eigen2(m);
            for (const auto& p : {e.first, e.second}) {
                const auto mv = m * p.vector;
                worst_res = std::max(worst_res, std::hypot(std::abs(mv[0] - p.lambda * p.vector[0]),
                                                           std::abs(mv[1] - p.lambda * p.vector[1])));
            }
            worst_tr = std::max(worst_tr, std::abs(e.first.lambda + e.second.lambda - m.trace()));
            worst_det = std::max(worst_det, std::abs(e.first.lambda * e.second.lambda - m.det()));
            const auto p = action_probabilities(m);
            worst_sum = std::max(worst_sum, std::abs(p.p1 + p.p2 - 1.0));
        }
        const bool ok = worst_res <= 1e-8 && worst_tr <= 1e-8 && worst_det <= 1e-8 && worst_sum <= 1e-12;
        return Verdict{ok, "1000 matrices: max residual " + fmt(worst_res) + ", trace err " + fmt(worst_tr) +
                               ", det err " + fmt(worst_det) + ", |p1+p2-1| " + fmt(worst_sum)};
    });

    gate.check("AC-7", "qDT fitness oracles", [] {
        const auto yi = parse_gate_tree("(+ Y I)");
        const auto t1 = derive_states(table1);
        const auto t2 = born_fixture();
        double telescoped = 0;
        for (std::size_t k = 1; k < table1.size(); ++k) telescoped += std::abs(table1[k] - table1[k - 1]);
        int balance = 0;
        for (const auto& s : t2.samples()) balance += s.q == 0 ? 1 : -1;
        const double f1 = qdt_fitness_exact(yi, t1);
        const double f2 = qdt_fitness_exact(yi, t2);

        Rng rng{707};
        GateTreeConfig cfg;
        cfg.init_depth_min = 2;
        cfg.init_depth_max = 5;
        int agree = 0;
        double worst_z = 0;
        for (int i = 0; i < 50; ++i) {
            GateTree tree = random_gate_tree(cfg, rng);
            while (tree.choice_count() > 4) tree = random_gate_tree(cfg, rng);
            std::vector<double> v{0};
            const std::size_t n = 1 + uniform_index(rng, 8);
            for (std::size_t k = 0; k < n; ++k) v.push_back(v.back() + std::round((unit_double(rng) - 0.5) * 8));
            const auto s = derive_states(v);
            const double exact = qdt_fitness_exact(tree, s);
            const auto mc = qdt_fitness_monte_carlo(tree, s, rng, {default_enumeration_cap, 4096});
            const double diff = std::abs(mc.value - exact);
            if (diff <= 3 * mc.standard_error + 1e-9) ++agree;
            if (mc.standard_error > 0) worst_z = std::max(worst_z, diff / mc.standard_error);
        }
        const bool ok = std::abs(f1 - telescoped) <= 1e-9 && telescoped == 1159 && std::abs(f2 - balance) <= 1e-9 &&
                        balance == 0 && agree == 50;
        return Verdict{ok, "Table 1 " + fmt(f1) + " (oracle " + fmt(telescoped) + "), Table 2 " + fmt(f2) +
                               " (oracle " + std::to_string(balance) + "), MC within 3 SE on " +
                               std::to_string(agree) + "/50 (max z " + fmt(worst_z) + ")"};
    });

    gate.check("AC-8", "Born-rule forecast frequency", [] {
        const auto series = born_fixture();
        const Theory theory{parse_expr("(+ d t)"), parse_gate_tree("H"), cat_bindings, Normalization::squared_modulus, {}};
        const auto s = enumerate_strategies(theory.qdt);
        Rng rng{808};
        int zeros = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) zeros += predict(theory, series, 1, rng).steps.front().q_pred == 0;
        const double f = zeros / double(n);
        const bool ok = s.size() == 1 && std::abs(s[0].p1 - 0.5) <= 1e-12 && std::abs(f - 0.5) <= 0.02;
        return Verdict{ok, "strategy p1 = " + fmt(s[0].p1) + ", state-0 frequency " + fmt(f) + " over 10^4 (0.5 +- 0.02)"};
    });

    gate.check("AC-9", "engine properties", [] {
        const auto series = derive_states(table1);
        const XftObjective objective{&series, Environment(puck_bindings, series)};
        int monotone = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            GPConfig cfg;
            cfg.population_size = 40;
            cfg.generations = 15;
            cfg.seed = 900 + seed;
            const auto r = run(cfg, make_xft_ops(cfg, puck_bindings.names()), objective);
            bool ok = true;
            for (std::size_t g = 1; g < r.history.records.size(); ++g)
                ok = ok && r.history.records[g].best_fitness >= r.history.records[g - 1].best_fitness;
            monotone += ok;
        }
        GPConfig cfg;
        cfg.population_size = 60;
        cfg.generations = 10;
        cfg.seed = 42;
        const auto ops = make_xft_ops(cfg, puck_bindings.names());
        const bool same = run(cfg, ops, objective).history == run(cfg, ops, objective).history;

        cfg.population_size = 501;
        auto pop = initial_population(cfg, ops, objective);
        OperatorTally tally;
        for (std::size_t g = 1; g <= 20; ++g) pop = step_generation<XftOps>(pop, cfg, ops, objective, g, &tally);
        const double n = static_cast<double>(tally.total());
        const double c = tally.crossover / n, m = tally.mutation / n, r = tally.reproduction / n;
        const bool mix = tally.total() == 10000 && std::abs(c - 0.70) <= 0.02 && std::abs(m - 0.05) <= 0.02 &&
                         std::abs(r - 0.25) <= 0.02;
        return Verdict{monotone == 20 && same && mix,
                       std::to_string(monotone) + "/20 runs monotone, determinism " + (same ? "ok" : "broken") +
                           ", mix over " + std::to_string(tally.total()) + " offspring " + fmt(c) + "/" + fmt(m) +
                           "/" + fmt(r)};
    });

    gate.check("AC-10", "end-to-end presets", [] {
        const auto dir = std::filesystem::temp_directory_path() / "msci_acceptance";
        std::filesystem::remove_all(dir);
        const auto t0 = Clock::now();
        std::ostringstream log, err;
        const int newton = cli::run({"run", "newton", "--seed", "1..10", "--out", (dir / "newton").string()}, log, err);
        const int cat = cli::run({"run", "cat", "--seed", "1..10", "--out", (dir / "cat").string()}, log, err);
        const double secs = seconds_since(t0);
        std::string summary;
        std::istringstream lines(log.str());
        for (std::string line; std::getline(lines, line);)
            if (line.find("seeds passed") != std::string::npos) summary += (summary.empty() ? "" : "; ") + line;
        const bool ok = newton == 0 && cat == 0 && secs < 600;
        return Verdict{ok, summary + "; exit codes " + std::to_string(newton) + "/" + std::to_string(cat) + ", total " +
                               fmt(secs) + "s (limit 600s)" + (err.str().empty() ? "" : "; " + err.str())};
    });

    std::cout << (gate.failures == 0 ? "ALL CRITERIA PASS" : std::to_string(gate.failures) + " CRITERIA FAILED")
              << " in " << format_real(std::round(seconds_since(wall) * 100) / 100) << "s" << std::endl;
    return gate.failures == 0 ? 0 : 1;
}
