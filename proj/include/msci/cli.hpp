#pragma once

// Command-line front end. Every command is a function of (args, out, err) so it
// can be driven from tests without a process boundary.
//
// Exit codes: 0 success / PASS, 1 usage, 2 I/O or validation, 3 acceptance FAIL.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msci/config.hpp"
#include "msci/datagen.hpp"
#include "msci/genomes.hpp"
#include "msci/presets.hpp"
#include "msci/report.hpp"
#include "msci/theory.hpp"

namespace msci::cli {

enum ExitCode : int { ok = 0, usage = 1, io_error = 2, acceptance_fail = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "7", "1..10" or "1,4,9".
inline std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
    std::vector<std::uint64_t> seeds;
    for (auto part : split(text, ',')) {
        part = trim(part);
        auto dots = part.find("..");
        if (dots == std::string_view::npos) {
            auto s = parse_u64(part);
            if (!s) throw UsageError("bad seed '" + std::string(part) + "'");
            seeds.push_back(*s);
            continue;
        }
        auto a = parse_u64(part.substr(0, dots));
        auto b = parse_u64(part.substr(dots + 2));
        if (!a || !b || *b < *a) throw UsageError("bad seed range '" + std::string(part) + "'");
        for (auto s = *a; s <= *b; ++s) seeds.push_back(s);
    }
    if (seeds.empty()) throw UsageError("no seeds given");
    return seeds;
}

namespace detail {

inline void emit_series(const TimeSeries& s, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        write_csv(s, out);
    } else {
        write_csv(s, out_path);
        out << "wrote " << s.size() << " rows to " << out_path << '\n';
    }
}

inline void print_strategy_table(const GateTree& tree, const RunConfig& cfg, std::ostream& out,
                                 const std::filesystem::path* csv_path) {
    if (tree.choice_count() > cfg.gp.enumeration_cap) {
        out << "strategies: " << tree.choice_count() << " choice nodes, over the enumeration cap\n";
        return;
    }
    const auto strategies = enumerate_strategies(tree, cfg.gp.enumeration_cap, cfg.normalization);
    std::ofstream csv;
    if (csv_path) {
        csv.open(*csv_path);
        csv << "strategy,choices,p1,p2\n";
    }
    out << "strategy  choices  p1        p2\n";
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const auto& s = strategies[i];
        const std::string bits = s.choices.empty() ? "-" : choice_text(s.choices);
        char line[128];
        std::snprintf(line, sizeof line, "S%-7zu  %-7s  %.6f  %.6f\n", i + 1, bits.c_str(), s.p1, s.p2);
        out << line;
        if (csv_path)
            csv << 'S' << i + 1 << ',' << choice_text(s.choices) << ',' << format_real(s.p1) << ','
                << format_real(s.p2) << '\n';
    }
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"msci: evolve state/value theories from time series", "msci"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // datagen ---------------------------------------------------------------
    auto* datagen = app.add_subcommand("datagen", "generate a series CSV");
    datagen->require_subcommand(1);
    PuckParams puck;
    std::string puck_out;
    auto* dg_puck = datagen->add_subcommand("puck", "x = v t + a t^2 / 2");
    dg_puck->add_option("--v", puck.v, "initial velocity")->capture_default_str();
    dg_puck->add_option("--a", puck.a, "acceleration")->capture_default_str();
    dg_puck->add_option("--steps", puck.steps, "number of values including t = 0")
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()))
        ->capture_default_str();
    dg_puck->add_option("--out", puck_out, "output CSV (stdout when omitted)");

    CoinParams coin;
    std::string coin_out;
    auto* dg_coin = datagen->add_subcommand("coin", "fair-coin +1/-1 walk");
    dg_coin->add_option("--steps", coin.steps, "number of coin throws")
        ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))
        ->capture_default_str();
    dg_coin->add_option("--seed", coin.seed, "PRNG seed")->capture_default_str();
    dg_coin->add_option("--out", coin_out, "output CSV (stdout when omitted)");

    // evolve ----------------------------------------------------------------
    auto* evolve = app.add_subcommand("evolve", "evolve one tree against a series");
    evolve->require_subcommand(1);
    std::string ev_data, ev_config, ev_out = "evolve_out";
    std::optional<std::uint64_t> ev_seed;
    std::optional<std::size_t> ev_threads;
    auto add_evolve_flags = [&](CLI::App* c) {
        c->add_option("--data", ev_data, "series CSV")->required();
        c->add_option("--config", ev_config, "key = value config file");
        c->add_option("--seed", ev_seed, "overrides the config seed");
        c->add_option("--threads", ev_threads, "fitness worker threads");
        c->add_option("--out", ev_out, "output directory")->capture_default_str();
    };
    auto* ev_xft = evolve->add_subcommand("xft", "observation function tree");
    auto* ev_qdt = evolve->add_subcommand("qdt", "state decision tree");
    add_evolve_flags(ev_xft);
    add_evolve_flags(ev_qdt);

    // run -------------------------------------------------------------------
    auto* runp = app.add_subcommand("run", "run an experiment preset (newton | cat)");
    std::string preset_name, preset_seeds = "1..10", preset_out;
    runp->add_option("preset", preset_name, "newton | cat")->required();
    runp->add_option("--seed", preset_seeds, "seed, list or range a..b")->capture_default_str();
    runp->add_option("--out", preset_out, "output directory (default runs/<preset>)");

    // predict ---------------------------------------------------------------
    auto* pred = app.add_subcommand("predict", "forecast beyond the series");
    std::string pr_theory, pr_data, pr_out;
    std::size_t pr_horizon = 1;
    std::uint64_t pr_seed = 1;
    pred->add_option("--theory", pr_theory, "theory bundle directory")->required();
    pred->add_option("--data", pr_data, "series CSV")->required();
    pred->add_option("--horizon", pr_horizon, "steps to forecast")->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()))->capture_default_str();
    pred->add_option("--seed", pr_seed, "PRNG seed")->capture_default_str();
    pred->add_option("--out", pr_out, "forecast CSV (stdout when omitted)");

    // report ----------------------------------------------------------------
    auto* rep = app.add_subcommand("report", "reconstruction CSV and SVG plot");
    std::string rp_theory, rp_data, rp_out, rp_mode = "teacher_forced";
    std::uint64_t rp_seed = 1;
    double rp_tol = 1e-9;
    rep->add_option("--theory", rp_theory, "theory bundle directory")->required();
    rep->add_option("--data", rp_data, "series CSV")->required();
    rep->add_option("--out", rp_out, "output directory")->required();
    rep->add_option("--mode", rp_mode, "teacher_forced | free_run")
        ->check(CLI::IsMember({"teacher_forced", "free_run"}))
        ->capture_default_str();
    rep->add_option("--seed", rp_seed, "PRNG seed for free_run")->capture_default_str();
    rep->add_option("--tolerance", rp_tol, "accuracy tolerance")->capture_default_str();

    std::vector<std::string> argv_store{"msci"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }

    try {
        if (*dg_puck) {
            detail::emit_series(gen_puck(puck), puck_out, out);
            return ok;
        }
        if (*dg_coin) {
            detail::emit_series(gen_coin(coin), coin_out, out);
            return ok;
        }
        if (*ev_xft || *ev_qdt) {
            const bool is_xft = static_cast<bool>(*ev_xft);
            const auto data = read_csv(ev_data);
            RunConfig cfg;
            cfg.gp = is_xft ? GPConfig::for_xft() : GPConfig::for_qdt();
            if (!ev_config.empty()) cfg = load_config(ev_config, cfg);
            if (ev_seed) cfg.gp.seed = *ev_seed;
            if (ev_threads) cfg.gp.threads = *ev_threads;
            cfg.gp.validate();
            const std::filesystem::path dir(ev_out);
            std::filesystem::create_directories(dir);
            {
                std::ofstream eff(dir / "effective.cfg");
                write_key_values(dump_config(cfg), eff);
            }
            std::string best_text;
            double best_fitness = 0;
            RunHistory history;
            if (is_xft) {
                if (cfg.bindings.empty()) throw ConfigError("xft evolution needs terminal.<name> bindings in --config");
                auto r = evolve_xft(cfg.gp, data, cfg.bindings, cfg.functions);
                best_text = to_text(r.best.genome);
                best_fitness = r.best.fitness;
                history = std::move(r.history);
            } else {
                auto r = evolve_qdt(cfg.gp, data, cfg.normalization);
                best_text = to_text(r.best.genome);
                best_fitness = r.best.fitness;
                history = std::move(r.history);
                out << "best qdt: " << best_text << '\n';
                const auto csv = dir / "strategies.csv";
                detail::print_strategy_table(r.best.genome, cfg, out, &csv);
            }
            std::ofstream(dir / "best.sexp") << best_text << '\n';
            std::ofstream(dir / "fitness.txt") << format_real(best_fitness) << '\n';
            std::ofstream hist(dir / "history.csv");
            write_history_csv(history, hist);
            if (is_xft) out << "best xft: " << best_text << '\n';
            out << "best fitness: " << format_real(best_fitness) << '\n';
            return ok;
        }
        if (*runp) {
            auto preset = find_preset(preset_name);
            if (!preset) {
                err << "unknown preset '" << preset_name << "' (expected newton or cat)\n";
                return usage;
            }
            const auto seeds = parse_seed_list(preset_seeds);
            const std::filesystem::path dir = preset_out.empty() ? std::filesystem::path("runs") / preset->name
                                                                 : std::filesystem::path(preset_out);
            const auto outcome = run_preset(*preset, seeds, dir, out);
            return outcome.passed ? ok : acceptance_fail;
        }
        if (*pred) {
            const auto theory = load(pr_theory);
            const auto data = read_csv(pr_data);
            Rng rng{pr_seed};
            const auto fc = predict(theory, data, pr_horizon, rng);
            if (pr_out.empty()) {
                write_forecast_csv(fc, out);
            } else {
                std::ofstream f(pr_out);
                if (!f) throw std::runtime_error("cannot write " + pr_out);
                write_forecast_csv(fc, f);
                out << "wrote " << fc.steps.size() << " forecast rows to " << pr_out << '\n';
            }
            return ok;
        }
        if (*rep) {
            const auto theory = load(rp_theory);
            const auto data = read_csv(rp_data);
            Rng rng{rp_seed};
            const auto mode =
                rp_mode == "free_run" ? ReconstructionMode::free_run : ReconstructionMode::teacher_forced;
            const auto rebuilt = reconstruct(theory, data, mode, &rng);
            const std::filesystem::path dir(rp_out);
            std::filesystem::create_directories(dir);
            std::ofstream csv(dir / "reconstruction.csv");
            write_reconstruction_csv(data, rebuilt, csv);
            std::ofstream svg(dir / "plot.svg");
            write_reconstruction_svg(data, rebuilt, svg);
            out << "accuracy: " << format_real(accuracy(rebuilt, data, rp_tol)) << '\n';
            return ok;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return io_error;
    }
    err << app.help();
    return usage;
}

}  // namespace msci::cli
