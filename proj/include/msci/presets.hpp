#pragma once

// End-to-end experiments: generate (or load) data, evolve both trees, bundle a
// theory, reconstruct, forecast, and judge the result against fixed thresholds.
//
//   newton: puck under constant acceleration (v = 4, a = 6, 20 samples);
//           terminals t, v, a, o = 1, h = 0.5.
//   cat:    the shipped 20-step fair-coin walk; terminals t, d, av, h, l.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "msci/datagen.hpp"
#include "msci/genomes.hpp"
#include "msci/report.hpp"
#include "msci/theory.hpp"

namespace msci {

struct PresetThresholds {
    double max_sse = 1e-6;              // xFT fitness must be >= -max_sse
    double distance_tolerance = 1e-9;   // |d'_t - expected_distance(t)|
    double accuracy_tolerance = 1e-9;   // per-sample value tolerance
    double min_accuracy = 1.0;          // teacher-forced
    bool require_forecast_match = false;
    double forecast_tolerance = 1e-9;
    double min_passing_fraction = 0.1;  // of the seeds run; at least one seed
};

struct ExperimentPreset {
    std::string name;
    std::function<TimeSeries()> data;
    TerminalBindings bindings;
    RunConfig xft_config;
    RunConfig qdt_config;
    /// Ground-truth distance at index t, from the data generator.
    std::function<double(double)> expected_distance;
    /// Ground-truth value at index k beyond the series (forecast oracle).
    std::function<double(std::size_t)> expected_value;
    PresetThresholds thresholds;

    std::size_t required_passes(std::size_t seeds) const {
        const auto need = static_cast<std::size_t>(std::ceil(thresholds.min_passing_fraction * static_cast<double>(seeds) - 1e-9));
        return std::max<std::size_t>(1, need);
    }
};

inline ExperimentPreset newton_preset() {
    const PuckParams puck{4, 6, 20};
    ExperimentPreset p;
    p.name = "newton";
    p.data = [puck] { return gen_puck(puck); };
    p.bindings = {{"t", IndexK{}},
                  {"v", NamedConstant{puck.v}},
                  {"a", NamedConstant{puck.a}},
                  {"o", NamedConstant{1.0}},
                  {"h", NamedConstant{0.5}}};
    p.xft_config.gp = GPConfig::for_xft();
    p.xft_config.bindings = p.bindings;
    p.qdt_config.gp = GPConfig::for_qdt();
    p.expected_distance = [puck](double t) { return puck.v + puck.a * t - 0.5 * puck.a; };
    p.expected_value = [puck](std::size_t k) {
        const auto t = static_cast<double>(k);
        return puck.v * t + 0.5 * puck.a * t * t;
    };
    p.thresholds.require_forecast_match = true;
    p.thresholds.min_passing_fraction = 0.1;
    return p;
}

inline ExperimentPreset cat_preset() {
    ExperimentPreset p;
    p.name = "cat";
    p.data = [] { return born_fixture(); };
    p.bindings = {{"t", IndexK{}},
                  {"d", SeriesStat{StatKind::d_avg}},
                  {"av", SeriesStat{StatKind::av}},
                  {"h", SeriesStat{StatKind::h}},
                  {"l", SeriesStat{StatKind::l}}};
    p.xft_config.gp = GPConfig::for_xft();
    p.xft_config.bindings = p.bindings;
    p.qdt_config.gp = GPConfig::for_qdt();
    p.expected_distance = [](double) { return 1.0; };
    p.thresholds.require_forecast_match = false;
    p.thresholds.min_passing_fraction = 0.8;
    return p;
}

inline std::optional<ExperimentPreset> find_preset(std::string_view name) {
    if (name == "newton") return newton_preset();
    if (name == "cat") return cat_preset();
    return std::nullopt;
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    Theory theory;
    double xft_fitness = 0;
    double qdt_fitness = 0;
    double max_distance_error = 0;
    double accuracy = 0;
    Forecast forecast{};  // horizon 1
    bool passed = false;
    std::vector<std::string> failures{};
};

struct PresetOutcome {
    std::string name;
    std::vector<SeedOutcome> seeds;
    std::size_t passes = 0;
    std::size_t required = 0;
    bool passed = false;
};

/// Runs one seed of a preset. Nothing is written to disk.
inline SeedOutcome run_preset_seed(const ExperimentPreset& preset, const TimeSeries& data, std::uint64_t seed) {
    auto xcfg = preset.xft_config.gp;
    xcfg.seed = seed;
    auto qcfg = preset.qdt_config.gp;
    qcfg.seed = seed;

    auto xres = evolve_xft(xcfg, data, preset.bindings, preset.xft_config.functions);
    auto qres = evolve_qdt(qcfg, data, preset.qdt_config.normalization);

    RunConfig x_eff = preset.xft_config;
    x_eff.gp = xcfg;
    KeyValues prov{{"preset", preset.name}, {"seed", std::to_string(seed)}};
    for (auto [k, v] : dump_config(x_eff)) prov.emplace_back("xft." + k, v);
    RunConfig q_eff = preset.qdt_config;
    q_eff.gp = qcfg;
    for (auto [k, v] : dump_config(q_eff)) prov.emplace_back("qdt." + k, v);

    SeedOutcome o{seed, Theory{xres.best.genome, qres.best.genome, preset.bindings, preset.qdt_config.normalization, prov}};
    o.xft_fitness = xres.best.fitness;
    o.qdt_fitness = qres.best.fitness;

    const auto& th = preset.thresholds;
    if (!(o.xft_fitness >= -th.max_sse)) o.failures.push_back("xFT fitness " + format_real(o.xft_fitness));

    const Environment env(preset.bindings, data);
    for (std::size_t t = 1; t <= data.size(); ++t) {
        const double td = static_cast<double>(t);
        o.max_distance_error =
            std::max(o.max_distance_error, std::abs(distance(o.theory.xft, td, env) - preset.expected_distance(td)));
    }
    if (!(o.max_distance_error <= th.distance_tolerance))
        o.failures.push_back("distance error " + format_real(o.max_distance_error));

    o.accuracy = accuracy(reconstruct(o.theory, data), data, th.accuracy_tolerance);
    if (o.accuracy < th.min_accuracy) o.failures.push_back("reconstruction accuracy " + format_real(o.accuracy));

    Rng frng = derive_rng({seed, 0xF0CA});
    o.forecast = predict(o.theory, data, 1, frng);
    if (th.require_forecast_match && preset.expected_value) {
        const auto& step = o.forecast.steps.front();
        const double want = preset.expected_value(step.k);
        if (!(std::abs(step.x_pred - want) <= th.forecast_tolerance))
            o.failures.push_back("forecast x'" + std::to_string(step.k) + " = " + format_real(step.x_pred) +
                                 ", expected " + format_real(want));
    }
    o.passed = o.failures.empty();
    return o;
}

/// Runs every seed, saving each theory and its report under out_dir/seed_<n>.
inline PresetOutcome run_preset(const ExperimentPreset& preset, const std::vector<std::uint64_t>& seeds,
                                const std::optional<std::filesystem::path>& out_dir, std::ostream& log) {
    PresetOutcome out;
    out.name = preset.name;
    const auto data = preset.data();
    for (auto seed : seeds) {
        auto o = run_preset_seed(preset, data, seed);
        log << preset.name << " seed " << seed << ": xft_fitness=" << format_real(o.xft_fitness)
            << " qdt_fitness=" << format_real(o.qdt_fitness) << " accuracy=" << format_real(o.accuracy)
            << " forecast x'" << o.forecast.steps.front().k << "=" << format_real(o.forecast.steps.front().x_pred)
            << " p1=" << format_probability(o.forecast.steps.front().p1) << " -> " << (o.passed ? "pass" : "fail");
        for (const auto& f : o.failures) log << " [" << f << "]";
        log << "\n  xft: " << to_text(o.theory.xft) << "\n  qdt: " << to_text(o.theory.qdt) << '\n';
        if (out_dir) {
            const auto dir = *out_dir / ("seed_" + std::to_string(seed));
            save(o.theory, dir / "theory");
            write_csv(data, (dir / "data.csv").string());
            const auto rebuilt = reconstruct(o.theory, data);
            std::ofstream csv(dir / "reconstruction.csv");
            write_reconstruction_csv(data, rebuilt, csv);
            std::ofstream svg(dir / "plot.svg");
            write_reconstruction_svg(data, rebuilt, svg, {640, 400, 48, preset.name + ", seed " + std::to_string(seed)});
            std::ofstream fc(dir / "forecast.csv");
            write_forecast_csv(o.forecast, fc);
        }
        if (o.passed) ++out.passes;
        out.seeds.push_back(std::move(o));
    }
    out.required = preset.required_passes(seeds.size());
    out.passed = out.passes >= out.required;
    log << preset.name << ": " << out.passes << "/" << seeds.size() << " seeds passed (need " << out.required
        << ") -> " << (out.passed ? "PASS" : "FAIL") << '\n';
    return out;
}

}  // namespace msci
