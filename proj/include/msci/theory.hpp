#pragma once

// A theory pairs an observation function tree (how far the entity moves) with
// a state decision tree (which way it moves). Together they rebuild observed
// trajectories and forecast future ones:
//
//   x'_k = x'_{k-1} + d'_k   if q'_k = 0
//   x'_k = x'_{k-1} - d'_k   if q'_k = 1,      d'_k = f(k) - f(k-1)

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "msci/config.hpp"
#include "msci/objectives.hpp"
#include "msci/qmat.hpp"
#include "msci/series.hpp"
#include "msci/xft.hpp"

namespace msci {

struct Theory {
    ExprTree xft;
    GateTree qdt;
    TerminalBindings bindings;
    Normalization normalization = Normalization::squared_modulus;
    KeyValues provenance;  // config and seeds the trees came from

    void validate() const { msci::validate(xft, bindings); }
    friend bool operator==(const Theory&, const Theory&) = default;
};

/// A (state, value) path produced by a model. Unlike TimeSeries the states are
/// not required to agree with the value steps.
struct Trajectory {
    double x0 = 0;
    std::vector<Sample> points;

    std::size_t size() const noexcept { return points.size(); }
    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline Trajectory as_trajectory(const TimeSeries& s) { return {s.x0(), {s.samples().begin(), s.samples().end()}}; }

enum class ReconstructionMode { teacher_forced, free_run };

/// teacher_forced feeds the observed states; free_run draws one strategy and
/// samples an action per step.
inline Trajectory reconstruct(const Theory& theory, const TimeSeries& series,
                              ReconstructionMode mode = ReconstructionMode::teacher_forced, Rng* rng = nullptr) {
    const CompiledExpr f(theory.xft, Environment(theory.bindings, series));
    std::optional<Strategy> strategy;
    if (mode == ReconstructionMode::free_run) {
        if (!rng) throw std::invalid_argument("free-run reconstruction needs an RNG");
        strategy = draw_strategy(theory.qdt, *rng, theory.normalization);
    }
    Trajectory out{series.x0(), {}};
    double x = series.x0();
    double prev_f = f(0.0);
    for (std::size_t k = 1; k <= series.size(); ++k) {
        const double cur_f = f(static_cast<double>(k));
        const double d = cur_f - prev_f;
        prev_f = cur_f;
        const int q = strategy ? (sample_action(strategy->p1, *rng) == 1 ? 0 : 1) : series.state(k);
        x = q == 0 ? x + d : x - d;
        out.points.push_back({q, x});
    }
    return out;
}

/// Fraction of indices where the state matches and the value is within tolerance.
inline double accuracy(const Trajectory& rebuilt, const Trajectory& observed, double tolerance) {
    if (rebuilt.size() != observed.size())
        throw std::invalid_argument("length mismatch: " + std::to_string(rebuilt.size()) + " vs " +
                                    std::to_string(observed.size()));
    if (observed.size() == 0) return 1.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const auto& a = rebuilt.points[i];
        const auto& b = observed.points[i];
        if (a.q == b.q && std::abs(a.x - b.x) <= tolerance) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(observed.size());
}

inline double accuracy(const Trajectory& rebuilt, const TimeSeries& observed, double tolerance) {
    return accuracy(rebuilt, as_trajectory(observed), tolerance);
}

struct ForecastStep {
    std::size_t k = 0;
    int q_pred = 0;
    double x_pred = 0;
    double p1 = 0.5;
    ChoiceVector strategy;
};

struct Forecast {
    std::vector<ForecastStep> steps;
};

/// Continues the index past the series (k = N+1 ...), starting from the last
/// observed value. One strategy is drawn for the whole run.
inline Forecast predict(const Theory& theory, const TimeSeries& series, std::size_t horizon, Rng& rng) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    const CompiledExpr f(theory.xft, Environment(theory.bindings, series));
    const auto strategy = draw_strategy(theory.qdt, rng, theory.normalization);
    Forecast out;
    std::size_t k = series.size();
    double x = series.back().x;
    double prev_f = f(static_cast<double>(k));
    for (std::size_t step = 0; step < horizon; ++step) {
        ++k;
        const double cur_f = f(static_cast<double>(k));
        const double d = cur_f - prev_f;
        prev_f = cur_f;
        const int q = sample_action(strategy.p1, rng) == 1 ? 0 : 1;
        x = q == 0 ? x + d : x - d;
        out.steps.push_back({k, q, x, strategy.p1, strategy.choices});
    }
    return out;
}

/// p1 always carries a decimal point ("1.0", "0.5").
inline std::string format_probability(double p) {
    auto s = format_real(p);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

inline void write_forecast_csv(const Forecast& fc, std::ostream& out) {
    out << "k,q_pred,x_pred,p1,strategy\n";
    for (const auto& s : fc.steps)
        out << s.k << ',' << s.q_pred << ',' << format_real(s.x_pred) << ',' << format_probability(s.p1) << ','
            << choice_text(s.strategy) << '\n';
}

// ---------------------------------------------------------------------------
// Bundle directory: xft.sexp, qdt.sexp, bindings.cfg, provenance.cfg

class TheoryIoError : public std::runtime_error {
public:
    TheoryIoError(const std::filesystem::path& file, const std::string& what)
        : std::runtime_error(file.string() + ": " + what), file_(file) {}
    const std::filesystem::path& file() const noexcept { return file_; }

private:
    std::filesystem::path file_;
};

namespace detail {
inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p);
    if (!out) throw TheoryIoError(p, "cannot write");
    out << content;
    if (!out) throw TheoryIoError(p, "write failed");
}

inline std::string read_file(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw TheoryIoError(p, "missing file");
    std::ifstream in(p);
    if (!in) throw TheoryIoError(p, "cannot read");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
}  // namespace detail

inline void save(const Theory& theory, const std::filesystem::path& dir) {
    theory.validate();
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "xft.sexp", to_text(theory.xft) + "\n");
    detail::write_file(dir / "qdt.sexp", to_text(theory.qdt) + "\n");
    std::ostringstream b;
    for (const auto& [name, src] : theory.bindings.items()) b << "terminal." << name << " = " << source_text(src) << '\n';
    detail::write_file(dir / "bindings.cfg", b.str());
    KeyValues prov = theory.provenance;
    std::erase_if(prov, [](const auto& kv) { return kv.first == "normalization"; });
    prov.emplace_back("normalization", std::string(normalization_name(theory.normalization)));
    std::ostringstream p;
    write_key_values(prov, p);
    detail::write_file(dir / "provenance.cfg", p.str());
}

inline Theory load(const std::filesystem::path& dir) {
    const auto xft_path = dir / "xft.sexp";
    const auto qdt_path = dir / "qdt.sexp";
    const auto bindings_path = dir / "bindings.cfg";
    const auto prov_path = dir / "provenance.cfg";
    const auto xft_text = detail::read_file(xft_path);
    const auto qdt_text = detail::read_file(qdt_path);
    const auto bindings_text = detail::read_file(bindings_path);
    const auto prov_text = detail::read_file(prov_path);

    auto guarded = [](const std::filesystem::path& p, auto&& fn) {
        try {
            return fn();
        } catch (const TheoryIoError&) {
            throw;
        } catch (const std::exception& e) {
            throw TheoryIoError(p, e.what());
        }
    };

    auto xft = guarded(xft_path, [&] { return parse_expr(xft_text); });
    auto qdt = guarded(qdt_path, [&] { return parse_gate_tree(qdt_text); });
    auto bindings = guarded(bindings_path, [&] {
        std::istringstream in(bindings_text);
        TerminalBindings b;
        for (const auto& [key, value] : parse_key_values(in, bindings_path.string())) {
            if (!key.starts_with("terminal.")) throw ConfigError("unexpected key '" + key + "'");
            b.bind(key.substr(9), parse_source(value));
        }
        return b;
    });
    auto provenance = guarded(prov_path, [&] {
        std::istringstream in(prov_text);
        return parse_key_values(in, prov_path.string());
    });
    Theory t{std::move(xft), std::move(qdt), std::move(bindings), Normalization::squared_modulus, {}};
    for (const auto& [k, v] : provenance) {
        if (k == "normalization")
            t.normalization = guarded(prov_path, [&] { return parse_normalization(v); });
        else
            t.provenance.emplace_back(k, v);
    }
    guarded(bindings_path, [&] {
        t.validate();
        return 0;
    });
    return t;
}

}  // namespace msci
