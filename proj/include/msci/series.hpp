#pragma once

// State/value time series: the observed trajectory of an entity.
//
// A series is an initial value x0 followed by N samples (q_k, x_k), k = 1..N.
// The state bit is fully determined by the values: q_k = 0 iff x_k >= x_{k-1}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "msci/text.hpp"

namespace msci {

class SeriesError : public std::runtime_error {
public:
    explicit SeriesError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(what), index_(index) {}
    /// Offending element (value index for derive_states, sample index k otherwise).
    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    std::optional<std::size_t> index_;
};

class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Sample {
    int q = 0;
    double x = 0;
    friend bool operator==(const Sample&, const Sample&) = default;
};

constexpr int state_for_step(double prev, double next) noexcept { return next >= prev ? 0 : 1; }

class TimeSeries {
public:
    /// Validating constructor. Throws SeriesError naming the first bad sample (1-based k).
    static TimeSeries from_samples(double x0, std::vector<Sample> samples) {
        if (!std::isfinite(x0)) throw SeriesError("x0 is not finite", 0);
        if (samples.empty()) throw SeriesError("series needs at least one sample");
        double prev = x0;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& s = samples[i];
            const std::size_t k = i + 1;
            if (s.q != 0 && s.q != 1)
                throw SeriesError("state at k=" + std::to_string(k) + " is not 0 or 1", k);
            if (!std::isfinite(s.x)) throw SeriesError("value at k=" + std::to_string(k) + " is not finite", k);
            if (s.q != state_for_step(prev, s.x))
                throw SeriesError("state at k=" + std::to_string(k) + " is inconsistent with values", k);
            prev = s.x;
        }
        return TimeSeries(x0, std::move(samples));
    }

    double x0() const noexcept { return x0_; }
    std::span<const Sample> samples() const noexcept { return samples_; }
    /// N, the number of decided samples (x0 excluded).
    std::size_t size() const noexcept { return samples_.size(); }
    /// x_k for k = 0..N.
    double value(std::size_t k) const { return k == 0 ? x0_ : samples_.at(k - 1).x; }
    int state(std::size_t k) const { return samples_.at(k - 1).q; }
    const Sample& back() const { return samples_.back(); }

    std::vector<double> values() const {
        std::vector<double> v{x0_};
        for (const auto& s : samples_) v.push_back(s.x);
        return v;
    }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    TimeSeries(double x0, std::vector<Sample> samples) : x0_(x0), samples_(std::move(samples)) {}

    double x0_;
    std::vector<Sample> samples_;
};

/// Builds a series from raw values whose first element is x0.
inline TimeSeries derive_states(std::span<const double> values) {
    if (values.size() < 2) throw SeriesError("need x0 and at least one value");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i])) throw SeriesError("value " + std::to_string(i) + " is not finite", i);
    std::vector<Sample> samples;
    samples.reserve(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i) samples.push_back({state_for_step(values[i - 1], values[i]), values[i]});
    return TimeSeries::from_samples(values.front(), std::move(samples));
}

inline TimeSeries derive_states(std::initializer_list<double> values) {
    return derive_states(std::span<const double>(values.begin(), values.size()));
}

/// d_k = |x_k - x_{k-1}| for k = 1..N (element k-1 of the result).
inline std::vector<double> distances(const TimeSeries& series) {
    std::vector<double> d;
    d.reserve(series.size());
    double prev = series.x0();
    for (const auto& s : series.samples()) {
        d.push_back(std::abs(s.x - prev));
        prev = s.x;
    }
    return d;
}

struct SeriesStats {
    double d_avg = 0;  // mean |x_k - x_{k-1}|
    double av = 0;     // mean value, x0 included
    double h = 0;      // max value, x0 included
    double l = 0;      // min value, x0 included
    double freq0 = 0;  // fraction of samples with q = 0
    double freq1 = 0;
};

inline SeriesStats stats(const TimeSeries& series) {
    SeriesStats st;
    const auto d = distances(series);
    const auto n = static_cast<double>(series.size());
    st.d_avg = std::accumulate(d.begin(), d.end(), 0.0) / n;
    const auto v = series.values();
    st.av = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    st.l = *lo;
    st.h = *hi;
    // av can drift outside [l, h] by one ulp on constant series
    st.av = std::clamp(st.av, st.l, st.h);
    const auto zeros = std::count_if(series.samples().begin(), series.samples().end(),
                                     [](const Sample& s) { return s.q == 0; });
    st.freq0 = static_cast<double>(zeros) / n;
    st.freq1 = 1.0 - st.freq0;
    return st;
}

// CSV: optional "# x0=<real>" comment, header "q,x", one row per sample.

inline void write_csv(const TimeSeries& series, std::ostream& out) {
    out << "# x0=" << format_real(series.x0()) << "\nq,x\n";
    for (const auto& s : series.samples()) out << s.q << ',' << format_real(s.x) << '\n';
}

inline TimeSeries read_csv(std::istream& in, const std::string& source = "<stream>") {
    std::optional<double> x0;
    bool header_seen = false;
    std::vector<Sample> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto text = trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            auto body = trim(text.substr(1));
            if (body.starts_with("x0=")) {
                if (header_seen) throw CsvError(source, lineno, "x0 comment must precede the header");
                x0 = parse_real(body.substr(3));
                if (!x0 || !std::isfinite(*x0)) throw CsvError(source, lineno, "bad x0 value");
            }
            continue;
        }
        if (!header_seen) {
            if (text != "q,x") throw CsvError(source, lineno, "expected header 'q,x'");
            header_seen = true;
            continue;
        }
        auto cols = split(text, ',');
        if (cols.size() != 2) throw CsvError(source, lineno, "expected 2 columns");
        auto q = parse_real(cols[0]);
        auto x = parse_real(cols[1]);
        if (!q || (*q != 0.0 && *q != 1.0)) throw CsvError(source, lineno, "state must be 0 or 1");
        if (!x || !std::isfinite(*x)) throw CsvError(source, lineno, "value must be a finite real");
        samples.push_back({static_cast<int>(*q), *x});
    }
    if (!header_seen) throw CsvError(source, lineno, "missing header 'q,x'");
    try {
        return TimeSeries::from_samples(x0.value_or(0.0), std::move(samples));
    } catch (const SeriesError& e) {
        throw SeriesError(source + ": " + e.what(), e.index());
    }
}

inline void write_csv(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_csv(series, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline TimeSeries read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_csv(in, path);
}

}  // namespace msci
