#pragma once

// Observation function tree: a symbolic expression f(k, z_1..z_m) whose
// forward difference f(k) - f(k-1) models the distance between consecutive
// observations.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "msci/prefix_tree.hpp"
#include "msci/random.hpp"
#include "msci/series.hpp"
#include "msci/sexpr.hpp"
#include "msci/text.hpp"

namespace msci {

enum class ExprOp : std::uint8_t { add, sub, mul, div, sin, cos, log, exp, terminal };

constexpr int arity(ExprOp op) noexcept {
    switch (op) {
        case ExprOp::add:
        case ExprOp::sub:
        case ExprOp::mul:
        case ExprOp::div: return 2;
        case ExprOp::sin:
        case ExprOp::cos:
        case ExprOp::log:
        case ExprOp::exp: return 1;
        case ExprOp::terminal: return 0;
    }
    return 0;
}

constexpr std::string_view symbol(ExprOp op) noexcept {
    switch (op) {
        case ExprOp::add: return "+";
        case ExprOp::sub: return "-";
        case ExprOp::mul: return "*";
        case ExprOp::div: return "/";
        case ExprOp::sin: return "sin";
        case ExprOp::cos: return "cos";
        case ExprOp::log: return "log";
        case ExprOp::exp: return "exp";
        case ExprOp::terminal: return "";
    }
    return "";
}

inline std::optional<ExprOp> expr_op_from_symbol(std::string_view s) {
    for (auto op : {ExprOp::add, ExprOp::sub, ExprOp::mul, ExprOp::div, ExprOp::sin, ExprOp::cos, ExprOp::log,
                    ExprOp::exp})
        if (symbol(op) == s) return op;
    return std::nullopt;
}

/// Identifier rule for terminal names; operator symbols are reserved.
inline bool valid_terminal_name(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return !expr_op_from_symbol(s).has_value();
}

struct ExprNode {
    ExprOp op = ExprOp::terminal;
    std::string name;  // terminals only
    friend bool operator==(const ExprNode&, const ExprNode&) = default;
};

struct ExprNodeTraits {
    static int arity(const ExprNode& n) { return msci::arity(n.op); }
};

class ExprTree {
public:
    explicit ExprTree(std::vector<ExprNode> prefix) : nodes_(std::move(prefix)) {
        if (!well_formed<ExprNode, ExprNodeTraits>(nodes_)) throw std::invalid_argument("malformed expression tree");
        for (const auto& n : nodes_)
            if (n.op == ExprOp::terminal && !valid_terminal_name(n.name))
                throw std::invalid_argument("bad terminal name '" + n.name + "'");
    }

    static ExprTree terminal(std::string name) { return ExprTree({{ExprOp::terminal, std::move(name)}}); }

    static ExprTree unary(ExprOp op, const ExprTree& child) {
        if (msci::arity(op) != 1) throw std::invalid_argument("not a unary operator");
        std::vector<ExprNode> v{{op, {}}};
        v.insert(v.end(), child.nodes_.begin(), child.nodes_.end());
        return ExprTree(std::move(v));
    }

    static ExprTree binary(ExprOp op, const ExprTree& left, const ExprTree& right) {
        if (msci::arity(op) != 2) throw std::invalid_argument("not a binary operator");
        std::vector<ExprNode> v{{op, {}}};
        v.insert(v.end(), left.nodes_.begin(), left.nodes_.end());
        v.insert(v.end(), right.nodes_.begin(), right.nodes_.end());
        return ExprTree(std::move(v));
    }

    std::span<const ExprNode> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    int depth() const { return tree_depth<ExprNode, ExprNodeTraits>(nodes_); }

    std::set<std::string> terminal_names() const {
        std::set<std::string> names;
        for (const auto& n : nodes_)
            if (n.op == ExprOp::terminal) names.insert(n.name);
        return names;
    }

    friend bool operator==(const ExprTree&, const ExprTree&) = default;

private:
    std::vector<ExprNode> nodes_;
};

// ---------------------------------------------------------------------------
// Terminal bindings

enum class StatKind { d_avg, av, h, l };

constexpr std::string_view stat_name(StatKind s) noexcept {
    switch (s) {
        case StatKind::d_avg: return "d_avg";
        case StatKind::av: return "av";
        case StatKind::h: return "h";
        case StatKind::l: return "l";
    }
    return "";
}

struct IndexK {
    friend bool operator==(IndexK, IndexK) = default;
};
struct NamedConstant {
    double value = 0;
    friend bool operator==(const NamedConstant&, const NamedConstant&) = default;
};
struct SeriesStat {
    StatKind stat = StatKind::d_avg;
    friend bool operator==(const SeriesStat&, const SeriesStat&) = default;
};

using TerminalSource = std::variant<IndexK, NamedConstant, SeriesStat>;

/// `index_k` | `const:<real>` | `stat:<d_avg|av|h|l>`
inline std::string source_text(const TerminalSource& src) {
    struct V {
        std::string operator()(IndexK) const { return "index_k"; }
        std::string operator()(const NamedConstant& c) const { return "const:" + format_real(c.value); }
        std::string operator()(const SeriesStat& s) const { return "stat:" + std::string(stat_name(s.stat)); }
    };
    return std::visit(V{}, src);
}

inline TerminalSource parse_source(std::string_view text) {
    text = trim(text);
    if (text == "index_k") return IndexK{};
    if (text.starts_with("const:")) {
        auto v = parse_real(text.substr(6));
        if (!v || !std::isfinite(*v)) throw std::invalid_argument("bad constant in '" + std::string(text) + "'");
        return NamedConstant{*v};
    }
    if (text.starts_with("stat:")) {
        auto s = text.substr(5);
        for (auto k : {StatKind::d_avg, StatKind::av, StatKind::h, StatKind::l})
            if (stat_name(k) == s) return SeriesStat{k};
        throw std::invalid_argument("unknown series statistic '" + std::string(s) + "'");
    }
    throw std::invalid_argument("bad terminal source '" + std::string(text) + "'");
}

class TerminalBindings {
public:
    TerminalBindings() = default;
    TerminalBindings(std::initializer_list<std::pair<std::string, TerminalSource>> items) {
        for (const auto& [n, s] : items) bind(n, s);
    }

    TerminalBindings& bind(const std::string& name, TerminalSource source) {
        if (!valid_terminal_name(name)) throw std::invalid_argument("bad terminal name '" + name + "'");
        if (find(name)) throw std::invalid_argument("duplicate terminal '" + name + "'");
        items_.emplace_back(name, source);
        return *this;
    }

    const TerminalSource* find(std::string_view name) const {
        for (const auto& [n, s] : items_)
            if (n == name) return &s;
        return nullptr;
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [n, s] : items_) out.push_back(n);
        return out;
    }

    const std::vector<std::pair<std::string, TerminalSource>>& items() const noexcept { return items_; }
    bool empty() const noexcept { return items_.empty(); }

    friend bool operator==(const TerminalBindings&, const TerminalBindings&) = default;

private:
    std::vector<std::pair<std::string, TerminalSource>> items_;
};

class BindingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws BindingError when the tree uses a terminal the bindings lack.
inline void validate(const ExprTree& tree, const TerminalBindings& bindings) {
    for (const auto& name : tree.terminal_names())
        if (!bindings.find(name)) throw BindingError("terminal '" + name + "' has no binding");
}

/// Bindings with series statistics substituted: each terminal is either the
/// current index or a fixed number.
class Environment {
public:
    struct Slot {
        std::string name;
        bool is_index = false;
        double value = 0;
    };

    Environment(const TerminalBindings& bindings, const SeriesStats& st) {
        for (const auto& [name, src] : bindings.items()) {
            Slot slot{name, false, 0};
            if (std::holds_alternative<IndexK>(src)) {
                slot.is_index = true;
            } else if (auto* c = std::get_if<NamedConstant>(&src)) {
                slot.value = c->value;
            } else {
                switch (std::get<SeriesStat>(src).stat) {
                    case StatKind::d_avg: slot.value = st.d_avg; break;
                    case StatKind::av: slot.value = st.av; break;
                    case StatKind::h: slot.value = st.h; break;
                    case StatKind::l: slot.value = st.l; break;
                }
            }
            slots_.push_back(std::move(slot));
        }
    }

    Environment(const TerminalBindings& bindings, const TimeSeries& series) : Environment(bindings, stats(series)) {}

    /// Constants and index only; stat terminals are rejected.
    explicit Environment(const TerminalBindings& bindings) {
        for (const auto& [name, src] : bindings.items())
            if (std::holds_alternative<SeriesStat>(src))
                throw BindingError("terminal '" + name + "' needs a series to resolve");
        *this = Environment(bindings, SeriesStats{});
    }

    std::optional<std::size_t> slot_of(std::string_view name) const {
        for (std::size_t i = 0; i < slots_.size(); ++i)
            if (slots_[i].name == name) return i;
        return std::nullopt;
    }

    const std::vector<Slot>& slots() const noexcept { return slots_; }

private:
    std::vector<Slot> slots_;
};

// ---------------------------------------------------------------------------
// Evaluation with protected operators

namespace protect {

inline constexpr double magnitude_cap = 1e150;  // keeps squared differences finite
inline constexpr double division_guard = 1e-12;
inline constexpr double exp_clamp = 60.0;

inline double guard(double v) noexcept {
    if (std::isnan(v)) return 0.0;
    return std::clamp(v, -magnitude_cap, magnitude_cap);
}

inline double div(double a, double b) noexcept { return std::abs(b) < division_guard ? 1.0 : a / b; }
inline double log(double a) noexcept { return a == 0.0 ? 0.0 : std::log(std::abs(a)); }
inline double exp(double a) noexcept { return std::exp(std::clamp(a, -exp_clamp, exp_clamp)); }

}  // namespace protect

/// A tree with terminals resolved to environment slots, for repeated evaluation.
class CompiledExpr {
public:
    CompiledExpr(const ExprTree& tree, const Environment& env) : env_(env.slots()) {
        code_.reserve(tree.size());
        for (const auto& n : tree.nodes()) {
            std::size_t slot = 0;
            if (n.op == ExprOp::terminal) {
                auto s = env.slot_of(n.name);
                if (!s) throw BindingError("terminal '" + n.name + "' has no binding");
                slot = *s;
            }
            code_.push_back({n.op, slot});
        }
    }

    double operator()(double k) const {
        std::size_t pc = 0;
        return protect::guard(run(pc, k));
    }

private:
    struct Instr {
        ExprOp op;
        std::size_t slot;
    };

    double run(std::size_t& pc, double k) const {
        const Instr& in = code_[pc++];
        switch (in.op) {
            case ExprOp::terminal: {
                const auto& s = env_[in.slot];
                return s.is_index ? k : s.value;
            }
            case ExprOp::sin: return protect::guard(std::sin(run(pc, k)));
            case ExprOp::cos: return protect::guard(std::cos(run(pc, k)));
            case ExprOp::log: return protect::guard(protect::log(run(pc, k)));
            case ExprOp::exp: return protect::guard(protect::exp(run(pc, k)));
            default: break;
        }
        const double a = run(pc, k);
        const double b = run(pc, k);
        switch (in.op) {
            case ExprOp::add: return protect::guard(a + b);
            case ExprOp::sub: return protect::guard(a - b);
            case ExprOp::mul: return protect::guard(a * b);
            case ExprOp::div: return protect::guard(protect::div(a, b));
            default: return 0.0;
        }
    }

    std::vector<Instr> code_;
    std::vector<Environment::Slot> env_;
};

inline double eval(const ExprTree& tree, double k, const Environment& env) { return CompiledExpr(tree, env)(k); }

/// Model distance d'_k = f(k) - f(k-1). Signed.
inline double distance(const ExprTree& tree, double k, const Environment& env) {
    CompiledExpr f(tree, env);
    return f(k) - f(k - 1);
}

/// -sum_k (d'_k - d_k)^2 over the series; 0 iff every model distance matches.
inline double xft_fitness(const ExprTree& tree, const TimeSeries& series, const Environment& env) {
    CompiledExpr f(tree, env);
    const auto d = distances(series);
    double prev = f(0.0);
    double sse = 0;
    for (std::size_t k = 1; k <= d.size(); ++k) {
        const double cur = f(static_cast<double>(k));
        const double err = (cur - prev) - d[k - 1];
        sse += err * err;
        prev = cur;
    }
    const double fit = 0.0 - sse;
    return std::isfinite(fit) ? fit : std::numeric_limits<double>::lowest();
}

inline double xft_fitness(const ExprTree& tree, const TimeSeries& series, const TerminalBindings& bindings) {
    return xft_fitness(tree, series, Environment(bindings, series));
}

// ---------------------------------------------------------------------------
// Genetic operators

struct XftConfig {
    std::vector<ExprOp> functions{ExprOp::add, ExprOp::sub, ExprOp::mul, ExprOp::div};
    std::vector<std::string> terminals;
    int init_depth_min = 2;
    int init_depth_max = 6;
    int max_depth = 10;

    PrimitiveSet<ExprNode> primitives() const {
        PrimitiveSet<ExprNode> p;
        for (auto op : functions) p.functions.push_back({op, {}});
        for (const auto& t : terminals) p.terminals.push_back({ExprOp::terminal, t});
        return p;
    }
};

inline ExprTree random_tree(const XftConfig& cfg, Rng& rng) {
    return ExprTree(ramped_tree<ExprNode, ExprNodeTraits>(cfg.primitives(), cfg.init_depth_min,
                                                          std::min(cfg.init_depth_max, cfg.max_depth), rng));
}

inline std::pair<ExprTree, ExprTree> crossover(const ExprTree& a, const ExprTree& b, const XftConfig& cfg, Rng& rng) {
    auto [c1, c2] = subtree_crossover<ExprNode, ExprNodeTraits>(a.nodes(), b.nodes(), cfg.max_depth, rng);
    return {ExprTree(std::move(c1)), ExprTree(std::move(c2))};
}

inline ExprTree mutate(const ExprTree& tree, const XftConfig& cfg, Rng& rng) {
    return ExprTree(subtree_mutation<ExprNode, ExprNodeTraits>(tree.nodes(), cfg.primitives(), cfg.init_depth_max,
                                                               cfg.max_depth, rng));
}

// ---------------------------------------------------------------------------
// Text form: fully parenthesized prefix, e.g. (+ (* v t) (* (* h a) (* t t)))

namespace detail {
inline void write_expr(std::string& out, std::span<const ExprNode> nodes, std::size_t& i) {
    const auto& n = nodes[i++];
    if (n.op == ExprOp::terminal) {
        out += n.name;
        return;
    }
    out += '(';
    out += symbol(n.op);
    for (int c = 0; c < arity(n.op); ++c) {
        out += ' ';
        write_expr(out, nodes, i);
    }
    out += ')';
}

inline void read_expr(Lexer& lex, std::vector<ExprNode>& out) {
    const Token t = lex.peek();
    if (t.kind == Token::Kind::atom) {
        if (!valid_terminal_name(t.text)) throw ParseError(t.position, "terminal name or '('", t.describe());
        out.push_back({ExprOp::terminal, std::string(t.text)});
        lex.next();
        return;
    }
    lex.expect(Token::Kind::open, "terminal name or '('");
    const Token op_tok = lex.peek();
    std::optional<ExprOp> op;
    if (op_tok.kind == Token::Kind::atom) op = expr_op_from_symbol(op_tok.text);
    if (!op) throw ParseError(op_tok.position, "operator (+ - * / sin cos log exp)", op_tok.describe());
    lex.next();
    out.push_back({*op, {}});
    for (int c = 0; c < arity(*op); ++c) {
        if (lex.peek().kind == Token::Kind::close || lex.peek().kind == Token::Kind::end)
            throw ParseError(lex.peek().position, "operand", lex.peek().describe());
        read_expr(lex, out);
    }
    lex.expect(Token::Kind::close, "')'");
}
}  // namespace detail

inline std::string to_text(const ExprTree& tree) {
    std::string out;
    std::size_t i = 0;
    detail::write_expr(out, tree.nodes(), i);
    return out;
}

inline ExprTree parse_expr(std::string_view text) {
    Lexer lex(text);
    std::vector<ExprNode> nodes;
    detail::read_expr(lex, nodes);
    lex.expect_end();
    return ExprTree(std::move(nodes));
}

}  // namespace msci
