#pragma once

// State decision tree: a matrix-valued tree over eight 2x2 quantum gates.
// Resolving every choice node gives one concrete matrix (a strategy); its
// diagonalization and normalization give the probabilities of the two actions.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "msci/prefix_tree.hpp"
#include "msci/random.hpp"
#include "msci/sexpr.hpp"

namespace msci {

using Complex = std::complex<double>;
using CVector2 = std::array<Complex, 2>;

struct CMatrix2 {
    Complex m11{}, m12{}, m21{}, m22{};

    static constexpr CMatrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr CMatrix2 zero() { return {}; }

    Complex trace() const { return m11 + m22; }
    Complex det() const { return m11 * m22 - m12 * m21; }
    CMatrix2 adjoint() const { return {std::conj(m11), std::conj(m21), std::conj(m12), std::conj(m22)}; }
    double norm_inf() const {
        return std::max({std::abs(m11) + std::abs(m12), std::abs(m21) + std::abs(m22)});
    }
    bool finite() const {
        for (auto c : {m11, m12, m21, m22})
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }

    CVector2 operator*(const CVector2& v) const { return {m11 * v[0] + m12 * v[1], m21 * v[0] + m22 * v[1]}; }

    friend CMatrix2 operator+(const CMatrix2& a, const CMatrix2& b) {
        return {a.m11 + b.m11, a.m12 + b.m12, a.m21 + b.m21, a.m22 + b.m22};
    }
    friend CMatrix2 operator-(const CMatrix2& a, const CMatrix2& b) {
        return {a.m11 - b.m11, a.m12 - b.m12, a.m21 - b.m21, a.m22 - b.m22};
    }
    friend CMatrix2 operator*(const CMatrix2& a, const CMatrix2& b) {
        return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22, a.m21 * b.m11 + a.m22 * b.m21,
                a.m21 * b.m12 + a.m22 * b.m22};
    }
    friend bool operator==(const CMatrix2&, const CMatrix2&) = default;
};

/// Largest entrywise modulus of a - b.
inline double max_abs_diff(const CMatrix2& a, const CMatrix2& b) {
    const auto d = a - b;
    return std::max({std::abs(d.m11), std::abs(d.m12), std::abs(d.m21), std::abs(d.m22)});
}

// ---------------------------------------------------------------------------
// Gate table

enum class Gate : std::uint8_t { H, X, Y, Z, S, D, T, I };

inline constexpr std::array<Gate, 8> all_gates{Gate::H, Gate::X, Gate::Y, Gate::Z,
                                              Gate::S, Gate::D, Gate::T, Gate::I};

constexpr char gate_symbol(Gate g) noexcept { return "HXYZSDTI"[static_cast<int>(g)]; }

inline std::optional<Gate> gate_from_symbol(std::string_view s) {
    if (s.size() != 1) return std::nullopt;
    for (auto g : all_gates)
        if (gate_symbol(g) == s[0]) return g;
    return std::nullopt;
}

inline CMatrix2 gate(Gate g) {
    using namespace std::complex_literals;
    const double r = 1.0 / std::numbers::sqrt2;
    switch (g) {
        case Gate::H: return {r, r, r, -r};
        case Gate::X: return {0.0, 1.0, 1.0, 0.0};
        case Gate::Y: return {0.0, -1i, 1i, 0.0};
        case Gate::Z: return {1.0, 0.0, 0.0, -1.0};
        case Gate::S: return {1.0, 0.0, 0.0, 1i};
        case Gate::D: return {0.0, 1.0, -1.0, 0.0};
        case Gate::T: return {1.0, 0.0, 0.0, std::polar(1.0, std::numbers::pi / 4)};
        case Gate::I: return CMatrix2::identity();
    }
    throw std::invalid_argument("unknown gate");
}

inline CMatrix2 gate(std::string_view name) {
    auto g = gate_from_symbol(name);
    if (!g) throw std::invalid_argument("unknown gate '" + std::string(name) + "'");
    return gate(*g);
}

// ---------------------------------------------------------------------------
// Gate tree

enum class GateOp : std::uint8_t { add, mul, choice, leaf };

struct GateNode {
    GateOp op = GateOp::leaf;
    Gate gate = Gate::I;  // leaves only
    friend bool operator==(const GateNode&, const GateNode&) = default;
};

struct GateNodeTraits {
    static int arity(const GateNode& n) { return n.op == GateOp::leaf ? 0 : 2; }
};

constexpr std::string_view symbol(GateOp op) noexcept {
    switch (op) {
        case GateOp::add: return "+";
        case GateOp::mul: return "*";
        case GateOp::choice: return "//";
        case GateOp::leaf: return "";
    }
    return "";
}

/// One bit per choice node, in prefix (depth-first) order. 0 = left branch.
using ChoiceVector = std::vector<std::uint8_t>;

inline std::string choice_text(const ChoiceVector& c) {
    std::string s;
    for (auto b : c) s += b ? '1' : '0';
    return s;
}

inline ChoiceVector parse_choice_text(std::string_view s) {
    ChoiceVector c;
    for (char ch : s) {
        if (ch != '0' && ch != '1') throw std::invalid_argument("choice vector must be 0/1 characters");
        c.push_back(ch == '1');
    }
    return c;
}

class GateTree {
public:
    explicit GateTree(std::vector<GateNode> prefix) : nodes_(std::move(prefix)) {
        if (!well_formed<GateNode, GateNodeTraits>(nodes_)) throw std::invalid_argument("malformed gate tree");
    }

    static GateTree leaf(Gate g) { return GateTree({{GateOp::leaf, g}}); }
    static GateTree node(GateOp op, const GateTree& left, const GateTree& right) {
        if (op == GateOp::leaf) throw std::invalid_argument("leaf is not an operator");
        std::vector<GateNode> v{{op, Gate::I}};
        v.insert(v.end(), left.nodes_.begin(), left.nodes_.end());
        v.insert(v.end(), right.nodes_.begin(), right.nodes_.end());
        return GateTree(std::move(v));
    }

    std::span<const GateNode> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    int depth() const { return tree_depth<GateNode, GateNodeTraits>(nodes_); }
    std::size_t choice_count() const {
        return static_cast<std::size_t>(
            std::count_if(nodes_.begin(), nodes_.end(), [](const GateNode& n) { return n.op == GateOp::choice; }));
    }

    friend bool operator==(const GateTree&, const GateTree&) = default;

private:
    std::vector<GateNode> nodes_;
};

namespace detail {
// Resolves the subtree starting at i. Choice bits are consumed for every
// choice node in prefix order, including ones inside the unselected branch.
inline CMatrix2 resolve_at(std::span<const GateNode> nodes, std::size_t& i, const ChoiceVector& choices,
                           std::size_t& bit) {
    const GateNode& n = nodes[i++];
    switch (n.op) {
        case GateOp::leaf: return gate(n.gate);
        case GateOp::add: {
            auto a = resolve_at(nodes, i, choices, bit);
            return a + resolve_at(nodes, i, choices, bit);
        }
        case GateOp::mul: {
            auto a = resolve_at(nodes, i, choices, bit);
            return a * resolve_at(nodes, i, choices, bit);
        }
        case GateOp::choice: {
            const bool right = choices[bit++] != 0;
            auto a = resolve_at(nodes, i, choices, bit);
            auto b = resolve_at(nodes, i, choices, bit);
            return right ? b : a;
        }
    }
    throw std::logic_error("bad gate node");
}
}  // namespace detail

inline CMatrix2 resolve(const GateTree& tree, const ChoiceVector& choices) {
    if (choices.size() != tree.choice_count())
        throw std::invalid_argument("expected " + std::to_string(tree.choice_count()) + " choice bits, got " +
                                    std::to_string(choices.size()));
    std::size_t i = 0, bit = 0;
    return detail::resolve_at(tree.nodes(), i, choices, bit);
}

// ---------------------------------------------------------------------------
// Eigendecomposition

struct EigenPair {
    Complex lambda;
    CVector2 vector;
};

struct EigenDecomposition {
    EigenPair first;
    EigenPair second;
    bool defective = false;  // second.vector duplicates first.vector
};

namespace detail {
inline CVector2 normalized(CVector2 v) {
    const double n = std::sqrt(std::norm(v[0]) + std::norm(v[1]));
    return {v[0] / n, v[1] / n};
}

// Null vector of M - lambda I from whichever row gives the larger candidate.
inline std::optional<CVector2> null_vector(const CMatrix2& m, Complex lambda, double scale) {
    const CVector2 from_row1{m.m12, lambda - m.m11};
    const CVector2 from_row2{lambda - m.m22, m.m21};
    const double n1 = std::norm(from_row1[0]) + std::norm(from_row1[1]);
    const double n2 = std::norm(from_row2[0]) + std::norm(from_row2[1]);
    const double tiny = 1e-28 * scale * scale;
    if (std::max(n1, n2) <= tiny) return std::nullopt;
    return normalized(n1 >= n2 ? from_row1 : from_row2);
}
}  // namespace detail

/// Closed-form eigenpairs: roots of l^2 - tr l + det, unit eigenvectors.
/// The larger-modulus root is computed first and the other from det / l1.
inline EigenDecomposition eigen2(const CMatrix2& m) {
    const Complex half_tr = 0.5 * m.trace();
    const Complex half_gap = 0.5 * (m.m11 - m.m22);
    const Complex disc = std::sqrt(half_gap * half_gap + m.m12 * m.m21);
    const Complex plus = half_tr + disc;
    const Complex minus = half_tr - disc;
    const Complex l1 = std::abs(plus) >= std::abs(minus) ? plus : minus;
    const Complex l2 = std::abs(l1) > 0 ? m.det() / l1 : Complex{};

    const double scale = std::max(m.norm_inf(), 1e-300);
    EigenDecomposition out;
    // Scalar matrix: every direction is an eigenvector.
    if (std::abs(m.m12) <= 1e-14 * scale && std::abs(m.m21) <= 1e-14 * scale &&
        std::abs(m.m11 - m.m22) <= 1e-14 * scale) {
        out.first = {l1, {1.0, 0.0}};
        out.second = {l2, {0.0, 1.0}};
        return out;
    }
    auto v1 = detail::null_vector(m, l1, scale);
    auto v2 = detail::null_vector(m, l2, scale);
    // Diagonal-ish matrices where one candidate degenerates: fall back to axes.
    if (!v1) v1 = std::abs(m.m11 - l1) <= std::abs(m.m22 - l1) ? CVector2{1.0, 0.0} : CVector2{0.0, 1.0};
    if (!v2) v2 = std::abs(m.m11 - l2) <= std::abs(m.m22 - l2) ? CVector2{1.0, 0.0} : CVector2{0.0, 1.0};
    out.first = {l1, *v1};
    out.second = {l2, *v2};
    const Complex overlap = std::conj((*v1)[0]) * (*v2)[0] + std::conj((*v1)[1]) * (*v2)[1];
    if (std::abs(l1 - l2) <= 1e-12 * scale && std::abs(overlap) > 1.0 - 1e-9) {
        out.second.vector = out.first.vector;
        out.defective = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pure -> mixed: action probabilities

enum class Normalization { squared_modulus, modulus };

inline std::string_view normalization_name(Normalization n) {
    return n == Normalization::squared_modulus ? "squared_modulus" : "modulus";
}

inline Normalization parse_normalization(std::string_view s) {
    if (s == "squared_modulus") return Normalization::squared_modulus;
    if (s == "modulus") return Normalization::modulus;
    throw std::invalid_argument("unknown normalization '" + std::string(s) + "'");
}

struct ActionProbabilities {
    double p1 = 0.5;
    double p2 = 0.5;
};

inline constexpr double degenerate_eigenvalue = 1e-12;
inline constexpr double component_tie_tolerance = 1e-12;

/// Eigenvalues are ordered by descending |l| (ties: real part, then imaginary
/// part, both descending). The leading eigenvalue goes to action a1 when its
/// eigenvector leans on the first basis component (ties included), else to a2.
inline ActionProbabilities action_probabilities(const CMatrix2& m,
                                                Normalization norm = Normalization::squared_modulus) {
    auto eig = eigen2(m);
    auto key = [](const EigenPair& p) { return std::make_tuple(std::abs(p.lambda), p.lambda.real(), p.lambda.imag()); };
    EigenPair lead = eig.first, other = eig.second;
    if (key(other) > key(lead)) std::swap(lead, other);

    if (std::abs(lead.lambda) < degenerate_eigenvalue) return {};

    const double c1 = std::abs(lead.vector[0]);
    const double c2 = std::abs(lead.vector[1]);
    const bool lead_is_a1 = c1 > c2 || std::abs(c1 - c2) <= component_tie_tolerance;

    auto weight = [&](Complex l) { return norm == Normalization::squared_modulus ? std::norm(l) : std::abs(l); };
    const double wl = weight(lead.lambda);
    const double wo = weight(other.lambda);
    const double p_lead = wl / (wl + wo);
    const double p_other = 1.0 - p_lead;
    return lead_is_a1 ? ActionProbabilities{p_lead, p_other} : ActionProbabilities{p_other, p_lead};
}

/// Action 1 with probability p1, else action 2.
inline int sample_action(double p1, Rng& rng) { return unit_double(rng) < p1 ? 1 : 2; }

// ---------------------------------------------------------------------------
// Strategies

struct Strategy {
    ChoiceVector choices;
    CMatrix2 matrix;
    double p1 = 0.5;
    double p2 = 0.5;
};

class EnumerationCapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t default_enumeration_cap = 12;

inline Strategy make_strategy(const GateTree& tree, ChoiceVector choices, Normalization norm) {
    Strategy s;
    s.matrix = resolve(tree, choices);
    const auto p = action_probabilities(s.matrix, norm);
    s.p1 = p.p1;
    s.p2 = p.p2;
    s.choices = std::move(choices);
    return s;
}

/// All 2^c full resolutions, first choice node as the most significant bit.
inline std::vector<Strategy> enumerate_strategies(const GateTree& tree, std::size_t cap = default_enumeration_cap,
                                                  Normalization norm = Normalization::squared_modulus) {
    const std::size_t c = tree.choice_count();
    if (c > cap)
        throw EnumerationCapError("tree has " + std::to_string(c) + " choice nodes, over the enumeration cap of " +
                                  std::to_string(cap) + "; use Monte Carlo mode");
    std::vector<Strategy> out;
    out.reserve(std::size_t{1} << c);
    for (std::size_t idx = 0; idx < (std::size_t{1} << c); ++idx) {
        ChoiceVector bits(c);
        for (std::size_t j = 0; j < c; ++j) bits[j] = static_cast<std::uint8_t>((idx >> (c - 1 - j)) & 1U);
        out.push_back(make_strategy(tree, std::move(bits), norm));
    }
    return out;
}

/// Uniformly random full resolution (each choice bit fair).
inline Strategy draw_strategy(const GateTree& tree, Rng& rng, Normalization norm = Normalization::squared_modulus) {
    ChoiceVector bits(tree.choice_count());
    for (auto& b : bits) b = coin_flip(rng);
    return make_strategy(tree, std::move(bits), norm);
}

// ---------------------------------------------------------------------------
// Genetic operators

struct GateTreeConfig {
    std::vector<GateOp> functions{GateOp::add, GateOp::mul, GateOp::choice};
    std::vector<Gate> leaves{all_gates.begin(), all_gates.end()};
    int init_depth_min = 2;
    int init_depth_max = 6;
    int max_depth = 8;

    PrimitiveSet<GateNode> primitives() const {
        PrimitiveSet<GateNode> p;
        for (auto op : functions) p.functions.push_back({op, Gate::I});
        for (auto g : leaves) p.terminals.push_back({GateOp::leaf, g});
        return p;
    }
};

inline GateTree random_gate_tree(const GateTreeConfig& cfg, Rng& rng) {
    return GateTree(ramped_tree<GateNode, GateNodeTraits>(cfg.primitives(), cfg.init_depth_min,
                                                          std::min(cfg.init_depth_max, cfg.max_depth), rng));
}

inline std::pair<GateTree, GateTree> crossover(const GateTree& a, const GateTree& b, const GateTreeConfig& cfg,
                                               Rng& rng) {
    auto [c1, c2] = subtree_crossover<GateNode, GateNodeTraits>(a.nodes(), b.nodes(), cfg.max_depth, rng);
    return {GateTree(std::move(c1)), GateTree(std::move(c2))};
}

inline GateTree mutate(const GateTree& tree, const GateTreeConfig& cfg, Rng& rng) {
    return GateTree(subtree_mutation<GateNode, GateNodeTraits>(tree.nodes(), cfg.primitives(), cfg.init_depth_max,
                                                               cfg.max_depth, rng));
}

// ---------------------------------------------------------------------------
// Text form, e.g. (+ S (* (* (// I X) (* (// D Z) T)) T))

namespace detail {
inline void write_gate(std::string& out, std::span<const GateNode> nodes, std::size_t& i) {
    const auto& n = nodes[i++];
    if (n.op == GateOp::leaf) {
        out += gate_symbol(n.gate);
        return;
    }
    out += '(';
    out += symbol(n.op);
    out += ' ';
    write_gate(out, nodes, i);
    out += ' ';
    write_gate(out, nodes, i);
    out += ')';
}

inline void read_gate(Lexer& lex, std::vector<GateNode>& out) {
    const Token t = lex.peek();
    if (t.kind == Token::Kind::atom) {
        auto g = gate_from_symbol(t.text);
        if (!g) throw ParseError(t.position, "gate (H X Y Z S D T I) or '('", t.describe());
        out.push_back({GateOp::leaf, *g});
        lex.next();
        return;
    }
    lex.expect(Token::Kind::open, "gate (H X Y Z S D T I) or '('");
    const Token op_tok = lex.peek();
    std::optional<GateOp> op;
    if (op_tok.kind == Token::Kind::atom) {
        for (auto o : {GateOp::add, GateOp::mul, GateOp::choice})
            if (symbol(o) == op_tok.text) op = o;
    }
    if (!op) throw ParseError(op_tok.position, "operator (+ * //)", op_tok.describe());
    lex.next();
    out.push_back({*op, Gate::I});
    for (int c = 0; c < 2; ++c) {
        if (lex.peek().kind == Token::Kind::close || lex.peek().kind == Token::Kind::end)
            throw ParseError(lex.peek().position, "operand", lex.peek().describe());
        read_gate(lex, out);
    }
    lex.expect(Token::Kind::close, "')'");
}
}  // namespace detail

inline std::string to_text(const GateTree& tree) {
    std::string out;
    std::size_t i = 0;
    detail::write_gate(out, tree.nodes(), i);
    return out;
}

inline GateTree parse_gate_tree(std::string_view text) {
    Lexer lex(text);
    std::vector<GateNode> nodes;
    detail::read_gate(lex, nodes);
    lex.expect_end();
    return GateTree(std::move(nodes));
}

}  // namespace msci
