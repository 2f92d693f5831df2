#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "msci/qmat.hpp"

using namespace msci;
using namespace std::complex_literals;

namespace {

// Independent 2x2 reference arithmetic on plain arrays.
using Ref = std::array<std::array<Complex, 2>, 2>;

Ref ref(const CMatrix2& m) { return {{{m.m11, m.m12}, {m.m21, m.m22}}}; }

Ref ref_mul(const Ref& a, const Ref& b) {
    Ref c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

Ref ref_add(const Ref& a, const Ref& b) {
    Ref c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] = a[i][j] + b[i][j];
    return c;
}

double ref_diff(const Ref& a, const Ref& b) {
    double d = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) d = std::max(d, std::abs(a[i][j] - b[i][j]));
    return d;
}

const char* const eq30 = "(+ S (* (* (// I X) (* (// D Z) T)) T))";

GateTree random_tree_of_depth(int depth, Rng& rng) {
    GateTreeConfig cfg;
    cfg.init_depth_min = 1;
    cfg.init_depth_max = depth;
    return random_gate_tree(cfg, rng);
}

}  // namespace

TEST_CASE("gate table entries") {
    const double r = 1 / std::sqrt(2.0);
    CHECK(gate("I") == CMatrix2{1.0, 0.0, 0.0, 1.0});
    CHECK(gate("Y") == CMatrix2{0.0, -1i, 1i, 0.0});
    CHECK(max_abs_diff(gate("T"), CMatrix2{1.0, 0.0, 0.0, std::exp(1i * std::numbers::pi / 4.0)}) < 1e-15);
    CHECK(max_abs_diff(gate("H"), CMatrix2{r, r, r, -r}) < 1e-15);
    CHECK(gate("X") == CMatrix2{0.0, 1.0, 1.0, 0.0});
    CHECK(gate("Z") == CMatrix2{1.0, 0.0, 0.0, -1.0});
    CHECK(gate("S") == CMatrix2{1.0, 0.0, 0.0, 1i});
    CHECK(gate("D") == CMatrix2{0.0, 1.0, -1.0, 0.0});
    CHECK_THROWS_AS(gate("Q"), std::invalid_argument);
}

TEST_CASE("all eight gates are unitary") {
    for (auto g : all_gates) {
        const auto m = gate(g);
        const Ref prod = ref_mul(ref(m), ref(m.adjoint()));
        INFO("gate " << gate_symbol(g));
        CHECK(ref_diff(prod, ref(CMatrix2::identity())) < 1e-12);
    }
}

TEST_CASE("matrix product matches the reference") {
    Rng rng{4};
    for (int i = 0; i < 200; ++i) {
        const auto a = gate(all_gates[uniform_index(rng, 8)]);
        const auto b = gate(all_gates[uniform_index(rng, 8)]);
        REQUIRE(ref_diff(ref(a * b), ref_mul(ref(a), ref(b))) < 1e-15);
        REQUIRE(ref_diff(ref(a + b), ref_add(ref(a), ref(b))) < 1e-15);
    }
}

TEST_CASE("resolve Y + I") {
    CHECK(resolve(parse_gate_tree("(+ Y I)"), {}) == CMatrix2{1.0, -1i, 1i, 1.0});
}

TEST_CASE("resolve a choice between I and X") {
    const auto t = parse_gate_tree("(// I X)");
    CHECK(resolve(t, {0}) == gate("I"));
    CHECK(resolve(t, {1}) == gate("X"));
    CHECK_THROWS_AS(resolve(t, {}), std::invalid_argument);
    CHECK_THROWS_AS(resolve(t, {0, 1}), std::invalid_argument);
}

TEST_CASE("Eq. 30 tree resolves to its four strategies") {
    const auto tree = parse_gate_tree(eq30);
    CHECK(tree.choice_count() == 2);
    const Ref S = ref(gate("S")), X = ref(gate("X")), D = ref(gate("D")), T = ref(gate("T")), I = ref(gate("I")),
              Z = ref(gate("Z"));
    auto expect = [&](const Ref& left, const Ref& mid) { return ref_add(S, ref_mul(ref_mul(left, ref_mul(mid, T)), T)); };
    CHECK(ref_diff(ref(resolve(tree, {0, 0})), expect(I, D)) < 1e-14);
    CHECK(ref_diff(ref(resolve(tree, {1, 0})), expect(X, D)) < 1e-14);
    CHECK(ref_diff(ref(resolve(tree, {0, 1})), expect(I, Z)) < 1e-14);
    CHECK(ref_diff(ref(resolve(tree, {1, 1})), expect(X, Z)) < 1e-14);
}

TEST_CASE("choice bits in unselected branches are still consumed") {
    const auto tree = parse_gate_tree("(// (// X Y) (// Z H))");
    CHECK(tree.choice_count() == 3);
    CHECK(resolve(tree, {0, 0, 1}) == gate("X"));
    CHECK(resolve(tree, {0, 1, 0}) == gate("Y"));
    CHECK(resolve(tree, {1, 1, 0}) == gate("Z"));
    CHECK(resolve(tree, {1, 0, 1}) == gate("H"));
}

TEST_CASE("strategy counts") {
    CHECK(enumerate_strategies(parse_gate_tree("(+ Y I)")).size() == 1);
    CHECK(enumerate_strategies(parse_gate_tree(eq30)).size() == 4);
    CHECK(enumerate_strategies(parse_gate_tree("(// (// X Y) (// Z H))")).size() == 8);
}

TEST_CASE("strategy count is 2^choices on random trees") {
    Rng rng{31};
    for (int i = 0; i < 300; ++i) {
        const auto tree = random_tree_of_depth(5, rng);
        const auto c = tree.choice_count();
        if (c > 10) continue;
        const auto s = enumerate_strategies(tree);
        REQUIRE(s.size() == (std::size_t{1} << c));
        // enumeration order: first choice is the most significant bit
        for (std::size_t idx = 0; idx < s.size(); ++idx)
            for (std::size_t j = 0; j < c; ++j) REQUIRE(s[idx].choices[j] == ((idx >> (c - 1 - j)) & 1U));
    }
}

TEST_CASE("enumeration cap") {
    const auto tree = parse_gate_tree("(// (// X Y) (// Z H))");
    CHECK_THROWS_AS(enumerate_strategies(tree, 2), EnumerationCapError);
    CHECK_NOTHROW(enumerate_strategies(tree, 3));
}

TEST_CASE("eigenvalues of I, Y + I and Z") {
    auto e = eigen2(gate("I"));
    CHECK(std::abs(e.first.lambda - 1.0) < 1e-15);
    CHECK(std::abs(e.second.lambda - 1.0) < 1e-15);

    e = eigen2(resolve(parse_gate_tree("(+ Y I)"), {}));
    const double hi = std::max(std::abs(e.first.lambda), std::abs(e.second.lambda));
    const double lo = std::min(std::abs(e.first.lambda), std::abs(e.second.lambda));
    CHECK(hi == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(lo < 1e-12);

    e = eigen2(gate("Z"));
    auto v_of = [&](double l) { return std::abs(e.first.lambda - l) < 1e-12 ? e.first.vector : e.second.vector; };
    CHECK(std::abs(std::abs(v_of(1.0)[0]) - 1.0) < 1e-12);
    CHECK(std::abs(v_of(1.0)[1]) < 1e-12);
    CHECK(std::abs(v_of(-1.0)[0]) < 1e-12);
    CHECK(std::abs(std::abs(v_of(-1.0)[1]) - 1.0) < 1e-12);
}

TEST_CASE("defective matrix is flagged") {
    const auto e = eigen2(CMatrix2{1.0, 1.0, 0.0, 1.0});
    CHECK(e.defective);
    CHECK(std::abs(e.first.lambda - 1.0) < 1e-12);
    CHECK(action_probabilities(CMatrix2{1.0, 1.0, 0.0, 1.0}).p1 == Catch::Approx(0.5));
}

TEST_CASE("eigen residual and identities over random gate trees") {
    Rng rng{1000};
    for (int i = 0; i < 1000; ++i) {
        const auto tree = random_tree_of_depth(6, rng);
        ChoiceVector bits(tree.choice_count());
        for (auto& b : bits) b = coin_flip(rng);
        const auto m = resolve(tree, bits);
        const auto e = eigen2(m);
        for (const auto& p : {e.first, e.second}) {
            const auto mv = m * p.vector;
            const double res = std::hypot(std::abs(mv[0] - p.lambda * p.vector[0]), std::abs(mv[1] - p.lambda * p.vector[1]));
            REQUIRE(res <= 1e-8);
            REQUIRE(std::abs(std::norm(p.vector[0]) + std::norm(p.vector[1]) - 1.0) < 1e-12);
        }
        REQUIRE(std::abs(e.first.lambda + e.second.lambda - m.trace()) <= 1e-8);
        REQUIRE(std::abs(e.first.lambda * e.second.lambda - m.det()) <= 1e-8);
        for (auto norm : {Normalization::squared_modulus, Normalization::modulus}) {
            const auto p = action_probabilities(m, norm);
            REQUIRE(p.p1 >= 0);
            REQUIRE(p.p2 >= 0);
            REQUIRE(p.p1 <= 1);
            REQUIRE(p.p2 <= 1);
            REQUIRE(std::abs(p.p1 + p.p2 - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("pure action probabilities") {
    const auto s1 = action_probabilities(resolve(parse_gate_tree("(+ Y I)"), {}));
    CHECK(s1.p1 == Catch::Approx(1.0).margin(1e-9));
    CHECK(s1.p2 == Catch::Approx(0.0).margin(1e-9));

    const auto tree = parse_gate_tree(eq30);
    const auto s2 = action_probabilities(resolve(tree, {1, 0}));
    CHECK(s2.p1 == Catch::Approx(0.0).margin(1e-9));
    CHECK(s2.p2 == Catch::Approx(1.0).margin(1e-9));
    const auto iz = action_probabilities(resolve(tree, {0, 1}));
    CHECK(iz.p1 == Catch::Approx(1.0).margin(1e-9));
    CHECK(iz.p2 == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("equal-modulus strategies split evenly") {
    const auto tree = parse_gate_tree(eq30);
    for (ChoiceVector bits : {ChoiceVector{0, 0}, ChoiceVector{1, 1}}) {
        const auto m = resolve(tree, bits);
        const auto e = eigen2(m);
        CHECK(std::abs(e.first.lambda) == Catch::Approx(std::abs(e.second.lambda)).epsilon(1e-12));
        const auto p = action_probabilities(m);
        CHECK(p.p1 == Catch::Approx(0.5).margin(1e-9));
        CHECK(p.p2 == Catch::Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("diagonal matrices map eigenvalues to actions by eigenvector") {
    auto p = action_probabilities(CMatrix2{2.0, 0.0, 0.0, 0.0});
    CHECK(p.p1 == 1.0);
    p = action_probabilities(CMatrix2{0.0, 0.0, 0.0, 2i});
    CHECK(p.p2 == 1.0);
    p = action_probabilities(CMatrix2{3.0, 0.0, 0.0, 1.0});
    CHECK(p.p1 == Catch::Approx(0.9));
    p = action_probabilities(CMatrix2{3.0, 0.0, 0.0, 1.0}, Normalization::modulus);
    CHECK(p.p1 == Catch::Approx(0.75));
    p = action_probabilities(CMatrix2{1.0, 0.0, 0.0, -3.0});
    CHECK(p.p2 == Catch::Approx(0.9));
}

TEST_CASE("zero matrix is degenerate") {
    const auto p = action_probabilities(CMatrix2::zero());
    CHECK(p.p1 == 0.5);
    CHECK(p.p2 == 0.5);
}

TEST_CASE("sample_action") {
    Rng rng{55};
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(sample_action(1.0, rng) == 1);
        REQUIRE(sample_action(0.0, rng) == 2);
    }
    int ones = 0;
    for (int i = 0; i < 10000; ++i) ones += sample_action(0.5, rng) == 1;
    CHECK(std::abs(ones / 10000.0 - 0.5) <= 0.02);
}

TEST_CASE("draw_strategy covers the enumeration") {
    const auto tree = parse_gate_tree(eq30);
    Rng rng{6};
    std::array<int, 4> counts{};
    for (int i = 0; i < 4000; ++i) {
        const auto s = draw_strategy(tree, rng);
        counts[static_cast<std::size_t>(s.choices[0] * 2 + s.choices[1])]++;
    }
    for (int c : counts) CHECK(std::abs(c - 1000) < 120);
}

TEST_CASE("gate tree text") {
    CHECK(to_text(parse_gate_tree("(+ Y I)")) == "(+ Y I)");
    CHECK(parse_gate_tree("(+ Y I)") == GateTree::node(GateOp::add, GateTree::leaf(Gate::Y), GateTree::leaf(Gate::I)));
    CHECK(to_text(parse_gate_tree(eq30)) == eq30);
    CHECK(parse_gate_tree(eq30).choice_count() == 2);
    CHECK_THROWS_AS(parse_gate_tree("(+ Y)"), ParseError);
    CHECK_THROWS_AS(parse_gate_tree("(+ Y I"), ParseError);
    CHECK_THROWS_AS(parse_gate_tree("(- Y I)"), ParseError);
    CHECK_THROWS_AS(parse_gate_tree("(+ Y Q)"), ParseError);
    CHECK_THROWS_AS(parse_gate_tree("(+ Y I) X"), ParseError);
    Rng rng{10};
    for (int i = 0; i < 300; ++i) {
        const auto t = random_tree_of_depth(6, rng);
        REQUIRE(parse_gate_tree(to_text(t)) == t);
    }
}

TEST_CASE("gate tree genetic operators") {
    GateTreeConfig cfg;
    Rng rng{21};
    cfg.init_depth_min = cfg.init_depth_max = 1;
    for (int i = 0; i < 50; ++i) REQUIRE(random_gate_tree(cfg, rng).size() == 1);

    const auto x = GateTree::leaf(Gate::X), y = GateTree::leaf(Gate::Y);
    auto [a, b] = crossover(x, y, GateTreeConfig{}, rng);
    CHECK(((a == x && b == y) || (a == y && b == x)));

    GateTreeConfig full;
    auto t = random_gate_tree(full, rng);
    for (int i = 0; i < 1000; ++i) {
        t = mutate(t, full, rng);
        REQUIRE(t.depth() <= full.max_depth);
        REQUIRE(well_formed<GateNode, GateNodeTraits>(t.nodes()));
        auto [c1, c2] = crossover(t, random_gate_tree(full, rng), full, rng);
        REQUIRE(c1.depth() <= full.max_depth);
        REQUIRE(c2.depth() <= full.max_depth);
        t = c1;
    }
}
