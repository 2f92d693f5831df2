#pragma once

// Generic machinery for trees stored as a flat prefix (Polish) node sequence.
// A subtree is always the contiguous range [i, subtree_end(i)), which makes
// crossover and mutation plain range splices.
//
// Node types plug in through a traits struct providing
//   static int arity(const Node&);

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "msci/random.hpp"

namespace msci {

template <class Node, class Traits>
std::size_t subtree_end(std::span<const Node> nodes, std::size_t i) {
    std::size_t pending = 1;
    while (pending > 0) {
        if (i >= nodes.size()) throw std::logic_error("malformed prefix tree");
        pending += static_cast<std::size_t>(Traits::arity(nodes[i])) - 1;
        ++i;
    }
    return i;
}

/// Depth of every node position; the root sits at depth 1.
template <class Node, class Traits>
std::vector<int> node_depths(std::span<const Node> nodes) {
    std::vector<int> depths(nodes.size());
    // stack of remaining child slots per open ancestor
    std::vector<int> open;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        depths[i] = static_cast<int>(open.size()) + 1;
        if (!open.empty()) --open.back();
        const int a = Traits::arity(nodes[i]);
        if (a > 0) open.push_back(a);
        while (!open.empty() && open.back() == 0) open.pop_back();
    }
    return depths;
}

template <class Node, class Traits>
int tree_depth(std::span<const Node> nodes) {
    const auto d = node_depths<Node, Traits>(nodes);
    return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
}

/// True when `nodes` is exactly one complete tree.
template <class Node, class Traits>
bool well_formed(std::span<const Node> nodes) {
    if (nodes.empty()) return false;
    std::size_t pending = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (pending == 0) return false;
        pending += static_cast<std::size_t>(Traits::arity(nodes[i])) - 1;
    }
    return pending == 0;
}

template <class Node>
struct PrimitiveSet {
    std::vector<Node> functions;
    std::vector<Node> terminals;
};

enum class InitMethod { grow, full };

/// Appends a random tree of depth <= max_depth. `full` places functions on
/// every level above the last; `grow` draws uniformly from all primitives.
template <class Node, class Traits>
void generate_tree(std::vector<Node>& out, const PrimitiveSet<Node>& prims, int max_depth, InitMethod method,
                   Rng& rng) {
    if (prims.terminals.empty()) throw std::invalid_argument("primitive set has no terminals");
    auto rec = [&](auto& self, int depth) -> void {
        const bool at_bottom = depth >= max_depth || prims.functions.empty();
        bool pick_function = false;
        if (!at_bottom) {
            if (method == InitMethod::full) {
                pick_function = true;
            } else {
                const auto total = prims.functions.size() + prims.terminals.size();
                pick_function = uniform_index(rng, total) < prims.functions.size();
            }
        }
        if (pick_function) {
            const Node& f = prims.functions[uniform_index(rng, prims.functions.size())];
            out.push_back(f);
            for (int c = 0; c < Traits::arity(f); ++c) self(self, depth + 1);
        } else {
            out.push_back(prims.terminals[uniform_index(rng, prims.terminals.size())]);
        }
    };
    rec(rec, 1);
}

/// Ramped half-and-half: depth uniform in [min_depth, max_depth], method 50/50.
template <class Node, class Traits>
std::vector<Node> ramped_tree(const PrimitiveSet<Node>& prims, int min_depth, int max_depth, Rng& rng) {
    if (min_depth < 1 || max_depth < min_depth) throw std::invalid_argument("bad init depth range");
    const int depth = min_depth + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(max_depth - min_depth + 1)));
    const auto method = coin_flip(rng) ? InitMethod::full : InitMethod::grow;
    std::vector<Node> out;
    generate_tree<Node, Traits>(out, prims, depth, method, rng);
    return out;
}

template <class Node>
std::vector<Node> splice(std::span<const Node> host, std::size_t begin, std::size_t end, std::span<const Node> insert) {
    std::vector<Node> out;
    out.reserve(host.size() - (end - begin) + insert.size());
    out.insert(out.end(), host.begin(), host.begin() + static_cast<std::ptrdiff_t>(begin));
    out.insert(out.end(), insert.begin(), insert.end());
    out.insert(out.end(), host.begin() + static_cast<std::ptrdiff_t>(end), host.end());
    return out;
}

/// Swaps uniformly chosen subtrees. An offspring deeper than max_depth is
/// replaced by the parent that donated its root.
template <class Node, class Traits>
std::pair<std::vector<Node>, std::vector<Node>> subtree_crossover(std::span<const Node> a, std::span<const Node> b,
                                                                  int max_depth, Rng& rng) {
    const std::size_t ia = uniform_index(rng, a.size());
    const std::size_t ib = uniform_index(rng, b.size());
    const std::size_t ea = subtree_end<Node, Traits>(a, ia);
    const std::size_t eb = subtree_end<Node, Traits>(b, ib);
    auto c1 = splice<Node>(a, ia, ea, b.subspan(ib, eb - ib));
    auto c2 = splice<Node>(b, ib, eb, a.subspan(ia, ea - ia));
    if (tree_depth<Node, Traits>(c1) > max_depth) c1.assign(a.begin(), a.end());
    if (tree_depth<Node, Traits>(c2) > max_depth) c2.assign(b.begin(), b.end());
    return {std::move(c1), std::move(c2)};
}

/// Replaces a uniformly chosen subtree with a fresh grow tree that keeps the
/// whole tree within max_depth.
template <class Node, class Traits>
std::vector<Node> subtree_mutation(std::span<const Node> tree, const PrimitiveSet<Node>& prims, int init_max_depth,
                                   int max_depth, Rng& rng) {
    const std::size_t i = uniform_index(rng, tree.size());
    const std::size_t e = subtree_end<Node, Traits>(tree, i);
    const int at = node_depths<Node, Traits>(tree)[i];
    const int room = std::max(1, std::min(init_max_depth, max_depth - at + 1));
    std::vector<Node> fresh;
    generate_tree<Node, Traits>(fresh, prims, room, InitMethod::grow, rng);
    return splice<Node>(tree, i, e, fresh);
}

}  // namespace msci
