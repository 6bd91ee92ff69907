#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "error.hpp"
#include "structure.hpp"

namespace folab {

enum class SubdivMode { Exact, AtMost };

struct SubdivisionWitness {
    int clique = 0; // number of principal vertices
    int p = 0;
    SubdivMode mode = SubdivMode::Exact;
    std::vector<Element> principals;
    // (i, j) with i < j indexing principals; value = interior vertices in path order.
    std::map<std::pair<int, int>, std::vector<Element>> paths;
};

struct SubdivOptions {
    int max_n = 200;
    int max_clique = 5;
    int max_p = 3;
    uint64_t step_budget = 20'000'000;
};

namespace detail {

struct SubdivSearch {
    const GaifmanGraph& g;
    int clique, p;
    SubdivMode mode;
    uint64_t budget;
    std::vector<Element> order;   // candidate principals, by descending degree
    std::vector<char> used;
    std::vector<Element> principals;
    std::vector<std::pair<int, int>> pair_order;
    std::map<std::pair<int, int>, std::vector<Element>> paths;
    bool found = false;

    void charge() {
        if (budget == 0)
            fail(ErrorKind::Budget, "subdivision search step budget exceeded; no verdict");
        --budget;
    }

    bool connect(size_t pair_idx) {
        charge();
        if (pair_idx == pair_order.size()) return true;
        auto [i, j] = pair_order[pair_idx];
        // Shortest interior first; each complete routing recurses into the
        // next pair and unwinds here when the rest cannot be completed.
        std::vector<int> lengths;
        if (mode == SubdivMode::Exact) lengths.push_back(p);
        else
            for (int l = 0; l <= p; ++l) lengths.push_back(l);
        for (int len : lengths) {
            std::vector<Element> interior;
            if (route_enum(principals[i], principals[j], len, interior, pair_idx, i, j)) return true;
        }
        return false;
    }

    bool route_enum(Element at, Element target, int remaining, std::vector<Element>& interior,
                    size_t pair_idx, int i, int j) {
        charge();
        if (remaining == 0) {
            if (!g.adjacent(at, target)) return false;
            paths[{i, j}] = interior;
            if (connect(pair_idx + 1)) return true;
            paths.erase({i, j});
            return false;
        }
        for (Element w : g.adj[at]) {
            if (used[w] || w == target) continue;
            used[w] = 1;
            interior.push_back(w);
            if (route_enum(w, target, remaining - 1, interior, pair_idx, i, j)) return true;
            interior.pop_back();
            used[w] = 0;
        }
        return false;
    }

    bool choose(size_t from, int left) {
        charge();
        if (left == 0) {
            for (Element v : principals) used[v] = 1;
            bool ok = connect(0);
            if (!ok)
                for (Element v : principals) used[v] = 0;
            return ok;
        }
        for (size_t i = from; i + static_cast<size_t>(left) <= order.size(); ++i) {
            Element v = order[i];
            if (g.degree(v) < clique - 1) break; // sorted by degree: nothing further qualifies
            principals.push_back(v);
            if (choose(i + 1, left - 1)) return true;
            principals.pop_back();
        }
        return false;
    }
};

} // namespace detail

// Searches the Gaifman graph for `clique` principal vertices pairwise joined
// by internally disjoint paths with exactly (or at most) p interior vertices.
// Principals are tried in descending-degree order; paths per pair shortest
// first. Returns nothing when the search space is exhausted; budget overruns
// raise instead, so "none" always means "none exists".
inline std::optional<SubdivisionWitness> find_subdivision(const Structure& s, int clique, int p,
                                                          SubdivMode mode, SubdivOptions opt = {}) {
    if (clique < 2) fail(ErrorKind::Precondition, "need at least 2 principal vertices");
    if (p < 0) fail(ErrorKind::Precondition, "p must be >= 0");
    if (s.size() > opt.max_n)
        fail(ErrorKind::Budget, "structure size " + std::to_string(s.size()) + " above search cap " +
                                    std::to_string(opt.max_n));
    if (clique > opt.max_clique)
        fail(ErrorKind::Budget, "clique size above search cap " + std::to_string(opt.max_clique));
    if (p > opt.max_p)
        fail(ErrorKind::Budget, "subdivision depth above search cap " + std::to_string(opt.max_p));

    const GaifmanGraph& g = s.gaifman();
    detail::SubdivSearch search{g, clique, p, mode, opt.step_budget, {}, {}, {}, {}, {}, false};
    search.order.resize(g.n);
    for (int v = 0; v < g.n; ++v) search.order[v] = v;
    std::sort(search.order.begin(), search.order.end(), [&](Element a, Element b) {
        if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
        return a < b;
    });
    search.used.assign(g.n, 0);
    for (int i = 0; i < clique; ++i)
        for (int j = i + 1; j < clique; ++j) search.pair_order.emplace_back(i, j);

    if (!search.choose(0, clique)) return std::nullopt;
    SubdivisionWitness w;
    w.clique = clique;
    w.p = p;
    w.mode = mode;
    w.principals = search.principals;
    w.paths = std::move(search.paths);
    return w;
}

// Re-checks a witness against the graph from scratch.
inline bool verify_subdivision(const GaifmanGraph& g, const SubdivisionWitness& w) {
    if (static_cast<int>(w.principals.size()) != w.clique || w.clique < 2 || w.p < 0) return false;
    std::vector<char> seen(g.n, 0);
    for (Element v : w.principals) {
        if (v < 0 || v >= g.n || seen[v]) return false;
        seen[v] = 1;
    }
    if (static_cast<int>(w.paths.size()) != w.clique * (w.clique - 1) / 2) return false;
    for (int i = 0; i < w.clique; ++i)
        for (int j = i + 1; j < w.clique; ++j) {
            auto it = w.paths.find({i, j});
            if (it == w.paths.end()) return false;
            const auto& interior = it->second;
            int len = static_cast<int>(interior.size());
            if (w.mode == SubdivMode::Exact ? len != w.p : len > w.p) return false;
            Element prev = w.principals[i];
            for (Element v : interior) {
                if (v < 0 || v >= g.n || seen[v]) return false;
                seen[v] = 1;
                if (!g.adjacent(prev, v)) return false;
                prev = v;
            }
            if (!g.adjacent(prev, w.principals[j])) return false;
        }
    return true;
}

} // namespace folab
