#pragma once

// Slow reference implementations used only by the tests. Everything here is
// recomputed from scratch on each call (fresh BFS per distance atom, full
// permutation search for ball isomorphism, exhaustive path search) so a bug in
// the library's caching or pruning cannot hide behind shared code.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <folab/folab.hpp>

namespace oracle {

using folab::BigRational;
using folab::Element;
using folab::FKind;
using folab::FormulaPtr;
using folab::Structure;
using folab::Tuple;

inline int bfs_distance(const folab::GaifmanGraph& g, Element u, Element v) {
    if (u == v) return 0;
    std::vector<int> dist(g.n, -1);
    dist[u] = 0;
    std::queue<Element> q;
    q.push(u);
    while (!q.empty()) {
        Element x = q.front();
        q.pop();
        for (Element y : g.adj[x])
            if (dist[y] < 0) {
                dist[y] = dist[x] + 1;
                if (y == v) return dist[y];
                q.push(y);
            }
    }
    return -1;
}

inline bool sat(const Structure& s, const folab::Formula& f, std::map<std::string, Element>& env) {
    auto with = [&](const std::string& v, Element e, const folab::Formula& body) {
        std::optional<Element> old;
        auto it = env.find(v);
        if (it != env.end()) old = it->second;
        env[v] = e;
        bool r = sat(s, body, env);
        if (old) env[v] = *old;
        else env.erase(v);
        return r;
    };
    switch (f.kind) {
    case FKind::True: return true;
    case FKind::False: return false;
    case FKind::Equal: return env.at(f.vars[0]) == env.at(f.vars[1]);
    case FKind::Rel: {
        Tuple t;
        for (const auto& v : f.vars) t.push_back(env.at(v));
        return s.holds(f.name, t);
    }
    case FKind::Dist: {
        int d = bfs_distance(s.gaifman(), env.at(f.vars[0]), env.at(f.vars[1]));
        bool within = d >= 0 && d <= f.radius;
        return f.beyond ? !within : within;
    }
    case FKind::Not: return !sat(s, *f.kids[0], env);
    case FKind::And: return sat(s, *f.kids[0], env) && sat(s, *f.kids[1], env);
    case FKind::Or: return sat(s, *f.kids[0], env) || sat(s, *f.kids[1], env);
    case FKind::Implies: return !sat(s, *f.kids[0], env) || sat(s, *f.kids[1], env);
    case FKind::Exists:
        for (Element e = 0; e < s.size(); ++e)
            if (with(f.name, e, *f.kids[0])) return true;
        return false;
    case FKind::Forall:
        for (Element e = 0; e < s.size(); ++e)
            if (!with(f.name, e, *f.kids[0])) return false;
        return true;
    case FKind::Qm:
        for (Element e = 0; e < s.size(); ++e)
            if (s.weight(e) > 0 && with(f.name, e, *f.kids[0])) return true;
        return false;
    }
    return false;
}

inline bool satisfies(const Structure& s, const FormulaPtr& f, const folab::Assignment& a) {
    std::map<std::string, Element> env;
    for (const auto& [k, v] : a) env[k] = v;
    return sat(s, *f, env);
}

struct Pairing {
    long long hits = 0;
    long long total = 1;
    BigRational mass = 0; // exact probability
    double value = 0;
    std::vector<std::vector<Element>> satisfying; // enumeration order
};

// Full enumeration over the free variables, first variable outermost.
inline Pairing pairing(const Structure& s, const FormulaPtr& f) {
    auto info = folab::formula_info(f);
    const auto& free = info.free;
    const size_t p = free.size();
    const int n = s.size();
    Pairing out;
    if (p == 0) {
        std::map<std::string, Element> env;
        bool ok = sat(s, *f, env);
        out.hits = ok ? 1 : 0;
        out.mass = out.hits;
        out.value = static_cast<double>(out.hits);
        if (ok) out.satisfying.push_back({});
        return out;
    }
    long long total = 1;
    for (size_t i = 0; i < p; ++i) total *= n;
    out.total = total;
    std::vector<Element> digits(p);
    for (long long code = 0; code < total; ++code) {
        long long c = code;
        for (size_t i = p; i-- > 0;) {
            digits[i] = static_cast<Element>(c % n);
            c /= n;
        }
        std::map<std::string, Element> env;
        for (size_t i = 0; i < p; ++i) env[free[i]] = digits[i];
        if (sat(s, *f, env)) {
            ++out.hits;
            out.satisfying.push_back(digits);
            BigRational w = 1;
            for (Element e : digits) w *= BigRational(s.weight(e));
            out.mass += w;
        }
    }
    if (s.uniform()) {
        out.mass = BigRational(out.hits) / BigRational(total);
        out.value = static_cast<double>(out.hits) / static_cast<double>(total);
    } else {
        out.value = out.mass.convert_to<double>();
    }
    return out;
}

// Rooted isomorphism by exhaustive bijection search. Only sensible for tiny
// structures (ball-sized).
inline bool rooted_isomorphic(const Structure& a, Element ra, const Structure& b, Element rb) {
    const int n = a.size();
    if (n != b.size()) return false;
    for (const auto& decl : a.signature().decls()) {
        auto k = b.signature().arity(decl.name);
        if (a.tuples(decl.name).empty() && !k) continue;
        if (!k || *k != decl.arity) return false;
        if (a.tuples(decl.name).size() != b.tuples(decl.name).size()) return false;
    }
    for (const auto& decl : b.signature().decls())
        if (!a.signature().has(decl.name) && !b.tuples(decl.name).empty()) return false;

    std::vector<Element> perm(n, -1);
    std::vector<char> taken(n, 0);
    perm[ra] = rb;
    taken[rb] = 1;
    auto check = [&]() {
        for (const auto& decl : a.signature().decls()) {
            const auto& tb = b.tuples(decl.name);
            for (const Tuple& t : a.tuples(decl.name)) {
                Tuple img(t.size());
                for (size_t i = 0; i < t.size(); ++i) img[i] = perm[t[i]];
                if (!tb.count(img)) return false;
            }
        }
        return true;
    };
    std::function<bool(int)> place = [&](int v) -> bool {
        if (v == n) return check();
        if (perm[v] >= 0) return place(v + 1);
        for (int u = 0; u < n; ++u) {
            if (taken[u]) continue;
            perm[v] = u;
            taken[u] = 1;
            if (place(v + 1)) return true;
            perm[v] = -1;
            taken[u] = 0;
        }
        return false;
    };
    return place(0);
}

// Heaviest closed d-ball, recomputed with its own BFS. Mirrors the library
// contract exactly: excluded vertices neither appear nor relay, ball masses
// are summed in ascending element order, and uniform fractions are a single
// integer count divided once.
inline double max_ball_fraction(const Structure& s, int radius, const std::vector<char>* excluded = nullptr) {
    const auto& g = s.gaifman();
    double best = 0;
    size_t best_count = 0;
    for (Element v = 0; v < g.n; ++v) {
        if (excluded && (*excluded)[v]) continue;
        std::vector<int> dist(g.n, -1);
        dist[v] = 0;
        std::queue<Element> q;
        q.push(v);
        std::vector<Element> members;
        while (!q.empty()) {
            Element x = q.front();
            q.pop();
            members.push_back(x);
            if (dist[x] == radius) continue;
            for (Element y : g.adj[x]) {
                if (dist[y] >= 0 || (excluded && (*excluded)[y])) continue;
                dist[y] = dist[x] + 1;
                q.push(y);
            }
        }
        if (s.uniform()) {
            best_count = std::max(best_count, members.size());
        } else {
            std::sort(members.begin(), members.end());
            double mass = 0;
            for (Element x : members) mass += s.weight(x);
            best = std::max(best, mass);
        }
    }
    if (s.uniform()) return static_cast<double>(best_count) / s.size();
    return best;
}

// Exhaustive subdivision decision: all principal sets, all interior routings,
// full cross-pair backtracking.
inline bool subdivision_exists(const Structure& s, int clique, int p, bool at_most) {
    const auto& g = s.gaifman();
    if (g.n < clique) return false;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < clique; ++i)
        for (int j = i + 1; j < clique; ++j) pairs.emplace_back(i, j);
    std::vector<Element> principals;
    std::vector<char> used(g.n, 0);

    std::function<bool(size_t)> route_pairs = [&](size_t pi) -> bool {
        if (pi == pairs.size()) return true;
        auto [i, j] = pairs[pi];
        std::function<bool(Element, int)> walk = [&](Element at, int left) -> bool {
            if (left == 0) {
                if (!g.adjacent(at, principals[j])) return false;
                return route_pairs(pi + 1);
            }
            for (Element w : g.adj[at]) {
                if (used[w] || w == principals[j]) continue;
                used[w] = 1;
                if (walk(w, left - 1)) return true;
                used[w] = 0;
            }
            return false;
        };
        for (int len = at_most ? 0 : p; len <= p; ++len)
            if (walk(principals[i], len)) return true;
        return false;
    };
    std::function<bool(Element, int)> pick = [&](Element from, int left) -> bool {
        if (left == 0) {
            for (Element v : principals) used[v] = 1;
            bool ok = route_pairs(0);
            for (Element v : principals) used[v] = 0;
            return ok;
        }
        for (Element v = from; v + left <= g.n; ++v) {
            principals.push_back(v);
            if (pick(v + 1, left - 1)) return true;
            principals.pop_back();
        }
        return false;
    };
    return pick(0, clique);
}

} // namespace oracle
