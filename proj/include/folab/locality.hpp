#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "eval.hpp"
#include "formula.hpp"
#include "rng.hpp"
#include "structure.hpp"

namespace folab {

struct TypeClass {
    std::string code;             // canonical rooted-ball description
    std::vector<Element> members; // ascending
    double frequency = 0;         // total weight of members
};

struct TypePartition {
    int radius = 0;
    std::vector<TypeClass> classes; // sorted by code
    std::vector<int> class_of;      // element -> class index
};

struct LocalTypeOptions {
    int ball_budget = 12;              // max elements in any ball
    uint64_t label_budget = 2'000'000; // canonical-search nodes per call
};

namespace detail {

// Induced rooted ball with local element ids 0..b-1 (rank order in the ball).
struct LocalView {
    int b = 0;
    int root = 0;
    std::vector<std::pair<std::string, std::vector<Tuple>>> rels; // symbol-sorted
    std::vector<std::vector<int>> adj;
};

inline LocalView make_local_view(const Structure& s, const std::vector<Element>& ball_elems, Element root) {
    LocalView v;
    v.b = static_cast<int>(ball_elems.size());
    std::map<Element, int> rank;
    for (int i = 0; i < v.b; ++i) rank[ball_elems[i]] = i;
    v.root = rank.at(root);
    std::vector<std::set<int>> nb(v.b);
    for (const auto& decl : s.signature().decls()) {
        std::vector<Tuple> local;
        for (const Tuple& t : s.tuples(decl.name)) {
            Tuple m;
            m.reserve(t.size());
            bool inside = true;
            for (Element e : t) {
                auto it = rank.find(e);
                if (it == rank.end()) { inside = false; break; }
                m.push_back(it->second);
            }
            if (!inside) continue;
            for (size_t i = 0; i < m.size(); ++i)
                for (size_t j = i + 1; j < m.size(); ++j)
                    if (m[i] != m[j]) {
                        nb[m[i]].insert(m[j]);
                        nb[m[j]].insert(m[i]);
                    }
            local.push_back(std::move(m));
        }
        std::sort(local.begin(), local.end());
        v.rels.emplace_back(decl.name, std::move(local));
    }
    v.adj.resize(v.b);
    for (int i = 0; i < v.b; ++i) v.adj[i].assign(nb[i].begin(), nb[i].end());
    return v;
}

// Color refinement: each round an element's key is (its color, the multiset of
// colored tuple slots it fills, the multiset of neighbor colors). Splits only,
// so it reaches a fixpoint.
inline int refine_colors(const LocalView& v, std::vector<int>& colors) {
    int classes = *std::max_element(colors.begin(), colors.end()) + 1;
    while (true) {
        std::vector<std::vector<int>> keys(v.b);
        for (int e = 0; e < v.b; ++e) keys[e].push_back(colors[e]);
        for (size_t r = 0; r < v.rels.size(); ++r) {
            std::vector<std::vector<std::vector<int>>> sigs(v.b);
            for (const Tuple& t : v.rels[r].second) {
                std::vector<int> tuple_colors;
                tuple_colors.reserve(t.size());
                for (int e : t) tuple_colors.push_back(colors[e]);
                for (size_t pos = 0; pos < t.size(); ++pos) {
                    std::vector<int> sig{static_cast<int>(r), static_cast<int>(pos)};
                    sig.insert(sig.end(), tuple_colors.begin(), tuple_colors.end());
                    sigs[t[pos]].push_back(std::move(sig));
                }
            }
            for (int e = 0; e < v.b; ++e) {
                std::sort(sigs[e].begin(), sigs[e].end());
                keys[e].push_back(-1);
                for (const auto& sig : sigs[e]) {
                    keys[e].insert(keys[e].end(), sig.begin(), sig.end());
                    keys[e].push_back(-2);
                }
            }
        }
        for (int e = 0; e < v.b; ++e) {
            std::vector<int> nbc;
            nbc.reserve(v.adj[e].size());
            for (int w : v.adj[e]) nbc.push_back(colors[w]);
            std::sort(nbc.begin(), nbc.end());
            keys[e].push_back(-3);
            keys[e].insert(keys[e].end(), nbc.begin(), nbc.end());
        }
        std::vector<int> order(v.b);
        for (int e = 0; e < v.b; ++e) order[e] = e;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return keys[a] < keys[b]; });
        std::vector<int> fresh(v.b);
        int c = 0;
        for (int i = 0; i < v.b; ++i) {
            if (i > 0 && keys[order[i]] != keys[order[i - 1]]) ++c;
            fresh[order[i]] = c;
        }
        int fresh_classes = c + 1;
        colors = std::move(fresh);
        if (fresh_classes == classes) return classes;
        classes = fresh_classes;
    }
}

inline std::string encode_discrete(const LocalView& v, const std::vector<int>& colors) {
    std::string out = "b" + std::to_string(v.b) + "|r" + std::to_string(colors[v.root]);
    for (const auto& [name, tuples] : v.rels) {
        out += "|" + name + ":";
        std::vector<Tuple> mapped;
        mapped.reserve(tuples.size());
        for (const Tuple& t : tuples) {
            Tuple m;
            m.reserve(t.size());
            for (int e : t) m.push_back(colors[e]);
            mapped.push_back(std::move(m));
        }
        std::sort(mapped.begin(), mapped.end());
        for (size_t i = 0; i < mapped.size(); ++i) {
            if (i) out += ";";
            for (size_t j = 0; j < mapped[i].size(); ++j) {
                if (j) out += ",";
                out += std::to_string(mapped[i][j]);
            }
        }
    }
    return out;
}

// Individualization-refinement canonical form: the lexicographically least
// discrete encoding over the search tree. Isomorphic rooted balls produce
// identical strings because every step depends only on the colored structure.
struct CanonicalLabeler {
    const LocalView& v;
    uint64_t* budget;
    std::string best;
    bool have = false;

    void search(std::vector<int> colors) {
        if (*budget == 0)
            fail(ErrorKind::Budget, "canonical labeling budget exceeded; ball too symmetric or too large");
        --*budget;
        int classes = refine_colors(v, colors);
        if (classes == v.b) {
            std::string code = encode_discrete(v, colors);
            if (!have || code < best) {
                best = std::move(code);
                have = true;
            }
            return;
        }
        int target = -1;
        for (int c = 0; c < classes && target == -1; ++c) {
            int count = 0;
            for (int e = 0; e < v.b; ++e) count += colors[e] == c;
            if (count >= 2) target = c;
        }
        for (int e = 0; e < v.b; ++e) {
            if (colors[e] != target) continue;
            std::vector<int> child = colors;
            child[e] = classes; // fresh singleton color
            search(std::move(child));
        }
    }
};

inline std::string canonical_rooted_code(const LocalView& v, uint64_t* budget) {
    std::vector<int> colors(v.b, 1);
    colors[v.root] = 0;
    CanonicalLabeler lab{v, budget, "", false};
    lab.search(std::move(colors));
    return lab.best;
}

} // namespace detail

inline TypePartition local_types(const Structure& s, int radius, LocalTypeOptions opt = {}) {
    if (radius < 0) fail(ErrorKind::Precondition, "radius must be >= 0");
    TypePartition tp;
    tp.radius = radius;
    tp.class_of.assign(s.size(), -1);
    uint64_t budget = opt.label_budget;
    std::map<std::string, std::vector<Element>> by_code;
    for (Element v = 0; v < s.size(); ++v) {
        std::vector<Element> bl = ball(s, v, radius);
        if (static_cast<int>(bl.size()) > opt.ball_budget)
            fail(ErrorKind::Budget, "ball of element " + std::to_string(v) + " has " +
                                        std::to_string(bl.size()) + " elements; canonical labeling budget is " +
                                        std::to_string(opt.ball_budget));
        detail::LocalView view = detail::make_local_view(s, bl, v);
        by_code[detail::canonical_rooted_code(view, &budget)].push_back(v);
    }
    for (const auto& [code, members] : by_code) {
        TypeClass cls;
        cls.code = code;
        cls.members = members;
        if (s.uniform()) {
            cls.frequency = static_cast<double>(members.size()) / s.size();
        } else {
            double acc = 0;
            for (Element e : members) acc += s.weight(e);
            cls.frequency = acc;
        }
        for (Element e : members) tp.class_of[e] = static_cast<int>(tp.classes.size());
        tp.classes.push_back(std::move(cls));
    }
    return tp;
}

// Exact rational mass of one class, for cross-checks.
inline BigRational class_mass_rational(const Structure& s, const TypeClass& cls) {
    if (s.uniform()) return BigRational(cls.members.size()) / s.size();
    BigRational acc(0);
    for (Element e : cls.members) acc += BigRational(s.weight(e));
    return acc;
}

// Rescales weights within each type class so class masses land on `targets`.
// Relative weights inside a class are preserved; zero stays zero.
inline Structure reweight_to_targets(const Structure& s, const TypePartition& tp,
                                     const std::vector<double>& targets) {
    if (targets.size() != tp.classes.size())
        fail(ErrorKind::Usage, "got " + std::to_string(targets.size()) + " targets for " +
                                   std::to_string(tp.classes.size()) + " classes");
    double sum = 0;
    for (double t : targets) {
        if (!(t >= 0) || !std::isfinite(t)) fail(ErrorKind::Precondition, "targets must be finite and non-negative");
        sum += t;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance)
        fail(ErrorKind::Precondition, "targets must sum to 1 (got " + std::to_string(sum) + ")");
    std::vector<double> factor(targets.size(), 0.0);
    for (size_t k = 0; k < targets.size(); ++k) {
        double mass = tp.classes[k].frequency;
        if (mass == 0) {
            if (targets[k] > 0)
                fail(ErrorKind::Precondition, "class " + std::to_string(k) +
                                                  " has zero mass but positive target; nothing to rescale");
            factor[k] = 0;
        } else {
            factor[k] = targets[k] / mass; // exactly 1.0 when target == mass
        }
    }
    std::vector<double> w(s.size());
    for (Element v = 0; v < s.size(); ++v) w[v] = s.weight(v) * factor[tp.class_of[v]];
    return s.with_weights(std::move(w));
}

struct LocalProductOptions {
    LocalTypeOptions types;
    EvalOptions eval;
    uint64_t check_seed = 0xF01AB; // spot-check assignments for the locality precondition
};

struct LocalProductResult {
    TypePartition types;
    std::vector<std::vector<int>> support; // satisfying class-index tuples
    double tilde = 0;  // sum over support of products of class frequencies
    double exact = 0;  // true pairing
    double bound = 0;  // C(p,2) * <dist<=2d(x1,x2)>
    BigRational tilde_q, exact_q, bound_q;
};

// Product-form estimate of a d-local formula's pairing from the type
// partition, with the pair-collision error bound. The estimate treats
// coordinates as independent; the bound covers assignments whose coordinates
// interact (two of them within distance 2d).
inline LocalProductResult local_product_estimate(const Structure& s, const FormulaPtr& f, int radius,
                                                 LocalProductOptions opt = {}) {
    FormulaInfo info = formula_info(f);
    const int p = static_cast<int>(info.free.size());
    if (p < 1) fail(ErrorKind::Precondition, "formula must have at least one free variable");
    if (info.uses_weight_quantifier)
        fail(ErrorKind::Precondition, "weight quantifier not supported in local product estimates");
    check_symbols(s, info);

    LocalProductResult out;
    out.types = local_types(s, radius, opt.types);
    const int n = s.size();

    // Spot check d-locality: evaluation must agree with evaluation restricted
    // to the union of the assigned elements' d-balls.
    SplitMix64 g(opt.check_seed);
    for (int trial = 0; trial < 5; ++trial) {
        Assignment a;
        std::vector<Element> chosen;
        for (int j = 0; j < p; ++j) {
            Element e = static_cast<Element>(g.next() % n);
            a.emplace_back(info.free[j], e);
            chosen.push_back(e);
        }
        std::vector<Element> region;
        for (Element e : chosen) {
            std::vector<Element> bl = ball(s, e, radius);
            region.insert(region.end(), bl.begin(), bl.end());
        }
        std::sort(region.begin(), region.end());
        region.erase(std::unique(region.begin(), region.end()), region.end());
        Structure sub = induced_substructure(s, region);
        Assignment sub_a;
        for (int j = 0; j < p; ++j) {
            auto it = std::lower_bound(region.begin(), region.end(), chosen[j]);
            sub_a.emplace_back(info.free[j], static_cast<Element>(it - region.begin()));
        }
        bool global = satisfies(s, f, a, opt.eval);
        bool local = satisfies(sub, f, sub_a, opt.eval);
        if (global != local)
            fail(ErrorKind::Precondition, "formula is not " + std::to_string(radius) +
                                              "-local: global and ball-restricted evaluation disagree");
    }

    // One representative ball per class; evaluate f on disjoint unions of
    // representative balls, coordinate j rooted in component j. Mark symbols
    // are aliased to ordinary unary names first: a union whose components each
    // contain the marked element is a legal scratch model for independent
    // coordinates, not a marked structure, so the one-element rule must not
    // apply to it.
    std::map<std::string, std::string> alias;
    std::set<std::string> taken;
    for (const auto& decl : s.signature().decls()) taken.insert(decl.name);
    for (const auto& decl : s.signature().decls())
        if (is_mark_symbol(decl.name)) {
            std::string fresh = decl.name + "_c";
            while (taken.count(fresh)) fresh += "_";
            taken.insert(fresh);
            alias[decl.name] = fresh;
        }
    Structure scratch = s;
    FormulaPtr scratch_f = f;
    if (!alias.empty()) {
        StructureData d = s.to_data();
        for (const auto& [from, to] : alias) {
            auto rit = d.relations.find(from);
            if (rit != d.relations.end()) {
                d.relations[to] = std::move(rit->second);
                d.relations.erase(rit);
            }
            auto ait = d.arities.find(from);
            if (ait != d.arities.end()) {
                d.arities[to] = ait->second;
                d.arities.erase(ait);
            }
        }
        scratch = Structure::from_data(d);
        scratch_f = rename_relations(f, alias);
    }

    const int K = static_cast<int>(out.types.classes.size());
    std::vector<Structure> rep_struct;
    std::vector<int> rep_root;
    rep_struct.reserve(K);
    for (int k = 0; k < K; ++k) {
        Element rep = out.types.classes[k].members.front();
        std::vector<Element> bl = ball(s, rep, radius);
        auto it = std::lower_bound(bl.begin(), bl.end(), rep);
        rep_root.push_back(static_cast<int>(it - bl.begin()));
        rep_struct.push_back(induced_substructure(scratch, bl));
    }

    std::vector<BigRational> freq_q(K);
    for (int k = 0; k < K; ++k) freq_q[k] = class_mass_rational(s, out.types.classes[k]);

    std::vector<int> idx(p, 0);
    out.tilde_q = 0;
    while (true) {
        std::vector<Structure> parts;
        Assignment a;
        int offset = 0;
        for (int j = 0; j < p; ++j) {
            parts.push_back(rep_struct[idx[j]]);
            a.emplace_back(info.free[j], offset + rep_root[idx[j]]);
            offset += rep_struct[idx[j]].size();
        }
        Structure united = disjoint_union(parts);
        if (satisfies(united, scratch_f, a, opt.eval)) {
            out.support.push_back(idx);
            double term = 1;
            BigRational term_q(1);
            for (int j = 0; j < p; ++j) {
                term *= out.types.classes[idx[j]].frequency;
                term_q *= freq_q[idx[j]];
            }
            out.tilde += term;
            out.tilde_q += term_q;
        }
        int j = p - 1;
        while (j >= 0 && idx[j] == K - 1) idx[j--] = 0;
        if (j < 0) break;
        ++idx[j];
    }

    out.exact = detail::pairing_value<double>(s, f, info.free, opt.eval);
    out.exact_q = detail::pairing_value<BigRational>(s, f, info.free, opt.eval);

    // C(p,2) * <dist<=2d(x1,x2)>, computed center by center.
    const long long pairs = static_cast<long long>(p) * (p - 1) / 2;
    if (s.uniform()) {
        unsigned long long total = 0;
        for (Element v = 0; v < n; ++v) total += ball(s, v, 2 * radius).size();
        double frac = static_cast<double>(total) / (static_cast<double>(n) * static_cast<double>(n));
        out.bound = static_cast<double>(pairs) * frac;
        out.bound_q = BigRational(pairs) * BigRational(total) / (BigRational(n) * BigRational(n));
    } else {
        double acc = 0;
        BigRational acc_q(0);
        for (Element v = 0; v < n; ++v) {
            double mass = 0;
            BigRational mass_q(0);
            for (Element u : ball(s, v, 2 * radius)) {
                mass += s.weight(u);
                mass_q += BigRational(s.weight(u));
            }
            acc += s.weight(v) * mass;
            acc_q += BigRational(s.weight(v)) * mass_q;
        }
        out.bound = static_cast<double>(pairs) * acc;
        out.bound_q = BigRational(pairs) * acc_q;
    }
    return out;
}

} // namespace folab
