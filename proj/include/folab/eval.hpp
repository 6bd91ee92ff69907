#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "error.hpp"
#include "formula.hpp"
#include "rng.hpp"
#include "structure.hpp"

namespace folab {

// Exact arithmetic cross-check type: every double weight is a dyadic rational,
// so sums and products of weights are representable exactly.
using BigRational = boost::multiprecision::cpp_rational;

struct EvalOptions {
    // Work units (atom evaluations plus quantifier iterations) before the
    // evaluation is abandoned with a budget error.
    uint64_t work_budget = 100'000'000ULL;
};

using Assignment = std::vector<std::pair<std::string, Element>>;

// Checks every relation atom in f against the structure's signature. Mark
// symbols may be absent (they read as empty); anything else unknown is an
// error, as is an arity mismatch.
inline void check_symbols(const Structure& s, const FormulaInfo& info) {
    for (const auto& [name, arity] : info.symbols) {
        auto declared = s.signature().arity(name);
        if (!declared) {
            if (is_mark_symbol(name)) {
                if (arity != 1) fail(ErrorKind::Validation, "mark symbol " + name + " used with arity > 1");
                continue;
            }
            fail(ErrorKind::Validation, "formula uses symbol " + name + " absent from the structure");
        }
        if (*declared != arity)
            fail(ErrorKind::Validation, "symbol " + name + ": formula arity " + std::to_string(arity) +
                                            " vs structure arity " + std::to_string(*declared));
    }
}

class Evaluator {
public:
    explicit Evaluator(const Structure& s, EvalOptions opt = {}) : s_(s), opt_(opt) {}

    bool satisfies(const FormulaPtr& f, const Assignment& assignment) {
        env_ = assignment;
        return eval(*f);
    }

    uint64_t work_used() const { return work_; }
    const Structure& structure() const { return s_; }

    // Gaifman distance, -1 when unreachable. BFS per source, memoized.
    int distance(Element u, Element v) {
        if (u == v) return 0;
        auto it = dist_.find(u);
        if (it == dist_.end()) {
            auto jt = dist_.find(v);
            if (jt != dist_.end()) return jt->second[u];
            it = dist_.emplace(u, bfs(u)).first;
        }
        return it->second[v];
    }

private:
    std::vector<int> bfs(Element src) {
        const GaifmanGraph& g = s_.gaifman();
        std::vector<int> dist(g.n, -1);
        std::vector<Element> queue{src};
        dist[src] = 0;
        for (size_t head = 0; head < queue.size(); ++head) {
            Element u = queue[head];
            for (Element w : g.adj[u])
                if (dist[w] == -1) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
        }
        return dist;
    }

    void charge() {
        if (++work_ > opt_.work_budget)
            fail(ErrorKind::Budget, "evaluation work budget exceeded (" + std::to_string(opt_.work_budget) +
                                        " units); try sampling instead of exact evaluation");
    }

    Element lookup(const std::string& var) {
        for (auto it = env_.rbegin(); it != env_.rend(); ++it)
            if (it->first == var) return it->second;
        fail(ErrorKind::Validation, "unbound variable " + var);
    }

    bool eval(const Formula& f) {
        switch (f.kind) {
        case FKind::True: return true;
        case FKind::False: return false;
        case FKind::Equal:
            charge();
            return lookup(f.vars[0]) == lookup(f.vars[1]);
        case FKind::Dist: {
            charge();
            int d = distance(lookup(f.vars[0]), lookup(f.vars[1]));
            bool within = d != -1 && d <= f.radius;
            return f.beyond ? !within : within;
        }
        case FKind::Rel: {
            charge();
            Tuple t;
            t.reserve(f.vars.size());
            for (const auto& v : f.vars) t.push_back(lookup(v));
            return s_.holds(f.name, t);
        }
        case FKind::Not: return !eval(*f.kids[0]);
        case FKind::And: return eval(*f.kids[0]) && eval(*f.kids[1]);
        case FKind::Or: return eval(*f.kids[0]) || eval(*f.kids[1]);
        case FKind::Implies: return !eval(*f.kids[0]) || eval(*f.kids[1]);
        case FKind::Exists: {
            env_.emplace_back(f.name, 0);
            for (Element e = 0; e < s_.size(); ++e) {
                charge();
                env_.back().second = e;
                if (eval(*f.kids[0])) {
                    env_.pop_back();
                    return true;
                }
            }
            env_.pop_back();
            return false;
        }
        case FKind::Forall: {
            env_.emplace_back(f.name, 0);
            for (Element e = 0; e < s_.size(); ++e) {
                charge();
                env_.back().second = e;
                if (!eval(*f.kids[0])) {
                    env_.pop_back();
                    return false;
                }
            }
            env_.pop_back();
            return true;
        }
        case FKind::Qm: {
            // Positive total weight of witnesses, i.e. some positive-weight
            // witness (weights are non-negative).
            env_.emplace_back(f.name, 0);
            for (Element e = 0; e < s_.size(); ++e) {
                charge();
                if (s_.weight(e) <= 0) continue;
                env_.back().second = e;
                if (eval(*f.kids[0])) {
                    env_.pop_back();
                    return true;
                }
            }
            env_.pop_back();
            return false;
        }
        }
        fail(ErrorKind::Parse, "corrupt formula node");
    }

    const Structure& s_;
    EvalOptions opt_;
    uint64_t work_ = 0;
    Assignment env_;
    std::map<Element, std::vector<int>> dist_;
};

inline bool satisfies(const Structure& s, const FormulaPtr& f, const Assignment& a, EvalOptions opt = {}) {
    check_symbols(s, formula_info(f));
    Evaluator ev(s, opt);
    return ev.satisfies(f, a);
}

// True iff the sentence holds. Free variables are a caller error.
inline bool qm_satisfies(const Structure& s, const FormulaPtr& f, EvalOptions opt = {}) {
    FormulaInfo info = formula_info(f);
    if (!info.free.empty())
        fail(ErrorKind::Precondition, "expected a sentence, got free variable " + info.free[0]);
    check_symbols(s, info);
    Evaluator ev(s, opt);
    return ev.satisfies(f, {});
}

struct PairingResult {
    double value = 0;
    int p = 0;
    std::vector<std::string> free;
    std::string mode;            // "exact" or "sampled"
    uint64_t samples = 0;        // sampled only
    uint64_t seed = 0;           // sampled only
    double ci99_halfwidth = 0;   // sampled only
};

namespace detail {

// Enumerates all |A|^p assignments to the free variables (first-occurrence
// order, first variable outermost) and feeds satisfying ones to `hit`.
template <class Hit>
void enumerate_assignments(Evaluator& ev, const FormulaPtr& f, const std::vector<std::string>& free, Hit&& hit) {
    const int n = ev.structure().size();
    const int p = static_cast<int>(free.size());
    Assignment a;
    a.reserve(p);
    for (const auto& v : free) a.emplace_back(v, 0);
    std::vector<Element> idx(p, 0);
    while (true) {
        for (int j = 0; j < p; ++j) a[j].second = idx[j];
        if (ev.satisfies(f, a)) hit(idx);
        int j = p - 1;
        while (j >= 0 && idx[j] == n - 1) idx[j--] = 0;
        if (j < 0) break;
        ++idx[j];
    }
}

template <class Num>
Num pairing_value(const Structure& s, const FormulaPtr& f, const std::vector<std::string>& free, EvalOptions opt) {
    Evaluator ev(s, opt);
    const int p = static_cast<int>(free.size());
    if (p == 0) return ev.satisfies(f, {}) ? Num(1) : Num(0);
    if (s.uniform()) {
        uint64_t count = 0;
        enumerate_assignments(ev, f, free, [&](const std::vector<Element>&) { ++count; });
        Num den(1);
        for (int j = 0; j < p; ++j) den *= Num(s.size());
        return Num(count) / den;
    }
    Num acc(0);
    enumerate_assignments(ev, f, free, [&](const std::vector<Element>& idx) {
        Num term(1);
        for (Element e : idx) term *= Num(s.weight(e));
        acc += term;
    });
    return acc;
}

} // namespace detail

inline PairingResult stone_pairing_exact(const Structure& s, const FormulaPtr& f, EvalOptions opt = {}) {
    FormulaInfo info = formula_info(f);
    check_symbols(s, info);
    PairingResult r;
    r.free = info.free;
    r.p = static_cast<int>(info.free.size());
    r.mode = "exact";
    r.value = detail::pairing_value<double>(s, f, info.free, opt);
    return r;
}

// Same enumeration in exact rational arithmetic.
inline BigRational stone_pairing_exact_rational(const Structure& s, const FormulaPtr& f, EvalOptions opt = {}) {
    FormulaInfo info = formula_info(f);
    check_symbols(s, info);
    return detail::pairing_value<BigRational>(s, f, info.free, opt);
}

inline double hoeffding99_halfwidth(uint64_t samples) {
    return std::sqrt(std::log(200.0) / (2.0 * static_cast<double>(samples)));
}

inline PairingResult stone_pairing_sampled(const Structure& s, const FormulaPtr& f, uint64_t samples,
                                           uint64_t seed, EvalOptions opt = {}) {
    if (samples < 1) fail(ErrorKind::Usage, "samples must be >= 1");
    FormulaInfo info = formula_info(f);
    check_symbols(s, info);
    PairingResult r;
    r.free = info.free;
    r.p = static_cast<int>(info.free.size());
    r.mode = "sampled";
    r.samples = samples;
    r.seed = seed;
    r.ci99_halfwidth = hoeffding99_halfwidth(samples);

    Evaluator ev(s, opt);
    const int p = r.p;
    if (p == 0) {
        r.value = ev.satisfies(f, {}) ? 1.0 : 0.0;
        return r;
    }
    Assignment a;
    for (const auto& v : info.free) a.emplace_back(v, 0);
    uint64_t hits = 0;
    const int n = s.size();
    for (uint64_t i = 0; i < samples; ++i) {
        SplitMix64 g(stream_seed(seed, i));
        for (int j = 0; j < p; ++j) {
            double u = g.next_double();
            Element e = s.uniform() ? std::min(n - 1, static_cast<int>(u * n)) : draw_index(s.cumulative(), u);
            a[j].second = e;
        }
        if (ev.satisfies(f, a)) ++hits;
    }
    r.value = static_cast<double>(hits) / static_cast<double>(samples);
    return r;
}

// All satisfying assignments over the free variables, in enumeration order.
inline std::vector<std::vector<Element>> satisfying_assignments(const Structure& s, const FormulaPtr& f,
                                                                EvalOptions opt = {}) {
    FormulaInfo info = formula_info(f);
    check_symbols(s, info);
    Evaluator ev(s, opt);
    std::vector<std::vector<Element>> out;
    if (info.free.empty()) {
        if (ev.satisfies(f, {})) out.push_back({});
        return out;
    }
    detail::enumerate_assignments(ev, f, info.free, [&](const std::vector<Element>& idx) { out.push_back(idx); });
    return out;
}

} // namespace folab
