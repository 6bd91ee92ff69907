#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "formula.hpp"
#include "structure.hpp"

namespace folab {

struct EncodeOptions {
    int arity_cap = 3;
};

// Trace symbol for tuples of R whose positions in I (1-based) held marked
// elements, recorded per assignment f : I -> mark index. The name spells out
// I as a bitstring over the k positions and f over I in ascending position
// order: N_E_I10_f2 traces E-tuples whose first slot held the M2 element.
inline std::string trace_symbol_name(const std::string& rel, int k, unsigned mask,
                                     const std::vector<int>& f_vals) {
    std::string name = "N_" + rel + "_I";
    for (int j = 0; j < k; ++j) name += (mask >> j) & 1u ? '1' : '0';
    name += "_f";
    for (size_t i = 0; i < f_vals.size(); ++i) {
        if (i) name += '_';
        name += std::to_string(f_vals[i]);
    }
    return name;
}

namespace detail {

inline int popcount(unsigned x) {
    int c = 0;
    while (x) {
        c += x & 1u;
        x >>= 1;
    }
    return c;
}

// Calls fn(mask, f_vals) for every nonempty proper position subset and every
// assignment of mark indices 1..m to it, in deterministic (mask, lex) order.
template <class Fn>
void for_each_trace(int k, int m, Fn&& fn) {
    for (unsigned mask = 1; mask + 1 < (1u << k); ++mask) {
        int slots = popcount(mask);
        std::vector<int> f_vals(slots, 1);
        if (m < 1) continue;
        while (true) {
            fn(mask, f_vals);
            int j = slots - 1;
            while (j >= 0 && f_vals[j] == m) f_vals[j--] = 1;
            if (j < 0) break;
            ++f_vals[j];
        }
    }
}

// Mark index (1..m) per element, or 0. Marks above m count as unmarked.
inline std::vector<int> mark_of_element(const Structure& s, int m) {
    std::vector<int> mark(s.size(), 0);
    for (int i = 1; i <= m; ++i) {
        auto e = s.mark_element(i);
        if (!e) continue;
        if (mark[*e] != 0)
            fail(ErrorKind::Precondition, "element " + std::to_string(*e) + " carries two marks (M" +
                                              std::to_string(mark[*e]) + " and M" + std::to_string(i) + ")");
        mark[*e] = i;
    }
    return mark;
}

} // namespace detail

// The input signature extended with every trace symbol for its arity >= 2
// relations. Deterministic; errors if any arity exceeds the cap.
inline Signature encoded_signature(const Signature& base, int m, EncodeOptions opt = {}) {
    if (m < 0) fail(ErrorKind::Precondition, "mark count m must be >= 0");
    Signature out;
    for (const auto& decl : base.decls()) {
        if (decl.arity > opt.arity_cap)
            fail(ErrorKind::Budget, "relation " + decl.name + " has arity " + std::to_string(decl.arity) +
                                        " above the cap " + std::to_string(opt.arity_cap));
        out.add(decl.name, decl.arity);
        if (decl.arity < 2 || is_mark_symbol(decl.name)) continue;
        detail::for_each_trace(decl.arity, m, [&](unsigned mask, const std::vector<int>& f_vals) {
            out.add(trace_symbol_name(decl.name, decl.arity, mask, f_vals),
                    decl.arity - detail::popcount(mask));
        });
    }
    return out;
}

// Deletes every tuple of an arity >= 2 relation that touches an element
// pebbled M1..Mm, projecting the surviving (unmarked) slots into the matching
// trace relation. Fully marked tuples vanish from the structure (the
// elimination theory remembers them). Unary relations, marks, and weights
// pass through. The Gaifman graph of the result is the input's minus all
// edges at marked elements.
inline Structure encode_marked(const Structure& s_plus, int m, EncodeOptions opt = {}) {
    if (m < 0) fail(ErrorKind::Precondition, "mark count m must be >= 0");
    std::vector<int> mark = detail::mark_of_element(s_plus, m);

    StructureData d;
    d.domain = s_plus.size();
    d.weights = s_plus.raw_weights();
    Signature enc = encoded_signature(s_plus.signature(), m, opt);
    for (const auto& decl : enc.decls()) {
        d.arities[decl.name] = decl.arity;
        d.relations[decl.name];
    }
    for (const auto& decl : s_plus.signature().decls()) {
        const auto& tuples = s_plus.tuples(decl.name);
        if (decl.arity < 2 || is_mark_symbol(decl.name)) {
            d.relations[decl.name].assign(tuples.begin(), tuples.end());
            continue;
        }
        for (const Tuple& t : tuples) {
            unsigned mask = 0;
            for (size_t j = 0; j < t.size(); ++j)
                if (mark[t[j]] != 0) mask |= 1u << j;
            if (mask == 0) {
                d.relations[decl.name].push_back(t);
                continue;
            }
            if (mask + 1 == (1u << t.size())) continue; // fully marked: theory only
            std::vector<int> f_vals;
            Tuple proj;
            for (size_t j = 0; j < t.size(); ++j) {
                if ((mask >> j) & 1u) f_vals.push_back(mark[t[j]]);
                else proj.push_back(t[j]);
            }
            d.relations[trace_symbol_name(decl.name, decl.arity, mask, f_vals)].push_back(std::move(proj));
        }
    }
    return Structure::from_data(d);
}

struct EliminationEntry {
    int arity = 0;
    std::set<std::vector<int>> z; // mark-index tuples realized by fully marked tuples
};

struct EliminationTheory {
    int m = 0;
    std::map<std::string, EliminationEntry> rels; // arity >= 2 user symbols
};

// Which fully marked tuples each arity >= 2 relation realizes: (i1,...,ik) is
// recorded when the elements pebbled M_i1..M_ik form a tuple of R.
inline EliminationTheory elimination_theory(const Structure& s_plus, int m) {
    if (m < 0) fail(ErrorKind::Precondition, "mark count m must be >= 0");
    std::vector<int> mark = detail::mark_of_element(s_plus, m);
    EliminationTheory t;
    t.m = m;
    for (const auto& decl : s_plus.signature().decls()) {
        if (decl.arity < 2 || is_mark_symbol(decl.name)) continue;
        EliminationEntry entry;
        entry.arity = decl.arity;
        for (const Tuple& tu : s_plus.tuples(decl.name)) {
            std::vector<int> idx;
            idx.reserve(tu.size());
            for (Element e : tu) {
                if (mark[e] == 0) break;
                idx.push_back(mark[e]);
            }
            if (idx.size() == tu.size()) entry.z.insert(std::move(idx));
        }
        t.rels[decl.name] = std::move(entry);
    }
    return t;
}

inline nlohmann::json elimination_theory_to_json(const EliminationTheory& t) {
    nlohmann::json j;
    j["m"] = t.m;
    nlohmann::json ars = nlohmann::json::object();
    nlohmann::json z = nlohmann::json::object();
    for (const auto& [name, entry] : t.rels) {
        ars[name] = entry.arity;
        nlohmann::json list = nlohmann::json::array();
        for (const auto& tuple : entry.z) list.push_back(tuple);
        z[name] = std::move(list);
    }
    j["arities"] = std::move(ars);
    j["z"] = std::move(z);
    return j;
}

inline EliminationTheory elimination_theory_from_json(const nlohmann::json& j) {
    EliminationTheory t;
    if (!j.is_object() || !j.contains("m") || !j.contains("z"))
        fail(ErrorKind::Parse, "elimination theory JSON: expected {m, arities, z}");
    t.m = j["m"].get<int>();
    for (auto it = j["z"].begin(); it != j["z"].end(); ++it) {
        EliminationEntry entry;
        if (j.contains("arities") && j["arities"].contains(it.key()))
            entry.arity = j["arities"][it.key()].get<int>();
        for (const auto& jt : it.value()) {
            std::vector<int> tuple;
            for (const auto& je : jt) tuple.push_back(je.get<int>());
            if (entry.arity == 0) entry.arity = static_cast<int>(tuple.size());
            entry.z.insert(std::move(tuple));
        }
        if (entry.arity == 0) fail(ErrorKind::Parse, "elimination theory JSON: unknown arity for " + it.key());
        t.rels[it.key()] = std::move(entry);
    }
    return t;
}

// Quantifier-free equivalent of R(args) over the encoded structure: either
// all slots are marked and Z records the tuple, or no slot is marked and R
// still holds, or the marked slots match a trace relation on the rest.
inline FormulaPtr atom_translation(const std::string& rel, const EliminationEntry& entry, int m,
                                   const std::vector<std::string>& args) {
    const int k = entry.arity;
    if (static_cast<int>(args.size()) != k)
        fail(ErrorKind::Precondition, "symbol " + rel + " used with arity " + std::to_string(args.size()) +
                                          ", theory says " + std::to_string(k));
    auto unmarked = [&](const std::string& v) {
        std::vector<FormulaPtr> parts;
        for (int i = 1; i <= m; ++i) parts.push_back(f_not(f_rel("M" + std::to_string(i), {v})));
        return f_and_all(parts);
    };
    std::vector<FormulaPtr> disjuncts;
    for (const auto& tuple : entry.z) {
        std::vector<FormulaPtr> parts;
        for (int j = 0; j < k; ++j) parts.push_back(f_rel("M" + std::to_string(tuple[j]), {args[j]}));
        disjuncts.push_back(f_and_all(parts));
    }
    {
        std::vector<FormulaPtr> parts{f_rel(rel, args)};
        for (int j = 0; j < k; ++j) parts.push_back(unmarked(args[j]));
        disjuncts.push_back(f_and_all(parts));
    }
    detail::for_each_trace(k, m, [&](unsigned mask, const std::vector<int>& f_vals) {
        std::vector<std::string> proj;
        std::vector<FormulaPtr> parts;
        int slot = 0;
        for (int j = 0; j < k; ++j) {
            if ((mask >> j) & 1u) {
                parts.push_back(f_rel("M" + std::to_string(f_vals[slot]), {args[j]}));
                ++slot;
            } else {
                proj.push_back(args[j]);
            }
        }
        std::vector<FormulaPtr> all{f_rel(trace_symbol_name(rel, k, mask, f_vals), proj)};
        all.insert(all.end(), parts.begin(), parts.end());
        for (int j = 0; j < k; ++j)
            if (!((mask >> j) & 1u)) all.push_back(unmarked(args[j]));
        disjuncts.push_back(f_and_all(all));
    });
    return f_or_all(disjuncts);
}

// Sentence pinning down Z for one relation: every recorded mark tuple is
// realized, every unrecorded one is refuted. Exactly one Z satisfies it.
inline FormulaPtr theory_sentence(const std::string& rel, int k, const std::set<std::vector<int>>& z, int m) {
    auto realized = [&](const std::vector<int>& tuple) {
        std::vector<std::string> vars;
        for (int j = 1; j <= k; ++j) vars.push_back("x" + std::to_string(j));
        std::vector<FormulaPtr> parts{f_rel(rel, vars)};
        for (int j = 0; j < k; ++j) parts.push_back(f_rel("M" + std::to_string(tuple[j]), {vars[j]}));
        FormulaPtr body = f_and_all(parts);
        for (int j = k; j >= 1; --j) body = f_exists("x" + std::to_string(j), body);
        return body;
    };
    std::vector<FormulaPtr> parts;
    std::vector<int> tuple(k, 1);
    if (m >= 1 && k >= 1) {
        while (true) {
            if (z.count(tuple)) parts.push_back(realized(tuple));
            else parts.push_back(f_not(realized(tuple)));
            int j = k - 1;
            while (j >= 0 && tuple[j] == m) tuple[j--] = 1;
            if (j < 0) break;
            ++tuple[j];
        }
    }
    return f_and_all(parts);
}

// Rewrites every arity >= 2 atom through its elimination entry. The result
// evaluates on the encoded structure exactly as the input does on the marked
// one. Distance atoms are refused: encoding rewires the Gaifman graph, so
// they do not translate atom by atom.
inline FormulaPtr eliminate_formula(const FormulaPtr& f, const EliminationTheory& t) {
    switch (f->kind) {
    case FKind::True:
    case FKind::False:
    case FKind::Equal:
        return f;
    case FKind::Dist:
        fail(ErrorKind::Precondition, "distance atoms cannot be rewritten over the encoded structure");
    case FKind::Rel: {
        if (is_mark_symbol(f->name))
            fail(ErrorKind::Precondition, "mark symbol " + f->name + " is not part of the base vocabulary");
        auto it = t.rels.find(f->name);
        if (it == t.rels.end()) {
            if (f->vars.size() == 1) return f; // unary user symbols survive encoding untouched
            fail(ErrorKind::Precondition, "no elimination entry for symbol " + f->name);
        }
        return atom_translation(f->name, it->second, t.m, f->vars);
    }
    case FKind::Not:
        return f_not(eliminate_formula(f->kids[0], t));
    case FKind::And:
        return f_and(eliminate_formula(f->kids[0], t), eliminate_formula(f->kids[1], t));
    case FKind::Or:
        return f_or(eliminate_formula(f->kids[0], t), eliminate_formula(f->kids[1], t));
    case FKind::Implies:
        return f_implies(eliminate_formula(f->kids[0], t), eliminate_formula(f->kids[1], t));
    case FKind::Exists:
        return f_exists(f->name, eliminate_formula(f->kids[0], t));
    case FKind::Forall:
        return f_forall(f->name, eliminate_formula(f->kids[0], t));
    case FKind::Qm:
        return f_qm(f->name, eliminate_formula(f->kids[0], t));
    }
    fail(ErrorKind::Parse, "corrupt formula node");
}

} // namespace folab
