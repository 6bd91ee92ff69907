#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"

namespace folab {

enum class FKind {
    True,
    False,
    Equal,   // vars[0] = vars[1]
    Rel,     // name(vars...)
    Dist,    // dist<=radius(vars[0], vars[1]), or dist>radius when beyond
    Not,
    And,
    Or,
    Implies,
    Exists,  // name = bound variable
    Forall,
    Qm,      // weight quantifier
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FKind kind;
    std::string name;              // Rel symbol or bound variable
    std::vector<std::string> vars; // Rel args, or the two sides of Equal/Dist
    int radius = 0;                // Dist only
    bool beyond = false;           // Dist: dist>radius instead of dist<=radius
    std::vector<FormulaPtr> kids;
};

inline FormulaPtr f_true() { return std::make_shared<Formula>(Formula{FKind::True, "", {}, 0, false, {}}); }
inline FormulaPtr f_false() { return std::make_shared<Formula>(Formula{FKind::False, "", {}, 0, false, {}}); }
inline FormulaPtr f_eq(std::string a, std::string b) {
    return std::make_shared<Formula>(Formula{FKind::Equal, "", {std::move(a), std::move(b)}, 0, false, {}});
}
inline FormulaPtr f_rel(std::string name, std::vector<std::string> args) {
    return std::make_shared<Formula>(Formula{FKind::Rel, std::move(name), std::move(args), 0, false, {}});
}
inline FormulaPtr f_dist_le(std::string a, std::string b, int radius) {
    if (radius < 0) fail(ErrorKind::Precondition, "distance radius must be >= 0");
    return std::make_shared<Formula>(Formula{FKind::Dist, "", {std::move(a), std::move(b)}, radius, false, {}});
}
inline FormulaPtr f_dist_gt(std::string a, std::string b, int radius) {
    if (radius < 0) fail(ErrorKind::Precondition, "distance radius must be >= 0");
    return std::make_shared<Formula>(Formula{FKind::Dist, "", {std::move(a), std::move(b)}, radius, true, {}});
}
inline FormulaPtr f_not(FormulaPtr x) {
    return std::make_shared<Formula>(Formula{FKind::Not, "", {}, 0, false, {std::move(x)}});
}
inline FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
    return std::make_shared<Formula>(Formula{FKind::And, "", {}, 0, false, {std::move(a), std::move(b)}});
}
inline FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
    return std::make_shared<Formula>(Formula{FKind::Or, "", {}, 0, false, {std::move(a), std::move(b)}});
}
inline FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
    return std::make_shared<Formula>(Formula{FKind::Implies, "", {}, 0, false, {std::move(a), std::move(b)}});
}
inline FormulaPtr f_exists(std::string v, FormulaPtr body) {
    return std::make_shared<Formula>(Formula{FKind::Exists, std::move(v), {}, 0, false, {std::move(body)}});
}
inline FormulaPtr f_forall(std::string v, FormulaPtr body) {
    return std::make_shared<Formula>(Formula{FKind::Forall, std::move(v), {}, 0, false, {std::move(body)}});
}
inline FormulaPtr f_qm(std::string v, FormulaPtr body) {
    return std::make_shared<Formula>(Formula{FKind::Qm, std::move(v), {}, 0, false, {std::move(body)}});
}

// Empty conjunction is true, empty disjunction is false.
inline FormulaPtr f_and_all(const std::vector<FormulaPtr>& parts) {
    if (parts.empty()) return f_true();
    FormulaPtr acc = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) acc = f_and(acc, parts[i]);
    return acc;
}
inline FormulaPtr f_or_all(const std::vector<FormulaPtr>& parts) {
    if (parts.empty()) return f_false();
    FormulaPtr acc = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) acc = f_or(acc, parts[i]);
    return acc;
}

inline bool is_quantifier(FKind k) { return k == FKind::Exists || k == FKind::Forall || k == FKind::Qm; }

inline bool equal_formulas(const FormulaPtr& a, const FormulaPtr& b) {
    if (a == b) return true;
    if (a->kind != b->kind || a->name != b->name || a->vars != b->vars ||
        a->radius != b->radius || a->beyond != b->beyond || a->kids.size() != b->kids.size())
        return false;
    for (size_t i = 0; i < a->kids.size(); ++i)
        if (!equal_formulas(a->kids[i], b->kids[i])) return false;
    return true;
}

struct FormulaInfo {
    std::vector<std::string> free;      // first-occurrence order
    int quantifier_rank = 0;            // distance atoms contribute 0
    bool uses_weight_quantifier = false;
    std::map<std::string, int> symbols; // relation symbol -> arity as used
};

namespace detail {

inline void info_walk(const Formula& f, std::vector<std::string>& bound, FormulaInfo& out, int& rank_out) {
    auto see_var = [&](const std::string& v) {
        if (std::find(bound.rbegin(), bound.rend(), v) != bound.rend()) return;
        if (std::find(out.free.begin(), out.free.end(), v) == out.free.end()) out.free.push_back(v);
    };
    switch (f.kind) {
    case FKind::True:
    case FKind::False:
        rank_out = 0;
        return;
    case FKind::Equal:
    case FKind::Dist:
        see_var(f.vars[0]);
        see_var(f.vars[1]);
        rank_out = 0;
        return;
    case FKind::Rel: {
        auto it = out.symbols.find(f.name);
        if (it != out.symbols.end() && it->second != static_cast<int>(f.vars.size()))
            fail(ErrorKind::Parse, "symbol " + f.name + " used with conflicting arities");
        out.symbols[f.name] = static_cast<int>(f.vars.size());
        for (const auto& v : f.vars) see_var(v);
        rank_out = 0;
        return;
    }
    case FKind::Not: {
        info_walk(*f.kids[0], bound, out, rank_out);
        return;
    }
    case FKind::And:
    case FKind::Or:
    case FKind::Implies: {
        int r1 = 0, r2 = 0;
        info_walk(*f.kids[0], bound, out, r1);
        info_walk(*f.kids[1], bound, out, r2);
        rank_out = std::max(r1, r2);
        return;
    }
    case FKind::Exists:
    case FKind::Forall:
    case FKind::Qm: {
        if (f.kind == FKind::Qm) out.uses_weight_quantifier = true;
        bound.push_back(f.name);
        int r = 0;
        info_walk(*f.kids[0], bound, out, r);
        bound.pop_back();
        rank_out = r + 1;
        return;
    }
    }
}

} // namespace detail

inline FormulaInfo formula_info(const FormulaPtr& f) {
    FormulaInfo out;
    std::vector<std::string> bound;
    int rank = 0;
    detail::info_walk(*f, bound, out, rank);
    out.quantifier_rank = rank;
    return out;
}

inline void collect_names(const Formula& f, std::set<std::string>& out) {
    if (is_quantifier(f.kind)) out.insert(f.name);
    for (const auto& v : f.vars) out.insert(v);
    for (const auto& k : f.kids) collect_names(*k, out);
}

inline std::string fresh_name(const std::string& base, const std::set<std::string>& used) {
    if (!used.count(base)) return base;
    for (int i = 1;; ++i) {
        std::string candidate = base + std::to_string(i);
        if (!used.count(candidate)) return candidate;
    }
}

// Capture-avoiding renaming of free variables. Binders that collide with a
// target name are alpha-renamed first.
inline FormulaPtr rename_free(const FormulaPtr& f, const std::map<std::string, std::string>& subst) {
    if (subst.empty()) return f;
    auto mapped = [&](const std::string& v) {
        auto it = subst.find(v);
        return it == subst.end() ? v : it->second;
    };
    switch (f->kind) {
    case FKind::True:
    case FKind::False:
        return f;
    case FKind::Equal:
        return f_eq(mapped(f->vars[0]), mapped(f->vars[1]));
    case FKind::Dist:
        return f->beyond ? f_dist_gt(mapped(f->vars[0]), mapped(f->vars[1]), f->radius)
                         : f_dist_le(mapped(f->vars[0]), mapped(f->vars[1]), f->radius);
    case FKind::Rel: {
        std::vector<std::string> args;
        args.reserve(f->vars.size());
        for (const auto& v : f->vars) args.push_back(mapped(v));
        return f_rel(f->name, std::move(args));
    }
    case FKind::Not:
        return f_not(rename_free(f->kids[0], subst));
    case FKind::And:
        return f_and(rename_free(f->kids[0], subst), rename_free(f->kids[1], subst));
    case FKind::Or:
        return f_or(rename_free(f->kids[0], subst), rename_free(f->kids[1], subst));
    case FKind::Implies:
        return f_implies(rename_free(f->kids[0], subst), rename_free(f->kids[1], subst));
    case FKind::Exists:
    case FKind::Forall:
    case FKind::Qm: {
        std::map<std::string, std::string> inner = subst;
        inner.erase(f->name);
        std::string binder = f->name;
        FormulaPtr body = f->kids[0];
        bool capture = false;
        for (const auto& [from, to] : inner) {
            (void)from;
            if (to == binder) { capture = true; break; }
        }
        if (capture) {
            std::set<std::string> used;
            collect_names(*f, used);
            for (const auto& [from, to] : inner) {
                used.insert(from);
                used.insert(to);
            }
            std::string nb = fresh_name(binder, used);
            body = rename_free(body, {{binder, nb}});
            binder = nb;
        }
        body = rename_free(body, inner);
        if (f->kind == FKind::Exists) return f_exists(binder, body);
        if (f->kind == FKind::Forall) return f_forall(binder, body);
        return f_qm(binder, body);
    }
    }
    fail(ErrorKind::Parse, "corrupt formula node");
}

// Renames relation symbols. Variables and binders are untouched.
inline FormulaPtr rename_relations(const FormulaPtr& f, const std::map<std::string, std::string>& subst) {
    if (subst.empty()) return f;
    std::vector<FormulaPtr> kids;
    kids.reserve(f->kids.size());
    for (const auto& k : f->kids) kids.push_back(rename_relations(k, subst));
    Formula out = *f;
    out.kids = std::move(kids);
    if (f->kind == FKind::Rel) {
        auto it = subst.find(f->name);
        if (it != subst.end()) out.name = it->second;
    }
    return std::make_shared<Formula>(std::move(out));
}

// --- printing ---------------------------------------------------------------
//
// Minimal parentheses: binary operators by precedence (-> < | < & < !), and a
// quantifier is printed bare only in tail position, where its maximal
// rightward extent coincides with the subtree.

namespace detail {

inline int precedence(FKind k) {
    switch (k) {
    case FKind::Implies: return 1;
    case FKind::Or: return 2;
    case FKind::And: return 3;
    case FKind::Not: return 4;
    default: return 5;
    }
}

inline void print_walk(const Formula& f, int min_prec, bool tail, std::string& out) {
    if (is_quantifier(f.kind)) {
        bool parens = !tail;
        if (parens) out += '(';
        out += f.kind == FKind::Exists ? "exists " : f.kind == FKind::Forall ? "forall " : "Qm ";
        out += f.name;
        out += ". ";
        print_walk(*f.kids[0], 0, true, out);
        if (parens) out += ')';
        return;
    }
    int prec = precedence(f.kind);
    bool parens = prec < min_prec;
    if (parens) out += '(';
    // Rightmost child sits in tail position; a closing paren restores it.
    bool inner_tail = parens ? true : tail;
    switch (f.kind) {
    case FKind::True: out += "true"; break;
    case FKind::False: out += "false"; break;
    case FKind::Equal:
        out += f.vars[0];
        out += " = ";
        out += f.vars[1];
        break;
    case FKind::Dist:
        out += "dist";
        out += f.beyond ? ">" : "<=";
        out += std::to_string(f.radius);
        out += '(';
        out += f.vars[0];
        out += ", ";
        out += f.vars[1];
        out += ')';
        break;
    case FKind::Rel:
        out += f.name;
        out += '(';
        for (size_t i = 0; i < f.vars.size(); ++i) {
            if (i) out += ", ";
            out += f.vars[i];
        }
        out += ')';
        break;
    case FKind::Not:
        out += '!';
        print_walk(*f.kids[0], 4, inner_tail, out);
        break;
    case FKind::And:
        print_walk(*f.kids[0], 3, false, out);
        out += " & ";
        print_walk(*f.kids[1], 4, inner_tail, out);
        break;
    case FKind::Or:
        print_walk(*f.kids[0], 2, false, out);
        out += " | ";
        print_walk(*f.kids[1], 3, inner_tail, out);
        break;
    case FKind::Implies:
        print_walk(*f.kids[0], 2, false, out);
        out += " -> ";
        print_walk(*f.kids[1], 1, inner_tail, out);
        break;
    default: break;
    }
    if (parens) out += ')';
}

} // namespace detail

inline std::string print_formula(const FormulaPtr& f) {
    std::string out;
    detail::print_walk(*f, 0, true, out);
    return out;
}

} // namespace folab
