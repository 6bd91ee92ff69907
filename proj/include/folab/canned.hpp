#pragma once

#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "formula.hpp"

namespace folab::canned {

namespace detail {

inline std::vector<std::string> require_free(const FormulaPtr& f, size_t count, const char* role) {
    FormulaInfo info = formula_info(f);
    if (info.free.size() != count)
        fail(ErrorKind::Precondition, std::string(role) + " must have exactly " + std::to_string(count) +
                                          " free variable(s), got " + std::to_string(info.free.size()));
    return info.free;
}

inline std::vector<std::string> fresh_block(const std::string& base, int count,
                                            const std::set<std::string>& used) {
    std::set<std::string> taken = used;
    std::vector<std::string> out;
    for (int i = 1; i <= count; ++i) {
        std::string v = fresh_name(base + std::to_string(i), taken);
        taken.insert(v);
        out.push_back(v);
    }
    return out;
}

inline FormulaPtr all_distinct(const std::vector<std::string>& vars) {
    std::vector<FormulaPtr> parts;
    for (size_t j = 0; j < vars.size(); ++j)
        for (size_t l = j + 1; l < vars.size(); ++l) parts.push_back(f_not(f_eq(vars[j], vars[l])));
    return f_and_all(parts);
}

} // namespace detail

// Is some element within distance d of x1 marked M<i>?
inline FormulaPtr mark_nearby(int d, int i) {
    if (d < 0) fail(ErrorKind::Precondition, "radius must be >= 0");
    if (i < 1) fail(ErrorKind::Precondition, "mark index must be >= 1");
    return f_exists("z", f_and(f_dist_le("x1", "z", d), f_rel("M" + std::to_string(i), {"z"})));
}

// Is some element within distance d of x1 in the removal set Z<d>?
inline FormulaPtr removal_nearby(int d) {
    if (d < 0) fail(ErrorKind::Precondition, "radius must be >= 0");
    return f_exists("z", f_and(f_dist_le("x1", "z", d), f_rel("Z" + std::to_string(d), {"z"})));
}

// x2 is d-close to x1 while the d-ball of x1 avoids Z<d> entirely.
inline FormulaPtr close_pair_clear(int d) {
    if (d < 0) fail(ErrorKind::Precondition, "radius must be >= 0");
    return f_and(f_dist_le("x1", "x2", d),
                 f_forall("z", f_implies(f_dist_le("x1", "z", d),
                                         f_not(f_rel("Z" + std::to_string(d), {"z"})))));
}

// phi strengthened so each satisfier exhibits b distinct gamma-successors
// satisfying psi. With b = the minimum such out-degree over phi's satisfiers,
// this keeps the satisfying set unchanged.
inline FormulaPtr transport_lhs(const FormulaPtr& phi, const FormulaPtr& psi, const FormulaPtr& gamma, int b) {
    if (b < 1) fail(ErrorKind::Precondition, "witness count b must be >= 1");
    std::string x = detail::require_free(phi, 1, "phi")[0];
    std::string yp = detail::require_free(psi, 1, "psi")[0];
    auto gv = detail::require_free(gamma, 2, "gamma");
    std::set<std::string> used;
    collect_names(*phi, used);
    collect_names(*psi, used);
    collect_names(*gamma, used);
    used.insert(x);
    std::vector<std::string> ys = detail::fresh_block("y", b, used);

    std::vector<FormulaPtr> parts{detail::all_distinct(ys)};
    for (const std::string& y : ys) {
        parts.push_back(rename_free(gamma, {{gv[0], x}, {gv[1], y}}));
        parts.push_back(rename_free(psi, {{yp, y}}));
    }
    FormulaPtr block = f_and_all(parts);
    for (auto it = ys.rbegin(); it != ys.rend(); ++it) block = f_exists(*it, block);
    return f_and(phi, block);
}

// psi strengthened so no satisfier has more than a distinct gamma-predecessors
// satisfying phi. With a = the maximum such in-degree, the satisfying set is
// unchanged.
inline FormulaPtr transport_rhs(const FormulaPtr& phi, const FormulaPtr& psi, const FormulaPtr& gamma, int a) {
    if (a < 0) fail(ErrorKind::Precondition, "witness count a must be >= 0");
    std::string xp = detail::require_free(phi, 1, "phi")[0];
    std::string y = detail::require_free(psi, 1, "psi")[0];
    auto gv = detail::require_free(gamma, 2, "gamma");
    std::set<std::string> used;
    collect_names(*phi, used);
    collect_names(*psi, used);
    collect_names(*gamma, used);
    used.insert(y);
    std::vector<std::string> xs = detail::fresh_block("x", a + 1, used);

    std::vector<FormulaPtr> parts{detail::all_distinct(xs)};
    for (const std::string& x : xs) {
        parts.push_back(rename_free(gamma, {{gv[0], x}, {gv[1], y}}));
        parts.push_back(rename_free(phi, {{xp, x}}));
    }
    FormulaPtr block = f_and_all(parts);
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) block = f_exists(*it, block);
    return f_and(psi, f_not(block));
}

// Some column admits a positive-weight row: (exists y)(Qm x) phi(x, y),
// quantifying phi's own free variables in occurrence order (x first).
inline FormulaPtr probe_exists_qm(const FormulaPtr& phi) {
    auto fv = detail::require_free(phi, 2, "phi");
    return f_exists(fv[1], f_qm(fv[0], phi));
}

// Every column admits a positive-weight row.
inline FormulaPtr probe_forall_qm(const FormulaPtr& phi) {
    auto fv = detail::require_free(phi, 2, "phi");
    return f_forall(fv[1], f_qm(fv[0], phi));
}

// chi(u1, u2) = (exists y)(phi(u1, y) & phi(u2, y)): two rows share a column.
// Returns the formula and the two fresh row variables via out params.
inline FormulaPtr shared_witness(const FormulaPtr& phi, std::string& u1, std::string& u2) {
    auto fv = detail::require_free(phi, 2, "phi");
    std::set<std::string> used;
    collect_names(*phi, used);
    u1 = fresh_name("u1", used);
    used.insert(u1);
    u2 = fresh_name("u2", used);
    return f_exists(fv[1], f_and(rename_free(phi, {{fv[0], u1}}), rename_free(phi, {{fv[0], u2}})));
}

// (exists y)(!phi(u1,y) | ... | !phi(uk,y)): some column refuses one of k rows.
inline FormulaPtr some_refusal(const FormulaPtr& phi, int k, std::vector<std::string>& us) {
    if (k < 1) fail(ErrorKind::Precondition, "row count k must be >= 1");
    auto fv = detail::require_free(phi, 2, "phi");
    std::set<std::string> used;
    collect_names(*phi, used);
    us = detail::fresh_block("u", k, used);
    std::vector<FormulaPtr> parts;
    for (const std::string& u : us) parts.push_back(f_not(rename_free(phi, {{fv[0], u}})));
    return f_exists(fv[1], f_or_all(parts));
}

} // namespace folab::canned
