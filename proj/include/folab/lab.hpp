#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "canned.hpp"
#include "encode.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "generators.hpp"
#include "locality.hpp"
#include "parser.hpp"
#include "residuality.hpp"
#include "structure.hpp"

namespace folab {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// --- convergence tables -----------------------------------------------------

struct ConvergenceOptions {
    std::optional<uint64_t> samples; // unset = exact pairing
    uint64_t seed = 0;
    double tau = 1e-2;
    EvalOptions eval;
};

struct ConvergenceRow {
    int n = 0;
    std::string formula_id;
    std::optional<double> value;
    std::string mode;          // "exact" or "sampled", empty on error
    std::optional<double> ci;  // sampled only
    std::string error;         // non-empty when the row failed
};

struct ConvergenceTable {
    double tau = 1e-2;
    std::vector<ConvergenceRow> rows; // sizes outer, formulas inner
    std::map<std::string, std::string> verdicts;
};

namespace detail {

// The tends-to-zero rule is the contract; positive-limit additionally wants
// the last three values in a narrow band so a slow decay toward zero is not
// mistaken for a limit. Everything else stays inconclusive. All verdicts are
// empirical trend labels, not limit claims.
inline std::string trend_verdict(const std::vector<double>& values, double tau) {
    const size_t t = values.size();
    if (t < 3) return "inconclusive";
    double v1 = values[t - 3], v2 = values[t - 2], v3 = values[t - 1];
    if (v3 < tau && v1 >= v2 && v2 >= v3) return "tends-to-zero (empirical)";
    if (v3 >= tau) {
        double lo = std::min(std::min(v1, v2), v3);
        double hi = std::max(std::max(v1, v2), v3);
        if (hi - lo <= std::max(tau / 10, 0.1 * v3)) return "positive-limit (empirical)";
    }
    return "inconclusive";
}

} // namespace detail

inline ConvergenceTable run_convergence(const GeneratorSpec& spec, const std::vector<int>& sizes,
                                        const std::vector<NamedFormula>& formulas,
                                        ConvergenceOptions opt = {}) {
    if (sizes.empty()) fail(ErrorKind::Usage, "no sizes given");
    if (formulas.empty()) fail(ErrorKind::Usage, "no formulas given");
    ConvergenceTable table;
    table.tau = opt.tau;
    std::map<std::string, std::vector<double>> values;
    std::map<std::string, bool> failed;
    for (int n : sizes) {
        std::optional<Structure> s;
        std::string gen_error;
        try {
            s = generate(spec, n);
        } catch (const Error& e) {
            gen_error = e.what();
        }
        for (const auto& nf : formulas) {
            ConvergenceRow row;
            row.n = n;
            row.formula_id = nf.id;
            if (!s) {
                row.error = gen_error;
                failed[nf.id] = true;
            } else {
                try {
                    PairingResult r = opt.samples
                                          ? stone_pairing_sampled(*s, nf.formula, *opt.samples, opt.seed, opt.eval)
                                          : stone_pairing_exact(*s, nf.formula, opt.eval);
                    row.value = r.value;
                    row.mode = r.mode;
                    if (r.mode == "sampled") row.ci = r.ci99_halfwidth;
                    values[nf.id].push_back(r.value);
                } catch (const Error& e) {
                    row.error = e.what();
                    failed[nf.id] = true;
                }
            }
            table.rows.push_back(std::move(row));
        }
    }
    for (const auto& nf : formulas)
        table.verdicts[nf.id] =
            failed[nf.id] ? "inconclusive" : detail::trend_verdict(values[nf.id], opt.tau);
    return table;
}

// Commas inside error text would break the simple CSV shape; flatten them.
inline std::string csv_safe(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return text;
}

inline std::string convergence_to_csv(const ConvergenceTable& table) {
    std::string out = "n,formula_id,value,mode,ci_halfwidth,verdict\n";
    for (const auto& row : table.rows) {
        out += std::to_string(row.n) + "," + row.formula_id + ",";
        out += row.value ? fmt_g(*row.value) : "";
        out += "," + row.mode + ",";
        out += row.ci ? fmt_g(*row.ci) : "";
        out += ",";
        if (!row.error.empty()) out += "error: " + csv_safe(row.error);
        else out += table.verdicts.at(row.formula_id);
        out += "\n";
    }
    return out;
}

inline ConvergenceTable convergence_from_csv(std::istream& in, double tau = 1e-2) {
    ConvergenceTable table;
    table.tau = tau;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        while (cells.size() < 6) cells.push_back("");
        ConvergenceRow row;
        try {
            row.n = std::stoi(cells[0]);
        } catch (...) {
            fail(ErrorKind::Parse, "bad CSV row: " + line);
        }
        row.formula_id = cells[1];
        if (!cells[2].empty()) row.value = std::stod(cells[2]);
        row.mode = cells[3];
        if (!cells[4].empty()) row.ci = std::stod(cells[4]);
        if (cells[5].rfind("error: ", 0) == 0) row.error = cells[5].substr(7);
        table.rows.push_back(std::move(row));
    }
    // Verdicts are derived data: reclassify the trends at the given tau
    // instead of trusting the stored column, so a reloaded table can be
    // re-thresholded.
    std::map<std::string, std::vector<double>> values;
    std::set<std::string> failed;
    for (const auto& row : table.rows) {
        if (!row.error.empty()) failed.insert(row.formula_id);
        else if (row.value) values[row.formula_id].push_back(*row.value);
    }
    for (const auto& row : table.rows) {
        const std::string& id = row.formula_id;
        if (table.verdicts.count(id)) continue;
        table.verdicts[id] = failed.count(id) ? "inconclusive" : detail::trend_verdict(values[id], tau);
    }
    return table;
}

// --- limit theory emission ----------------------------------------------------

struct TheoryEmission {
    std::vector<std::string> lines;   // parseable sentences, one per line
    std::vector<std::string> notices; // comment lines for skipped formulas
};

// Turns per-formula trends into sentences: a formula with a positive empirical
// limit contributes its weight-quantifier closure, one tending to zero
// contributes the negation; sentences contribute themselves or their negation
// by final truth value. Inconclusive trends are skipped, with a notice.
inline TheoryEmission limit_theory_emit(const ConvergenceTable& table,
                                        const std::vector<NamedFormula>& formulas) {
    TheoryEmission out;
    for (const auto& nf : formulas) {
        std::vector<const ConvergenceRow*> rows;
        for (const auto& row : table.rows)
            if (row.formula_id == nf.id) rows.push_back(&row);
        if (rows.empty()) {
            out.notices.push_back("# " + nf.id + " skipped: no rows in table");
            continue;
        }
        bool any_error = false;
        for (const auto* row : rows) any_error |= !row->error.empty();
        if (any_error) {
            out.notices.push_back("# " + nf.id + " skipped: failed rows");
            continue;
        }
        FormulaInfo info = formula_info(nf.formula);
        if (info.free.empty()) {
            double last = *rows.back()->value;
            FormulaPtr emitted = last >= 0.5 ? nf.formula : f_not(nf.formula);
            out.lines.push_back(print_formula(emitted) + " # empirical, " + nf.id);
            continue;
        }
        auto it = table.verdicts.find(nf.id);
        std::string verdict = it == table.verdicts.end() ? "inconclusive" : it->second;
        FormulaPtr closure = nf.formula;
        for (auto v = info.free.rbegin(); v != info.free.rend(); ++v) closure = f_qm(*v, closure);
        if (verdict.rfind("positive-limit", 0) == 0) {
            out.lines.push_back(print_formula(closure) + " # empirical, " + nf.id);
        } else if (verdict.rfind("tends-to-zero", 0) == 0) {
            out.lines.push_back(print_formula(f_not(closure)) + " # empirical, " + nf.id);
        } else {
            out.notices.push_back("# " + nf.id + " skipped: inconclusive trend");
        }
    }
    return out;
}

// --- mass transport -----------------------------------------------------------

struct TransportReport {
    int b = 0; // min gamma-out-degree over phi's satisfiers, into psi's
    int a = 0; // max gamma-in-degree over psi's satisfiers, from phi's
    uint64_t phi_count = 0, psi_count = 0;         // of the strengthened formulas
    double lhs = 0, rhs = 0;                       // b*<phi'>, a*<psi'>
    bool holds = false;                            // decided in exact arithmetic
    bool exact_equality = false;
    bool sets_preserved = false;                   // phi' and psi' kept the satisfying sets
    FormulaPtr phi_prime, psi_prime;
};

// Double-counts gamma-pairs between the two satisfying sets. With b and a
// measured from the structure the strengthened formulas keep their sets, and
// b*|phi(s)| <= (pairs) <= a*|psi(s)| holds by counting.
inline TransportReport mass_transport_check(const Structure& s, const FormulaPtr& phi,
                                            const FormulaPtr& psi, const FormulaPtr& gamma,
                                            EvalOptions opt = {}) {
    FormulaInfo pi = formula_info(phi), qi = formula_info(psi), gi = formula_info(gamma);
    if (pi.free.size() != 1 || qi.free.size() != 1)
        fail(ErrorKind::Precondition, "phi and psi must each have exactly one free variable");
    if (gi.free.size() != 2) fail(ErrorKind::Precondition, "gamma must have exactly two free variables");

    std::vector<char> in_a(s.size(), 0), in_b(s.size(), 0);
    std::vector<Element> set_a, set_b;
    for (const auto& t : satisfying_assignments(s, phi, opt)) {
        in_a[t[0]] = 1;
        set_a.push_back(t[0]);
    }
    for (const auto& t : satisfying_assignments(s, psi, opt)) {
        in_b[t[0]] = 1;
        set_b.push_back(t[0]);
    }
    std::vector<int> out_deg(s.size(), 0), in_deg(s.size(), 0);
    for (const auto& t : satisfying_assignments(s, gamma, opt)) {
        if (in_a[t[0]] && in_b[t[1]]) {
            ++out_deg[t[0]];
            ++in_deg[t[1]];
        }
    }
    TransportReport r;
    if (!set_a.empty()) {
        int b = out_deg[set_a[0]];
        for (Element x : set_a) b = std::min(b, out_deg[x]);
        r.b = b;
    }
    for (Element y : set_b) r.a = std::max(r.a, in_deg[y]);

    r.phi_prime = r.b >= 1 ? canned::transport_lhs(phi, psi, gamma, r.b) : phi;
    r.psi_prime = canned::transport_rhs(phi, psi, gamma, r.a);

    auto sat_a = satisfying_assignments(s, r.phi_prime, opt);
    auto sat_b = satisfying_assignments(s, r.psi_prime, opt);
    r.phi_count = sat_a.size();
    r.psi_count = sat_b.size();
    r.sets_preserved = sat_a.size() == set_a.size() && sat_b.size() == set_b.size();

    if (s.uniform()) {
        double va = static_cast<double>(sat_a.size()) / s.size();
        double vb = static_cast<double>(sat_b.size()) / s.size();
        r.lhs = r.b * va;
        r.rhs = r.a * vb;
        unsigned long long L = static_cast<unsigned long long>(r.b) * sat_a.size();
        unsigned long long R = static_cast<unsigned long long>(r.a) * sat_b.size();
        r.holds = L <= R;
        r.exact_equality = L == R;
    } else {
        BigRational va(0), vb(0);
        for (const auto& t : sat_a) va += BigRational(s.weight(t[0]));
        for (const auto& t : sat_b) vb += BigRational(s.weight(t[0]));
        BigRational L = BigRational(r.b) * va, R = BigRational(r.a) * vb;
        r.lhs = r.b * static_cast<double>(va);
        r.rhs = r.a * static_cast<double>(vb);
        r.holds = L <= R;
        r.exact_equality = L == R;
    }
    return r;
}

// --- weight-quantifier probes ---------------------------------------------------

struct QmProbeReport {
    bool exists_qm = false;      // (exists y)(Qm x) phi
    double overlap = 0;          // <two rows share a column>
    bool agree = false;          // exists_qm iff overlap > 0
    std::vector<double> refusal; // k = 1..K: <some column refuses one of k rows>^(1/k)
};

inline QmProbeReport qm_probes(const Structure& s, const FormulaPtr& phi, int k_max,
                               EvalOptions opt = {}) {
    if (k_max < 1) fail(ErrorKind::Precondition, "k_max must be >= 1");
    QmProbeReport r;
    r.exists_qm = qm_satisfies(s, canned::probe_exists_qm(phi), opt);
    std::string u1, u2;
    FormulaPtr chi = canned::shared_witness(phi, u1, u2);
    r.overlap = stone_pairing_exact(s, chi, opt).value;
    r.agree = r.exists_qm == (r.overlap > 0);
    for (int k = 1; k <= k_max; ++k) {
        std::vector<std::string> us;
        FormulaPtr refusal = canned::some_refusal(phi, k, us);
        double v = stone_pairing_exact(s, refusal, opt).value;
        r.refusal.push_back(std::pow(v, 1.0 / k));
    }
    return r;
}

// --- end-to-end pipeline --------------------------------------------------------

struct PipelineOptions {
    int radius = 1;
    double epsilon = 0.5;
    int n_max = 8;          // skeleton size cap
    int m_budget = 3;       // marks eliminated per structure
    EncodeOptions encode;
    EvalOptions eval;
    LocalProductOptions local;
};

struct PipelineRoundTrip {
    std::string id, text;
    double lhs = 0, rhs = 0; // pairing on marked input vs rewritten on encoded
    bool equal = false;      // bitwise doubles
    bool rational_equal = false;
    std::string note;        // why skipped, if skipped
};

struct PipelineStep {
    int n = 0;
    std::vector<Element> skeleton;
    int m = 0;
    ResidualReport encoded_residual;
    std::vector<PipelineRoundTrip> roundtrips;
    double tilde = 0, exact = 0, bound = 0;
    bool gap_ok = false;
    std::string local_note;
    bool ok = false;
};

struct PipelineReport {
    std::vector<PipelineStep> steps;
    bool counts_monotone = true;
    bool all_ok = false;
};

// mark -> encode -> re-measure residuality -> rewrite the battery and compare
// pairings exactly -> product-estimate sanity on the encoded structure.
inline PipelineReport pipeline_demo(const GeneratorSpec& spec, const std::vector<int>& sizes,
                                    const std::vector<NamedFormula>& formulas, PipelineOptions opt = {}) {
    if (sizes.empty()) fail(ErrorKind::Usage, "no sizes given");
    std::vector<Structure> seq;
    seq.reserve(sizes.size());
    for (int n : sizes) seq.push_back(generate(spec, n));
    MarkPlanResult plan = mark_plan(seq, {opt.radius}, opt.epsilon, opt.n_max);

    PipelineReport report;
    report.counts_monotone = plan.counts_monotone;
    bool all_ok = true;
    for (size_t i = 0; i < seq.size(); ++i) {
        PipelineStep step;
        step.n = seq[i].size();
        step.skeleton = plan.plans[i].skeleton;
        step.m = std::min(opt.m_budget, static_cast<int>(step.skeleton.size()));
        const Structure& marked = plan.marked[i];
        Structure encoded = encode_marked(marked, step.m, opt.encode);
        step.encoded_residual = max_ball_fraction(encoded, opt.radius, opt.epsilon);

        EliminationTheory theory = elimination_theory(marked, step.m);
        bool step_ok = step.encoded_residual.residual;
        for (const auto& nf : formulas) {
            PipelineRoundTrip rt;
            rt.id = nf.id;
            rt.text = nf.text;
            try {
                FormulaPtr rewritten = eliminate_formula(nf.formula, theory);
                rt.lhs = stone_pairing_exact(marked, nf.formula, opt.eval).value;
                rt.rhs = stone_pairing_exact(encoded, rewritten, opt.eval).value;
                rt.equal = rt.lhs == rt.rhs;
                rt.rational_equal = stone_pairing_exact_rational(marked, nf.formula, opt.eval) ==
                                    stone_pairing_exact_rational(encoded, rewritten, opt.eval);
                step_ok = step_ok && rt.equal && rt.rational_equal;
            } catch (const Error& e) {
                rt.note = e.what();
                step_ok = false;
            }
            step.roundtrips.push_back(std::move(rt));
        }

        try {
            LocalProductResult lp =
                local_product_estimate(encoded, f_rel("E", {"x1", "x2"}), opt.radius, opt.local);
            step.tilde = lp.tilde;
            step.exact = lp.exact;
            step.bound = lp.bound;
            step.gap_ok = lp.exact_q >= lp.tilde_q ? (lp.exact_q - lp.tilde_q) <= lp.bound_q
                                                   : (lp.tilde_q - lp.exact_q) <= lp.bound_q;
            step_ok = step_ok && step.gap_ok;
        } catch (const Error& e) {
            step.local_note = e.what();
        }

        step.ok = step_ok;
        all_ok = all_ok && step_ok;
        report.steps.push_back(std::move(step));
    }
    report.all_ok = all_ok && plan.counts_monotone;
    return report;
}

} // namespace folab
