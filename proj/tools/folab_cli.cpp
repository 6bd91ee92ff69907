// Command line front end: every operation reads/writes JSON or CSV files so
// runs are scriptable and reproducible. Exit codes: 0 ok, 1 usage or parse
// problem, 2 budget exhausted, 3 invariant or precondition violation.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <folab/folab.hpp>

namespace {

using namespace folab;

void write_text(const std::optional<std::string>& out_path, const std::string& text) {
    if (!out_path) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << "\n";
        return;
    }
    std::ofstream out(*out_path);
    if (!out) fail(ErrorKind::Usage, "cannot open output file " + *out_path);
    out << text;
    if (text.empty() || text.back() != '\n') out << "\n";
}

void write_json(const std::optional<std::string>& out_path, const nlohmann::json& j) {
    write_text(out_path, j.dump(2));
}

std::vector<NamedFormula> gather_formulas(const std::optional<std::string>& formula,
                                          const std::optional<std::string>& formulas_file) {
    if (formula && formulas_file) fail(ErrorKind::Usage, "give either --formula or --formulas, not both");
    if (formula) {
        NamedFormula nf;
        nf.id = "f0";
        nf.text = *formula;
        nf.formula = parse_formula(*formula);
        return {nf};
    }
    if (formulas_file) {
        auto out = load_formula_file(*formulas_file);
        if (out.empty()) fail(ErrorKind::Usage, "no formulas in " + *formulas_file);
        return out;
    }
    fail(ErrorKind::Usage, "need --formula or --formulas");
}

GeneratorSpec make_spec(const std::string& family, double er_p, uint64_t er_seed) {
    GeneratorSpec spec;
    spec.family = parse_family(family);
    spec.er_p = er_p;
    spec.er_seed = er_seed;
    return spec;
}

struct Args {
    std::optional<std::string> structure, formula, formulas, out, theory_file, table;
    std::vector<std::string> structures;
    std::string family = "path", mode = "exact", targets;
    double er_p = 0.5, epsilon = 0.5, tau = 1e-2;
    uint64_t er_seed = 1, seed = 0, budget = 100'000'000ULL, samples = 0, label_budget = 2'000'000;
    std::vector<int> sizes, radii;
    int radius = 1, nmax = 8, marks = 0, arity_cap = 3, ball_budget = 12;
    int clique = 0, p = 0, m_budget = 3, kmax = 4;
    std::optional<std::string> out_dir;
    bool exact_flag = false;
};

Structure need_structure(const Args& a) {
    if (!a.structure) fail(ErrorKind::Usage, "need --structure FILE");
    return load_structure_file(*a.structure);
}

EvalOptions eval_opt(const Args& a) { return EvalOptions{a.budget}; }

int run(CLI::App& app, Args& a) {
    if (app.got_subcommand("pair")) {
        Structure s = need_structure(a);
        auto formulas = gather_formulas(a.formula, a.formulas);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& nf : formulas) {
            nlohmann::json j = pairing_to_json(stone_pairing_exact(s, nf.formula, eval_opt(a)));
            j["id"] = nf.id;
            j["formula"] = nf.text;
            out.push_back(std::move(j));
        }
        write_json(a.out, out.size() == 1 ? out[0] : out);
        return 0;
    }
    if (app.got_subcommand("sample")) {
        if (a.samples == 0) fail(ErrorKind::Usage, "need --samples N >= 1");
        Structure s = need_structure(a);
        auto formulas = gather_formulas(a.formula, a.formulas);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& nf : formulas) {
            nlohmann::json j =
                pairing_to_json(stone_pairing_sampled(s, nf.formula, a.samples, a.seed, eval_opt(a)));
            j["id"] = nf.id;
            j["formula"] = nf.text;
            out.push_back(std::move(j));
        }
        write_json(a.out, out.size() == 1 ? out[0] : out);
        return 0;
    }
    if (app.got_subcommand("converge")) {
        if (!a.formulas) fail(ErrorKind::Usage, "need --formulas FILE");
        if (a.exact_flag && a.samples > 0) fail(ErrorKind::Usage, "give --exact or --samples, not both");
        ConvergenceOptions opt;
        if (a.samples > 0) opt.samples = a.samples;
        opt.seed = a.seed;
        opt.tau = a.tau;
        opt.eval = eval_opt(a);
        ConvergenceTable table =
            run_convergence(make_spec(a.family, a.er_p, a.er_seed), a.sizes, load_formula_file(*a.formulas), opt);
        write_text(a.out, convergence_to_csv(table));
        return 0;
    }
    if (app.got_subcommand("types")) {
        Structure s = need_structure(a);
        LocalTypeOptions opt{a.ball_budget, a.label_budget};
        write_json(a.out, type_partition_to_json(local_types(s, a.radius, opt)));
        return 0;
    }
    if (app.got_subcommand("reweight")) {
        Structure s = need_structure(a);
        if (a.targets.empty()) fail(ErrorKind::Usage, "need --targets JSON array, e.g. [0.4,0.6]");
        nlohmann::json jt;
        try {
            jt = nlohmann::json::parse(a.targets);
        } catch (const std::exception& e) {
            fail(ErrorKind::Parse, std::string("bad --targets: ") + e.what());
        }
        if (!jt.is_array()) fail(ErrorKind::Usage, "--targets must be a JSON array of class masses");
        std::vector<double> targets;
        for (const auto& v : jt) targets.push_back(v.get<double>());
        LocalTypeOptions opt{a.ball_budget, a.label_budget};
        TypePartition tp = local_types(s, a.radius, opt);
        Structure rw = reweight_to_targets(s, tp, targets);
        write_json(a.out, structure_to_json(rw));
        return 0;
    }
    if (app.got_subcommand("skeleton")) {
        Structure s = need_structure(a);
        write_json(a.out, skeleton_to_json(skeleton_select(s, a.radius, a.epsilon, a.nmax)));
        return 0;
    }
    if (app.got_subcommand("mark")) {
        std::vector<Structure> seq;
        if (!a.structures.empty()) {
            for (const auto& path : a.structures) seq.push_back(load_structure_file(path));
        } else if (!a.sizes.empty()) {
            for (int n : a.sizes) seq.push_back(generate(make_spec(a.family, a.er_p, a.er_seed), n));
        } else {
            fail(ErrorKind::Usage, "need --structures FILES or --family/--sizes");
        }
        std::vector<int> radii = a.radii.empty() ? std::vector<int>{a.radius} : a.radii;
        MarkPlanResult res = mark_plan(seq, radii, a.epsilon, a.nmax);
        nlohmann::json out;
        out["counts_monotone"] = res.counts_monotone;
        nlohmann::json plans = nlohmann::json::array();
        for (const auto& p : res.plans) plans.push_back(mark_plan_to_json(p));
        out["plans"] = std::move(plans);
        if (a.out_dir) {
            for (size_t i = 0; i < res.marked.size(); ++i) {
                std::string path = *a.out_dir + "/marked_" + std::to_string(i) + "_n" +
                                   std::to_string(res.marked[i].size()) + ".json";
                std::ofstream f(path);
                if (!f) fail(ErrorKind::Usage, "cannot write " + path);
                f << structure_to_json(res.marked[i]).dump(2) << "\n";
            }
        }
        write_json(a.out, out);
        return 0;
    }
    if (app.got_subcommand("encode")) {
        Structure s = need_structure(a);
        write_json(a.out, structure_to_json(encode_marked(s, a.marks, EncodeOptions{a.arity_cap})));
        return 0;
    }
    if (app.got_subcommand("eliminate")) {
        if (!a.formula) fail(ErrorKind::Usage, "need --formula STR");
        FormulaPtr f = parse_formula(*a.formula);
        EliminationTheory theory;
        if (a.theory_file) {
            std::ifstream in(*a.theory_file);
            if (!in) fail(ErrorKind::Usage, "cannot open theory file " + *a.theory_file);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const std::exception& e) {
                fail(ErrorKind::Parse, std::string("theory file: ") + e.what());
            }
            theory = elimination_theory_from_json(j);
        } else if (a.structure) {
            theory = elimination_theory(load_structure_file(*a.structure), a.marks);
        } else {
            fail(ErrorKind::Usage, "need --theory FILE or --structure FILE with --marks");
        }
        nlohmann::json out;
        out["input"] = *a.formula;
        out["rewritten"] = print_formula(eliminate_formula(f, theory));
        out["theory"] = elimination_theory_to_json(theory);
        write_json(a.out, out);
        return 0;
    }
    if (app.got_subcommand("pipeline")) {
        if (!a.formulas) fail(ErrorKind::Usage, "need --formulas FILE");
        PipelineOptions opt;
        opt.radius = a.radius;
        opt.epsilon = a.epsilon;
        opt.n_max = a.nmax;
        opt.m_budget = a.m_budget;
        opt.encode = EncodeOptions{a.arity_cap};
        opt.eval = eval_opt(a);
        opt.local.types = LocalTypeOptions{a.ball_budget, a.label_budget};
        opt.local.eval = eval_opt(a);
        PipelineReport rep = pipeline_demo(make_spec(a.family, a.er_p, a.er_seed), a.sizes,
                                           load_formula_file(*a.formulas), opt);
        write_json(a.out, pipeline_to_json(rep));
        return 0;
    }
    if (app.got_subcommand("subdivision")) {
        Structure s = need_structure(a);
        if (a.clique < 2) fail(ErrorKind::Usage, "need --clique N >= 2");
        SubdivMode mode;
        if (a.mode == "exact") mode = SubdivMode::Exact;
        else if (a.mode == "at_most") mode = SubdivMode::AtMost;
        else fail(ErrorKind::Usage, "--mode must be exact or at_most");
        SubdivOptions opt;
        opt.step_budget = a.budget;
        auto w = find_subdivision(s, a.clique, a.p, mode, opt);
        nlohmann::json out;
        out["found"] = w.has_value();
        if (w) {
            out["witness"] = witness_to_json(*w);
            out["verified"] = verify_subdivision(s.gaifman(), *w);
        }
        write_json(a.out, out);
        return 0;
    }
    if (app.got_subcommand("theory")) {
        if (!a.table || !a.formulas) fail(ErrorKind::Usage, "need --table CSV and --formulas FILE");
        std::ifstream in(*a.table);
        if (!in) fail(ErrorKind::Usage, "cannot open table " + *a.table);
        ConvergenceTable table = convergence_from_csv(in, a.tau);
        TheoryEmission em = limit_theory_emit(table, load_formula_file(*a.formulas));
        std::string text;
        for (const auto& line : em.lines) text += line + "\n";
        for (const auto& note : em.notices) text += note + "\n";
        write_text(a.out, text);
        return 0;
    }
    if (app.got_subcommand("qm")) {
        Structure s = need_structure(a);
        if (!a.formula) fail(ErrorKind::Usage, "need --formula STR with two free variables");
        write_json(a.out, qm_probes_to_json(qm_probes(s, parse_formula(*a.formula), a.kmax, eval_opt(a))));
        return 0;
    }
    fail(ErrorKind::Usage, "no subcommand given (see --help)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite model workbench: pairings, residuality, encodings, witnesses"};
    app.require_subcommand(0, 1);
    Args a;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", a.out, "write output here instead of stdout");
        sub->add_option("--budget", a.budget, "work budget (default 1e8)");
    };
    auto add_structure = [&](CLI::App* sub) { sub->add_option("--structure", a.structure, "structure JSON file"); };
    auto add_formula_pair = [&](CLI::App* sub) {
        sub->add_option("--formula", a.formula, "formula text");
        sub->add_option("--formulas", a.formulas, "formula file, one per line, # comments");
    };
    auto add_family = [&](CLI::App* sub) {
        sub->add_option("--family", a.family, "path|cycle|grid|tree|star|er");
        sub->add_option("--er-p", a.er_p, "edge probability for er");
        sub->add_option("--er-seed", a.er_seed, "edge seed for er");
        sub->add_option("--sizes", a.sizes, "domain sizes")->delimiter(',');
    };

    CLI::App* pair = app.add_subcommand("pair", "exact pairing of formulas on a structure");
    add_common(pair);
    add_structure(pair);
    add_formula_pair(pair);

    CLI::App* sample = app.add_subcommand("sample", "sampled pairing with a 99% confidence halfwidth");
    add_common(sample);
    add_structure(sample);
    add_formula_pair(sample);
    sample->add_option("--samples", a.samples, "number of samples");
    sample->add_option("--seed", a.seed, "sampling seed");

    CLI::App* converge = app.add_subcommand("converge", "pairing table across a growing family (CSV)");
    add_common(converge);
    add_family(converge);
    converge->add_option("--formulas", a.formulas, "formula file");
    converge->add_flag("--exact", a.exact_flag, "exact pairings (the default)");
    converge->add_option("--samples", a.samples, "sample instead of exact");
    converge->add_option("--seed", a.seed, "sampling seed");
    converge->add_option("--tau", a.tau, "trend threshold");

    CLI::App* types = app.add_subcommand("types", "local type partition at a radius");
    add_common(types);
    add_structure(types);
    types->add_option("--radius", a.radius, "ball radius");
    types->add_option("--ball-budget", a.ball_budget, "max ball size");
    types->add_option("--label-budget", a.label_budget, "canonical search nodes");

    CLI::App* reweight = app.add_subcommand("reweight", "rescale weights to per-class targets");
    add_common(reweight);
    add_structure(reweight);
    reweight->add_option("--radius", a.radius, "ball radius");
    reweight->add_option("--targets", a.targets, "JSON array of class masses, class order");
    reweight->add_option("--ball-budget", a.ball_budget, "max ball size");

    CLI::App* skeleton = app.add_subcommand("skeleton", "greedy heavy-ball skeleton");
    add_common(skeleton);
    add_structure(skeleton);
    skeleton->add_option("--radius", a.radius, "ball radius");
    skeleton->add_option("--epsilon", a.epsilon, "residuality threshold");
    skeleton->add_option("--nmax", a.nmax, "skeleton size cap");

    CLI::App* mark = app.add_subcommand("mark", "skeleton marking plan for a sequence");
    add_common(mark);
    mark->add_option("--structures", a.structures, "structure files")->delimiter(',');
    add_family(mark);
    mark->add_option("--radii", a.radii, "radii")->delimiter(',');
    mark->add_option("--epsilon", a.epsilon, "residuality threshold");
    mark->add_option("--nmax", a.nmax, "skeleton size cap");
    mark->add_option("--out-dir", a.out_dir, "write marked structures here");

    CLI::App* encode = app.add_subcommand("encode", "delete marked tuples into trace relations");
    add_common(encode);
    add_structure(encode);
    encode->add_option("--marks,-m", a.marks, "number of marks to eliminate");
    encode->add_option("--arity-cap", a.arity_cap, "max relation arity");

    CLI::App* eliminate = app.add_subcommand("eliminate", "rewrite a formula over the encoded vocabulary");
    add_common(eliminate);
    add_structure(eliminate);
    eliminate->add_option("--formula", a.formula, "formula text");
    eliminate->add_option("--theory", a.theory_file, "elimination theory JSON");
    eliminate->add_option("--marks,-m", a.marks, "marks (with --structure)");

    CLI::App* pipeline = app.add_subcommand("pipeline", "mark, encode, re-measure, rewrite, compare");
    add_common(pipeline);
    add_family(pipeline);
    pipeline->add_option("--formulas", a.formulas, "formula battery");
    pipeline->add_option("--radius", a.radius, "ball radius");
    pipeline->add_option("--epsilon", a.epsilon, "residuality threshold");
    pipeline->add_option("--nmax", a.nmax, "skeleton size cap");
    pipeline->add_option("--m-budget", a.m_budget, "marks eliminated per structure");
    pipeline->add_option("--ball-budget", a.ball_budget, "max ball size");

    CLI::App* subdivision = app.add_subcommand("subdivision", "search for a p-subdivision of a clique");
    add_common(subdivision);
    add_structure(subdivision);
    subdivision->add_option("--clique,-N", a.clique, "principal vertices");
    subdivision->add_option("--p", a.p, "interior vertices per path");
    subdivision->add_option("--mode", a.mode, "exact|at_most");

    CLI::App* mtp = app.add_subcommand("mtp", "transport inequality between two unary sets");
    add_common(mtp);
    add_structure(mtp);
    std::string phi_text, psi_text, gamma_text;
    mtp->add_option("--phi", phi_text, "unary formula");
    mtp->add_option("--psi", psi_text, "unary formula");
    mtp->add_option("--gamma", gamma_text, "binary formula");

    CLI::App* theory = app.add_subcommand("theory", "emit empirical limit sentences from a table");
    add_common(theory);
    theory->add_option("--table", a.table, "convergence CSV");
    theory->add_option("--formulas", a.formulas, "formula file the table was built from");
    theory->add_option("--tau", a.tau, "trend threshold");

    CLI::App* qm = app.add_subcommand("qm", "weight-quantifier probes for a binary formula");
    add_common(qm);
    add_structure(qm);
    qm->add_option("--formula", a.formula, "binary formula");
    qm->add_option("--kmax", a.kmax, "refusal sequence length");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand("mtp")) {
            if (!a.structure) folab::fail(folab::ErrorKind::Usage, "need --structure FILE");
            if (phi_text.empty() || psi_text.empty() || gamma_text.empty())
                folab::fail(folab::ErrorKind::Usage, "need --phi, --psi and --gamma");
            folab::Structure s = folab::load_structure_file(*a.structure);
            folab::TransportReport r =
                folab::mass_transport_check(s, folab::parse_formula(phi_text), folab::parse_formula(psi_text),
                                            folab::parse_formula(gamma_text), folab::EvalOptions{a.budget});
            write_json(a.out, folab::transport_to_json(r));
            return 0;
        }
        return run(app, a);
    } catch (const folab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
