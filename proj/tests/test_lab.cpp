#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include <folab/folab.hpp>

#include "oracles.hpp"
#include "testutil.hpp"

using namespace folab;
using Catch::Matchers::ContainsSubstring;

namespace {

NamedFormula named(const std::string& id, const std::string& text) {
    return NamedFormula{id, text, parse_formula(text)};
}

GeneratorSpec path_spec() {
    GeneratorSpec spec;
    spec.family = GeneratorSpec::Family::Path;
    return spec;
}

GeneratorSpec star_spec() {
    GeneratorSpec spec;
    spec.family = GeneratorSpec::Family::Star;
    return spec;
}

} // namespace

TEST_CASE("trend labels follow the pinned rules") {
    ConvergenceOptions opt;
    opt.tau = 0.3;
    std::vector<NamedFormula> battery{
        named("f0", "x1 = x1"),    // constant 1: positive limit
        named("f1", "x1 = x2"),    // 1/n: tends to zero
        named("f2", "!(x1 = x2)"), // 1 - 1/n: above tau but band too wide at these sizes
    };
    ConvergenceTable table = run_convergence(path_spec(), {5, 10, 20}, battery, opt);
    REQUIRE(table.verdicts.at("f0") == "positive-limit (empirical)");
    REQUIRE(table.verdicts.at("f1") == "tends-to-zero (empirical)");
    REQUIRE(table.verdicts.at("f2") == "inconclusive");
    REQUIRE(table.rows.size() == 9);
    REQUIRE(table.rows[0].n == 5);
    REQUIRE(table.rows[0].formula_id == "f0");
    REQUIRE(table.rows[1].formula_id == "f1");
    REQUIRE(table.rows[3].n == 10);
    REQUIRE(table.rows[4].value == 0.1); // <x1 = x2> on the 10 element path
    REQUIRE(table.rows[4].mode == "exact");
    REQUIRE_FALSE(table.rows[4].ci.has_value());

    // Fewer than three rows never decides.
    ConvergenceTable small = run_convergence(path_spec(), {5, 10}, battery, opt);
    REQUIRE(small.verdicts.at("f0") == "inconclusive");
    REQUIRE(small.verdicts.at("f1") == "inconclusive");

    REQUIRE_THROWS_AS(run_convergence(path_spec(), {}, battery, opt), Error);
    REQUIRE_THROWS_AS(run_convergence(path_spec(), {5}, {}, opt), Error);
}

TEST_CASE("failed rows are captured and force inconclusive") {
    GeneratorSpec spec;
    spec.family = GeneratorSpec::Family::Cycle;
    ConvergenceOptions opt;
    opt.tau = 0.3;
    std::vector<NamedFormula> battery{named("f0", "x1 = x1")};
    // A cycle needs three elements: the first size fails, the rest compute.
    ConvergenceTable table = run_convergence(spec, {2, 4, 6, 8}, battery, opt);
    REQUIRE_FALSE(table.rows[0].error.empty());
    REQUIRE_FALSE(table.rows[0].value.has_value());
    REQUIRE(table.rows[1].value == 1.0);
    REQUIRE(table.verdicts.at("f0") == "inconclusive");
    std::string csv = convergence_to_csv(table);
    REQUIRE_THAT(csv, ContainsSubstring("error: "));
    REQUIRE(csv.find(',') != std::string::npos);
    // Error text never smuggles in extra separators.
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) REQUIRE(std::count(line.begin(), line.end(), ',') == 5);
}

TEST_CASE("convergence CSV is byte stable and round trips") {
    ConvergenceOptions opt;
    opt.tau = 0.3;
    std::vector<NamedFormula> battery{named("f0", "x1 = x2")};
    ConvergenceTable table = run_convergence(path_spec(), {5, 10, 20}, battery, opt);
    std::string csv = convergence_to_csv(table);
    std::string expected = "n,formula_id,value,mode,ci_halfwidth,verdict\n"
                           "5,f0,0.2,exact,,tends-to-zero (empirical)\n"
                           "10,f0,0.1,exact,,tends-to-zero (empirical)\n"
                           "20,f0,0.05,exact,,tends-to-zero (empirical)\n";
    REQUIRE(csv == expected);
    REQUIRE(convergence_to_csv(run_convergence(path_spec(), {5, 10, 20}, battery, opt)) == csv);

    std::istringstream in(csv);
    ConvergenceTable back = convergence_from_csv(in, opt.tau);
    REQUIRE(convergence_to_csv(back) == csv);
    REQUIRE(back.rows.size() == 3);
    REQUIRE(back.rows[2].value == 0.05);
    REQUIRE(back.verdicts.at("f0") == "tends-to-zero (empirical)");

    std::istringstream bad("n,formula_id,value,mode,ci_halfwidth,verdict\noops,f0,,,,x\n");
    REQUIRE_THROWS_AS(convergence_from_csv(bad), Error);
}

TEST_CASE("sampled convergence rows carry the interval") {
    ConvergenceOptions opt;
    opt.samples = 500;
    opt.seed = 7;
    std::vector<NamedFormula> battery{named("f0", "E(x1, x2)")};
    ConvergenceTable table = run_convergence(path_spec(), {6, 12}, battery, opt);
    for (const auto& row : table.rows) {
        REQUIRE(row.mode == "sampled");
        REQUIRE(row.ci.has_value());
        REQUIRE(*row.ci == hoeffding99_halfwidth(500));
        REQUIRE(*row.value >= 0.0);
        REQUIRE(*row.value <= 1.0);
    }
    ConvergenceTable again = run_convergence(path_spec(), {6, 12}, battery, opt);
    REQUIRE(convergence_to_csv(again) == convergence_to_csv(table));
}

TEST_CASE("limit theory emission closes free variables under the weight quantifier") {
    ConvergenceOptions opt;
    opt.tau = 0.3;
    std::vector<NamedFormula> battery{
        named("f0", "x1 = x1"),
        named("f1", "x1 = x2"),
        named("f2", "exists y. exists z. E(y, z)"), // true sentence
        named("f3", "forall y. forall z. E(y, z)"), // false sentence
        named("f4", "!(x1 = x2)"),                  // inconclusive at these sizes
    };
    ConvergenceTable table = run_convergence(path_spec(), {5, 10, 20}, battery, opt);
    TheoryEmission emission = limit_theory_emit(table, battery);
    REQUIRE(emission.lines.size() == 4);
    REQUIRE(emission.lines[0] == "Qm x1. x1 = x1 # empirical, f0");
    REQUIRE(emission.lines[1] == "!Qm x1. Qm x2. x1 = x2 # empirical, f1");
    REQUIRE(emission.lines[2] == "exists y. exists z. E(y, z) # empirical, f2");
    REQUIRE(emission.lines[3] == "!forall y. forall z. E(y, z) # empirical, f3");
    REQUIRE(emission.notices == std::vector<std::string>{"# f4 skipped: inconclusive trend"});
    // Every emitted sentence parses back.
    for (const auto& line : emission.lines) {
        FormulaPtr f = parse_formula(line.substr(0, line.find(" #")));
        REQUIRE(formula_info(f).free.empty());
    }

    // Formulas with failed rows or no rows at all are skipped with a notice.
    GeneratorSpec cyc;
    cyc.family = GeneratorSpec::Family::Cycle;
    ConvergenceTable broken = run_convergence(cyc, {2, 4, 6}, {battery[0]}, opt);
    TheoryEmission skipped = limit_theory_emit(broken, {battery[0], battery[1]});
    REQUIRE(skipped.lines.empty());
    REQUIRE(skipped.notices == std::vector<std::string>{"# f0 skipped: failed rows",
                                                        "# f1 skipped: no rows in table"});
}

TEST_CASE("mass transport on the star double counts the edges") {
    Structure star5 = generate(star_spec(), 5);
    FormulaPtr phi = parse_formula("exists y. E(x1, y) & forall z. (E(x1, z) -> z = y)");
    FormulaPtr psi = f_not(phi);
    FormulaPtr gamma = parse_formula("E(x1, x2)");
    TransportReport r = mass_transport_check(star5, phi, psi, gamma);
    REQUIRE(r.b == 1);
    REQUIRE(r.a == 4);
    REQUIRE(r.phi_count == 4);
    REQUIRE(r.psi_count == 1);
    REQUIRE(r.lhs == 0.8);
    REQUIRE(r.rhs == 0.8);
    REQUIRE(r.holds);
    REQUIRE(r.exact_equality);
    REQUIRE(r.sets_preserved);
    // The strengthened formulas are well formed and printable.
    REQUIRE(formula_info(r.phi_prime).free.size() == 1);
    REQUIRE(formula_info(r.psi_prime).free.size() == 1);
    REQUIRE_FALSE(print_formula(r.phi_prime).empty());
}

TEST_CASE("mass transport trivial and weighted cases") {
    GeneratorSpec cyc;
    cyc.family = GeneratorSpec::Family::Cycle;
    Structure c4 = generate(cyc, 4);
    FormulaPtr all = parse_formula("x1 = x1");
    FormulaPtr gamma = parse_formula("E(x1, x2)");
    TransportReport r = mass_transport_check(c4, all, all, gamma);
    REQUIRE(r.b == 2);
    REQUIRE(r.a == 2);
    REQUIRE(r.holds);
    REQUIRE(r.exact_equality); // 2 * 4 == 2 * 4
    REQUIRE(r.sets_preserved);

    Structure star4 = generate(star_spec(), 4).with_weights({0.5, 0.25, 0.125, 0.125});
    FormulaPtr phi = parse_formula("exists y. E(x1, y) & forall z. (E(x1, z) -> z = y)");
    TransportReport w = mass_transport_check(star4, phi, f_not(phi), gamma);
    REQUIRE(w.b == 1);
    REQUIRE(w.a == 3);
    REQUIRE(w.lhs == 0.5); // leaves weigh 0.25 + 0.125 + 0.125
    REQUIRE(w.rhs == 1.5); // 3 times the center's 0.5
    REQUIRE(w.holds);
    REQUIRE_FALSE(w.exact_equality);
    REQUIRE(w.sets_preserved);
}

TEST_CASE("mass transport rejects malformed shapes") {
    Structure c4 = [] {
        GeneratorSpec cyc;
        cyc.family = GeneratorSpec::Family::Cycle;
        return generate(cyc, 4);
    }();
    FormulaPtr unary = parse_formula("x1 = x1");
    FormulaPtr binary = parse_formula("E(x1, x2)");
    FormulaPtr sentence = parse_formula("exists y. y = y");
    auto expect_precondition = [&](auto&& call) {
        try {
            call();
            FAIL("expected a precondition error");
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::Precondition);
        }
    };
    expect_precondition([&] { mass_transport_check(c4, binary, unary, binary); });
    expect_precondition([&] { mass_transport_check(c4, unary, sentence, binary); });
    expect_precondition([&] { mass_transport_check(c4, unary, unary, unary); });
}

TEST_CASE("weight quantifier probes on the four cycle") {
    GeneratorSpec cyc;
    cyc.family = GeneratorSpec::Family::Cycle;
    Structure c4 = generate(cyc, 4);
    QmProbeReport r = qm_probes(c4, parse_formula("E(x1, x2)"), 3);
    REQUIRE(r.exists_qm);
    REQUIRE(r.overlap == 0.5); // pairs with a common neighbour: same or opposite corner
    REQUIRE(r.agree);
    REQUIRE(r.refusal.size() == 3);
    for (double v : r.refusal) REQUIRE(v == 1.0); // x2 = u refuses u: no loops

    REQUIRE_THROWS_AS(qm_probes(c4, parse_formula("E(x1, x2)"), 0), Error);
    REQUIRE_THROWS_AS(qm_probes(c4, parse_formula("x1 = x1"), 2), Error);
}

TEST_CASE("weight quantifier probes see weightless witnesses") {
    // Edges exist only at a weight zero element: the probe must refuse them.
    StructureData d;
    d.domain = 3;
    d.relations["E"] = {{0, 1}, {1, 0}};
    d.weights = {0.0, 0.0, 1.0};
    Structure s = Structure::from_data(d);
    QmProbeReport r = qm_probes(s, parse_formula("E(x1, x2)"), 2);
    REQUIRE_FALSE(r.exists_qm); // all witnesses weigh nothing
    REQUIRE(r.overlap == 0.0);  // and the shared witness mass vanishes too
    REQUIRE(r.agree);
}

TEST_CASE("pipeline runs the star sequence end to end") {
    std::vector<NamedFormula> battery{named("f0", "E(x1, x2)"), named("f1", "exists y. E(x1, y)")};
    PipelineOptions opt;
    opt.radius = 1;
    opt.epsilon = 0.5;
    opt.n_max = 8;
    opt.m_budget = 3;
    PipelineReport report = pipeline_demo(star_spec(), {10, 20}, battery, opt);
    REQUIRE(report.steps.size() == 2);
    REQUIRE(report.counts_monotone);
    REQUIRE(report.all_ok);
    for (size_t i = 0; i < report.steps.size(); ++i) {
        const PipelineStep& step = report.steps[i];
        REQUIRE(step.skeleton == std::vector<Element>{0}); // the hub dominates every ball
        REQUIRE(step.m == 1);
        REQUIRE(step.encoded_residual.residual);
        REQUIRE(step.encoded_residual.max_fraction == 1.0 / step.n); // encoding isolates everyone
        REQUIRE(step.roundtrips.size() == 2);
        for (const auto& rt : step.roundtrips) {
            REQUIRE(rt.note.empty());
            REQUIRE(rt.equal);
            REQUIRE(rt.rational_equal);
        }
        REQUIRE(step.gap_ok);
        REQUIRE(step.local_note.empty());
        REQUIRE(step.ok);
    }
    REQUIRE(report.steps[0].roundtrips[0].lhs == 18.0 / 100.0);
    REQUIRE(report.steps[0].roundtrips[1].lhs == 1.0);

    // A distance atom cannot cross the encoding: the step reports it and fails.
    std::vector<NamedFormula> bad{named("f0", "dist<=1(x1, x2)")};
    PipelineReport broken = pipeline_demo(star_spec(), {10}, bad, opt);
    REQUIRE_FALSE(broken.all_ok);
    REQUIRE_FALSE(broken.steps[0].ok);
    REQUIRE_THAT(broken.steps[0].roundtrips[0].note, ContainsSubstring("distance"));

    REQUIRE_THROWS_AS(pipeline_demo(star_spec(), {}, battery, opt), Error);
}

TEST_CASE("format helper prints twelve significant digits") {
    REQUIRE(fmt_g(0.5) == "0.5");
    REQUIRE(fmt_g(1.0 / 3.0) == "0.333333333333");
    REQUIRE(fmt_g(0.0) == "0");
    REQUIRE(fmt_g(1e-9) == "1e-09");
}
