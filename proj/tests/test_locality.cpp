#include <catch2/catch_amalgamated.hpp>

#include <folab/folab.hpp>

#include "oracles.hpp"
#include "testutil.hpp"

using namespace folab;
using Catch::Matchers::ContainsSubstring;

namespace {

Structure family(GeneratorSpec::Family f, int n) {
    GeneratorSpec spec;
    spec.family = f;
    return generate(spec, n);
}

Structure rooted_ball(const Structure& s, Element v, int radius, Element& root_out) {
    std::vector<Element> bl = ball(s, v, radius);
    auto it = std::lower_bound(bl.begin(), bl.end(), v);
    root_out = static_cast<Element>(it - bl.begin());
    return induced_substructure(s, bl);
}

} // namespace

TEST_CASE("path of five splits into ends and interior at radius one") {
    Structure p5 = family(GeneratorSpec::Family::Path, 5);
    TypePartition tp = local_types(p5, 1);
    REQUIRE(tp.classes.size() == 2);
    REQUIRE(tp.class_of[0] == tp.class_of[4]);
    REQUIRE(tp.class_of[1] == tp.class_of[2]);
    REQUIRE(tp.class_of[2] == tp.class_of[3]);
    REQUIRE(tp.class_of[0] != tp.class_of[2]);
    for (const auto& cls : tp.classes) {
        if (cls.members == std::vector<Element>{0, 4}) REQUIRE(cls.frequency == 0.4);
        else {
            REQUIRE(cls.members == std::vector<Element>{1, 2, 3});
            REQUIRE(cls.frequency == 0.6);
        }
    }
    REQUIRE(std::is_sorted(tp.classes.begin(), tp.classes.end(),
                           [](const TypeClass& a, const TypeClass& b) { return a.code < b.code; }));

    // At radius two the interior splits again: vertex 2 sees the whole path.
    TypePartition tp2 = local_types(p5, 2);
    REQUIRE(tp2.classes.size() == 3);
    REQUIRE(tp2.class_of[1] == tp2.class_of[3]);
    REQUIRE(tp2.class_of[0] != tp2.class_of[2]);
}

TEST_CASE("vertex transitive structures have one type") {
    TypePartition tp = local_types(family(GeneratorSpec::Family::Cycle, 6), 1);
    REQUIRE(tp.classes.size() == 1);
    REQUIRE(tp.classes[0].frequency == 1.0);
    REQUIRE(tp.classes[0].members.size() == 6);
}

TEST_CASE("star splits into center and leaves") {
    Structure st = family(GeneratorSpec::Family::Star, 5);
    TypePartition tp = local_types(st, 1, LocalTypeOptions{12, 2'000'000});
    REQUIRE(tp.classes.size() == 2);
    for (const auto& cls : tp.classes) {
        if (cls.members.size() == 1) REQUIRE(cls.frequency == 0.2);
        else REQUIRE(cls.frequency == 0.8);
    }
}

TEST_CASE("unary predicates refine types at radius zero") {
    Structure p3 = family(GeneratorSpec::Family::Path, 3).with_unary_added("U", {1});
    TypePartition tp = local_types(p3, 0);
    REQUIRE(tp.classes.size() == 2);
    REQUIRE(tp.class_of[0] == tp.class_of[2]);
    REQUIRE(tp.class_of[0] != tp.class_of[1]);
}

TEST_CASE("codes agree exactly with brute force rooted isomorphism") {
    SplitMix64 rng(17);
    LocalTypeOptions opt;
    for (int trial = 0; trial < 40; ++trial) {
        Structure s = testutil::random_structure(rng, 6, false, trial % 2);
        int radius = static_cast<int>(rng.next() % 3);
        TypePartition tp = local_types(s, radius, opt);
        for (Element u = 0; u < s.size(); ++u)
            for (Element v = u; v < s.size(); ++v) {
                Element ru, rv;
                Structure bu = rooted_ball(s, u, radius, ru);
                Structure bv = rooted_ball(s, v, radius, rv);
                bool iso = oracle::rooted_isomorphic(bu, ru, bv, rv);
                bool same = tp.class_of[u] == tp.class_of[v];
                INFO("trial " << trial << " radius " << radius << " u=" << u << " v=" << v);
                REQUIRE(iso == same);
            }
    }
}

TEST_CASE("larger radius refines the partition") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        Structure s = testutil::random_structure(rng, 8, false, 0);
        LocalTypeOptions opt;
        opt.ball_budget = 8;
        TypePartition coarse, fine;
        try {
            coarse = local_types(s, 1, opt);
            fine = local_types(s, 2, opt);
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::Budget); // dense draw: skip
            continue;
        }
        for (Element u = 0; u < s.size(); ++u)
            for (Element v = u + 1; v < s.size(); ++v)
                if (fine.class_of[u] == fine.class_of[v])
                    REQUIRE(coarse.class_of[u] == coarse.class_of[v]);
    }
}

TEST_CASE("type budgets bound work") {
    Structure p5 = family(GeneratorSpec::Family::Path, 5);
    try {
        local_types(p5, 1, LocalTypeOptions{2, 2'000'000});
        FAIL("expected a ball budget error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::Budget);
        REQUIRE_THAT(e.what(), ContainsSubstring("ball"));
    }
    try {
        local_types(family(GeneratorSpec::Family::Cycle, 8), 1, LocalTypeOptions{12, 1});
        FAIL("expected a labeling budget error");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::Budget);
    }
    REQUIRE_THROWS_AS(local_types(p5, -1), Error);
}

TEST_CASE("frequencies sum to one in rational arithmetic") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        Structure s = testutil::random_structure(rng, 7, trial % 2 == 1);
        TypePartition tp = local_types(s, 1);
        BigRational total(0);
        for (const auto& cls : tp.classes) total += class_mass_rational(s, cls);
        REQUIRE(total == 1);
    }
}

TEST_CASE("reweight hits targets and keeps fixed points bitwise") {
    Structure p5 = family(GeneratorSpec::Family::Path, 5);
    TypePartition tp = local_types(p5, 1);
    size_t ends = tp.classes[0].members.size() == 2 ? 0 : 1;
    size_t interior = 1 - ends;

    std::vector<double> targets(2);
    targets[ends] = 0.5;
    targets[interior] = 0.5;
    Structure rw = reweight_to_targets(p5, tp, targets);
    REQUIRE(rw.weight(0) == 0.25); // 0.2 * (0.5/0.4), exact in binary
    TypePartition tw = local_types(rw, 1);
    for (const auto& cls : tw.classes) REQUIRE(cls.frequency == Catch::Approx(0.5).margin(1e-12));

    // Fixed point: targets equal to current masses must reproduce the weights.
    std::vector<double> same(2);
    same[ends] = 0.4;
    same[interior] = 0.6;
    Structure fixed = reweight_to_targets(p5, tp, same);
    REQUIRE(fixed.uniform()); // 0.2 * 1.0 stays exactly 1/5
    for (Element v = 0; v < 5; ++v) REQUIRE(fixed.weight(v) == 0.2);

    // Zeroing a class zeroes exactly its members.
    std::vector<double> zero(2);
    zero[ends] = 0.0;
    zero[interior] = 1.0;
    Structure z = reweight_to_targets(p5, tp, zero);
    REQUIRE(z.weight(0) == 0.0);
    REQUIRE(z.weight(4) == 0.0);
    REQUIRE(z.weight(1) > 0.0);

    REQUIRE_THROWS_AS(reweight_to_targets(p5, tp, {1.0}), Error);
    REQUIRE_THROWS_AS(reweight_to_targets(p5, tp, {0.7, 0.7}), Error);
    REQUIRE_THROWS_AS(reweight_to_targets(p5, tp, {-0.5, 1.5}), Error);
    // A zero-mass class cannot absorb positive target mass.
    TypePartition tz = local_types(z, 1);
    size_t dead = 0;
    while (dead < tz.classes.size() && tz.classes[dead].frequency != 0.0) ++dead;
    REQUIRE(dead < tz.classes.size());
    std::vector<double> revive(tz.classes.size(), 0.0);
    revive[dead] = 1.0;
    REQUIRE_THROWS_AS(reweight_to_targets(z, tz, revive), Error);
}

TEST_CASE("random reweights land within tolerance") {
    SplitMix64 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        Structure s = testutil::random_structure(rng, 7, trial % 2 == 1);
        TypePartition tp = local_types(s, 1);
        const size_t k = tp.classes.size();
        // Random dyadic targets, skewed toward the first classes.
        std::vector<double> targets(k, 0.0);
        long long denom = 1LL << 20, left = denom;
        for (size_t i = 0; i + 1 < k; ++i) {
            long long grab = static_cast<long long>(rng.next() % static_cast<uint64_t>(left + 1));
            targets[i] = static_cast<double>(grab) / static_cast<double>(denom);
            left -= grab;
        }
        targets[k - 1] = static_cast<double>(left) / static_cast<double>(denom);
        Structure rw = reweight_to_targets(s, tp, targets);
        TypePartition tw = local_types(rw, 1);
        // Same partition (weights do not change ball shapes), masses on target.
        REQUIRE(tw.classes.size() >= 1);
        std::vector<double> mass(k, 0.0);
        for (Element v = 0; v < s.size(); ++v) mass[tp.class_of[v]] += rw.weight(v);
        for (size_t i = 0; i < k; ++i) REQUIRE(mass[i] == Catch::Approx(targets[i]).margin(1e-12));
    }
}

TEST_CASE("product estimate on the cycle") {
    Structure c20 = family(GeneratorSpec::Family::Cycle, 20);
    LocalProductResult lp = local_product_estimate(c20, parse_formula("E(x1, x2)"), 1);
    REQUIRE(lp.exact == 0.1);        // 40 directed edges out of 400 pairs
    REQUIRE(lp.tilde == 0.0);        // representatives live in separate components
    REQUIRE(lp.bound == 0.25);       // every 2-ball has 5 of 20 vertices
    REQUIRE(lp.exact_q == BigRational(1, 10));
    REQUIRE(lp.bound_q == BigRational(1, 4));
    REQUIRE(lp.support.empty());
    REQUIRE(lp.exact_q - lp.tilde_q <= lp.bound_q);

    // A genuinely product-like formula: both coordinates interior.
    Structure p6 = family(GeneratorSpec::Family::Path, 6);
    FormulaPtr interior = parse_formula("(exists y. E(x1, y) & dist>0(y, x1)) & exists z. E(x2, z)");
    LocalProductResult both = local_product_estimate(p6, interior, 1);
    REQUIRE(both.exact == 1.0);
    REQUIRE(both.tilde_q == 1); // every class representative has a neighbor
    REQUIRE(both.tilde == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("product estimate rejects non local and weighted quantifier input") {
    Structure p10 = family(GeneratorSpec::Family::Path, 10).with_unary_added("U", {9});
    try {
        local_product_estimate(p10, parse_formula("x1 = x1 & exists z. U(z)"), 1);
        FAIL("expected a locality rejection");
    } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::Precondition);
        REQUIRE_THAT(e.what(), ContainsSubstring("local"));
    }
    Structure p4 = family(GeneratorSpec::Family::Path, 4);
    REQUIRE_THROWS_AS(local_product_estimate(p4, parse_formula("Qm y. E(x1, y)"), 1), Error);
    REQUIRE_THROWS_AS(local_product_estimate(p4, parse_formula("exists y. E(y, y)"), 1), Error);
}

TEST_CASE("product estimate error is within the bound on random graphs") {
    SplitMix64 rng(61);
    int done = 0;
    for (int trial = 0; trial < 30 && done < 12; ++trial) {
        Structure s = testutil::random_structure(rng, 7, false);
        LocalProductResult lp;
        try {
            lp = local_product_estimate(s, parse_formula("E(x1, x2)"), 1);
        } catch (const Error&) {
            continue; // dense draw beyond ball budget, or degenerate locality check
        }
        BigRational gap = lp.exact_q >= lp.tilde_q ? lp.exact_q - lp.tilde_q : lp.tilde_q - lp.exact_q;
        REQUIRE(gap <= lp.bound_q);
        ++done;
    }
    REQUIRE(done >= 12);
}
