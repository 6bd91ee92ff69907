#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "error.hpp"
#include "structure.hpp"

namespace folab {

struct ResidualReport {
    int radius = 0;
    double max_fraction = 0; // heaviest closed d-ball mass
    Element argmax = -1;     // its center (smallest id on ties), -1 if no centers
    std::optional<double> epsilon;
    bool residual = false;   // max_fraction < epsilon, when epsilon given
};

namespace detail {

// Heaviest d-ball among non-excluded centers, balls measured in the graph
// with excluded vertices deleted. Uniform structures are compared by integer
// ball size and divided once, so reported fractions are single-rounding.
inline ResidualReport heaviest_ball(const Structure& s, int radius,
                                    const std::vector<char>* excluded,
                                    std::optional<double> epsilon) {
    if (radius < 0) fail(ErrorKind::Precondition, "radius must be >= 0");
    ResidualReport r;
    r.radius = radius;
    r.epsilon = epsilon;
    const GaifmanGraph& g = s.gaifman();
    if (s.uniform()) {
        size_t best = 0;
        for (Element v = 0; v < g.n; ++v) {
            if (excluded && (*excluded)[v]) continue;
            size_t size = ball(g, v, radius, excluded).size();
            if (size > best) { // strict: ties keep the smallest center id
                best = size;
                r.argmax = v;
            }
        }
        r.max_fraction = static_cast<double>(best) / s.size();
    } else {
        double best = -1;
        for (Element v = 0; v < g.n; ++v) {
            if (excluded && (*excluded)[v]) continue;
            double mass = 0;
            for (Element u : ball(g, v, radius, excluded)) mass += s.weight(u);
            if (mass > best) {
                best = mass;
                r.argmax = v;
            }
        }
        r.max_fraction = best < 0 ? 0 : best;
    }
    if (epsilon) r.residual = r.max_fraction < *epsilon;
    return r;
}

} // namespace detail

inline ResidualReport max_ball_fraction(const Structure& s, int radius,
                                        std::optional<double> epsilon = std::nullopt) {
    return detail::heaviest_ball(s, radius, nullptr, epsilon);
}

struct SkeletonResult {
    std::vector<Element> skeleton;  // removal order
    ResidualReport final_report;    // measured on the structure minus the skeleton
    bool reached_epsilon = false;
};

// Greedy: repeatedly delete the center of the heaviest remaining d-ball until
// what is left is (d, epsilon)-residual or the size cap is hit. Weights are
// never renormalized; removed mass simply stops counting toward balls that
// lost their vertices.
inline SkeletonResult skeleton_select(const Structure& s, int radius, double epsilon, int n_max) {
    if (!(epsilon > 0)) fail(ErrorKind::Precondition, "epsilon must be > 0");
    if (n_max < 0) fail(ErrorKind::Precondition, "skeleton size cap must be >= 0");
    SkeletonResult out;
    std::vector<char> excluded(s.size(), 0);
    while (true) {
        ResidualReport rep = detail::heaviest_ball(s, radius, &excluded, epsilon);
        if (rep.residual || rep.argmax == -1) {
            out.final_report = rep;
            out.reached_epsilon = rep.residual;
            return out;
        }
        if (static_cast<int>(out.skeleton.size()) == n_max) {
            out.final_report = rep;
            out.reached_epsilon = false;
            return out;
        }
        excluded[rep.argmax] = 1;
        out.skeleton.push_back(rep.argmax);
    }
}

struct MarkPlan {
    std::vector<Element> skeleton;
    std::map<int, int> removal_counts;              // radius -> prefix length F
    std::map<int, ResidualReport> after_removal;    // re-measured with the F-prefix deleted
    bool reached_epsilon = false;
    int domain = 0;
};

struct MarkPlanResult {
    std::vector<MarkPlan> plans;
    std::vector<Structure> marked;  // inputs with M<i> and Z<d> added
    bool counts_monotone = true;    // removal counts non-decreasing along the sequence
};

// Per structure: pick one skeleton at the largest requested radius, pebble its
// vertices as M1, M2, ... in removal order, and for each radius d publish the
// prefix Z<d> of length F = min(|skeleton|, floor(log2(n+1))). The cap keeps
// the count slowly growing but unbounded along a growing sequence.
inline MarkPlanResult mark_plan(const std::vector<Structure>& seq, const std::vector<int>& radii,
                                double epsilon, int n_max) {
    if (seq.empty()) fail(ErrorKind::Precondition, "empty structure sequence");
    if (radii.empty()) fail(ErrorKind::Precondition, "no radii given");
    for (size_t i = 1; i < seq.size(); ++i)
        if (seq[i].size() < seq[i - 1].size())
            fail(ErrorKind::Precondition, "structure sizes must be non-decreasing along the sequence");
    int d_star = *std::max_element(radii.begin(), radii.end());
    if (d_star < 0) fail(ErrorKind::Precondition, "radius must be >= 0");

    MarkPlanResult out;
    std::map<int, int> prev_counts;
    for (const Structure& s : seq) {
        for (const auto& decl : s.signature().decls())
            if (is_mark_symbol(decl.name))
                fail(ErrorKind::Precondition, "structure already carries mark symbol " + decl.name);
        SkeletonResult sk = skeleton_select(s, d_star, epsilon, n_max);
        MarkPlan plan;
        plan.domain = s.size();
        plan.skeleton = sk.skeleton;
        plan.reached_epsilon = sk.reached_epsilon;
        int cap = static_cast<int>(std::floor(std::log2(static_cast<double>(s.size()) + 1.0)));
        int f = std::min(static_cast<int>(sk.skeleton.size()), cap);

        Structure marked = s;
        for (size_t i = 0; i < sk.skeleton.size(); ++i)
            marked = marked.with_unary_added("M" + std::to_string(i + 1), {sk.skeleton[i]});
        std::vector<char> prefix_excluded(s.size(), 0);
        for (int i = 0; i < f; ++i) prefix_excluded[sk.skeleton[i]] = 1;
        for (int d : radii) {
            plan.removal_counts[d] = f;
            plan.after_removal[d] = detail::heaviest_ball(s, d, &prefix_excluded, epsilon);
            std::vector<Element> prefix(sk.skeleton.begin(), sk.skeleton.begin() + f);
            marked = marked.with_unary_added("Z" + std::to_string(d), prefix);
        }
        for (const auto& [d, count] : plan.removal_counts) {
            auto it = prev_counts.find(d);
            if (it != prev_counts.end() && count < it->second) out.counts_monotone = false;
        }
        prev_counts = plan.removal_counts;
        out.plans.push_back(std::move(plan));
        out.marked.push_back(std::move(marked));
    }
    return out;
}

} // namespace folab
