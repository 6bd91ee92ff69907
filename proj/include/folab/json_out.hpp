#pragma once

#include <json.hpp>

#include "eval.hpp"
#include "lab.hpp"
#include "locality.hpp"
#include "residuality.hpp"
#include "witness.hpp"

namespace folab {

inline nlohmann::json pairing_to_json(const PairingResult& r) {
    nlohmann::json j;
    j["value"] = r.value;
    j["p"] = r.p;
    j["free"] = r.free;
    j["mode"] = r.mode;
    if (r.mode == "sampled") {
        j["samples"] = r.samples;
        j["seed"] = r.seed;
        j["ci99_halfwidth"] = r.ci99_halfwidth;
    }
    return j;
}

inline nlohmann::json type_partition_to_json(const TypePartition& tp) {
    nlohmann::json j;
    j["radius"] = tp.radius;
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& cls : tp.classes) {
        nlohmann::json c;
        c["code"] = cls.code;
        c["members"] = cls.members;
        c["frequency"] = cls.frequency;
        classes.push_back(std::move(c));
    }
    j["classes"] = std::move(classes);
    return j;
}

inline nlohmann::json residual_report_to_json(const ResidualReport& r) {
    nlohmann::json j;
    j["radius"] = r.radius;
    j["max_ball_fraction"] = r.max_fraction;
    j["argmax"] = r.argmax;
    if (r.epsilon) {
        j["epsilon"] = *r.epsilon;
        j["residual"] = r.residual;
    }
    return j;
}

inline nlohmann::json skeleton_to_json(const SkeletonResult& r) {
    nlohmann::json j;
    j["skeleton"] = r.skeleton;
    j["reached_epsilon"] = r.reached_epsilon;
    j["final_report"] = residual_report_to_json(r.final_report);
    return j;
}

inline nlohmann::json mark_plan_to_json(const MarkPlan& p) {
    nlohmann::json j;
    j["domain"] = p.domain;
    j["skeleton"] = p.skeleton;
    j["reached_epsilon"] = p.reached_epsilon;
    nlohmann::json counts = nlohmann::json::object();
    nlohmann::json after = nlohmann::json::object();
    for (const auto& [d, f] : p.removal_counts) counts[std::to_string(d)] = f;
    for (const auto& [d, rep] : p.after_removal)
        after[std::to_string(d)] = residual_report_to_json(rep);
    j["removal_counts"] = std::move(counts);
    j["after_removal"] = std::move(after);
    return j;
}

inline nlohmann::json witness_to_json(const SubdivisionWitness& w) {
    nlohmann::json j;
    j["clique"] = w.clique;
    j["p"] = w.p;
    j["mode"] = w.mode == SubdivMode::Exact ? "exact" : "at_most";
    j["principals"] = w.principals;
    nlohmann::json paths = nlohmann::json::object();
    for (const auto& [key, interior] : w.paths)
        paths[std::to_string(key.first) + "-" + std::to_string(key.second)] = interior;
    j["paths"] = std::move(paths);
    return j;
}

inline nlohmann::json transport_to_json(const TransportReport& r) {
    nlohmann::json j;
    j["b"] = r.b;
    j["a"] = r.a;
    j["phi_count"] = r.phi_count;
    j["psi_count"] = r.psi_count;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["holds"] = r.holds;
    j["exact_equality"] = r.exact_equality;
    j["sets_preserved"] = r.sets_preserved;
    j["phi_prime"] = print_formula(r.phi_prime);
    j["psi_prime"] = print_formula(r.psi_prime);
    return j;
}

inline nlohmann::json qm_probes_to_json(const QmProbeReport& r) {
    nlohmann::json j;
    j["exists_qm"] = r.exists_qm;
    j["overlap"] = r.overlap;
    j["agree"] = r.agree;
    j["refusal_scaled"] = r.refusal;
    return j;
}

inline nlohmann::json pipeline_to_json(const PipelineReport& r) {
    nlohmann::json j;
    j["counts_monotone"] = r.counts_monotone;
    j["all_ok"] = r.all_ok;
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : r.steps) {
        nlohmann::json js;
        js["n"] = s.n;
        js["skeleton"] = s.skeleton;
        js["m"] = s.m;
        js["encoded_residual"] = residual_report_to_json(s.encoded_residual);
        nlohmann::json rts = nlohmann::json::array();
        for (const auto& rt : s.roundtrips) {
            nlohmann::json jr;
            jr["id"] = rt.id;
            jr["formula"] = rt.text;
            if (rt.note.empty()) {
                jr["input_pairing"] = rt.lhs;
                jr["encoded_pairing"] = rt.rhs;
                jr["equal"] = rt.equal;
                jr["rational_equal"] = rt.rational_equal;
            } else {
                jr["note"] = rt.note;
            }
            rts.push_back(std::move(jr));
        }
        js["roundtrips"] = std::move(rts);
        if (s.local_note.empty()) {
            js["local_estimate"] = s.tilde;
            js["local_exact"] = s.exact;
            js["local_bound"] = s.bound;
            js["gap_ok"] = s.gap_ok;
        } else {
            js["local_note"] = s.local_note;
        }
        js["ok"] = s.ok;
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    return j;
}

} // namespace folab
