#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace folab {

using Element = int;
using Tuple = std::vector<Element>;

// Mark symbols are reserved: M<i> (i >= 1) puts a pebble on at most one
// element, Z<d> (d >= 0) is an arbitrary unary set. Everything else is a user
// symbol.
inline std::optional<int> mark_index(const std::string& name, char prefix) {
    if (name.size() < 2 || name[0] != prefix) return std::nullopt;
    if (name[1] == '0' && (prefix == 'M' || name.size() > 2)) return std::nullopt;
    long v = 0;
    for (size_t i = 1; i < name.size(); ++i) {
        if (name[i] < '0' || name[i] > '9') return std::nullopt;
        v = v * 10 + (name[i] - '0');
        if (v > 1'000'000) return std::nullopt;
    }
    return static_cast<int>(v);
}

inline std::optional<int> m_mark_index(const std::string& name) { return mark_index(name, 'M'); }
inline std::optional<int> z_mark_index(const std::string& name) { return mark_index(name, 'Z'); }
inline bool is_mark_symbol(const std::string& name) {
    return m_mark_index(name).has_value() || z_mark_index(name).has_value();
}

struct RelationDecl {
    std::string name;
    int arity = 0;
};

// Symbols kept sorted by name so every enumeration over a signature is
// deterministic regardless of construction order.
class Signature {
public:
    Signature() = default;

    void add(const std::string& name, int arity) {
        if (name.empty()) fail(ErrorKind::Validation, "empty relation name");
        if (arity < 1) fail(ErrorKind::Validation, "relation " + name + ": arity must be >= 1");
        if (is_mark_symbol(name) && arity != 1)
            fail(ErrorKind::Validation, "mark symbol " + name + " must be unary");
        auto it = std::lower_bound(decls_.begin(), decls_.end(), name,
                                   [](const RelationDecl& d, const std::string& n) { return d.name < n; });
        if (it != decls_.end() && it->name == name) {
            if (it->arity != arity)
                fail(ErrorKind::Validation, "relation " + name + " declared with conflicting arities");
            return;
        }
        decls_.insert(it, RelationDecl{name, arity});
    }

    bool has(const std::string& name) const { return find(name) != nullptr; }

    std::optional<int> arity(const std::string& name) const {
        const RelationDecl* d = find(name);
        if (!d) return std::nullopt;
        return d->arity;
    }

    const std::vector<RelationDecl>& decls() const { return decls_; }

private:
    const RelationDecl* find(const std::string& name) const {
        auto it = std::lower_bound(decls_.begin(), decls_.end(), name,
                                   [](const RelationDecl& d, const std::string& n) { return d.name < n; });
        if (it != decls_.end() && it->name == name) return &*it;
        return nullptr;
    }

    std::vector<RelationDecl> decls_;
};

// Raw, unchecked structure contents as they come off disk or out of a
// generator. validate() reports problems; Structure::from_data refuses them.
struct StructureData {
    int domain = 0;
    std::map<std::string, std::vector<Tuple>> relations;
    std::map<std::string, int> arities; // declarations for possibly-empty symbols
    std::vector<double> weights;        // empty means uniform 1/domain
};

constexpr double kWeightSumTolerance = 1e-12;

inline std::vector<std::string> validate_structure(const StructureData& d) {
    std::vector<std::string> out;
    if (d.domain < 1) out.push_back("domain must be >= 1");

    std::map<std::string, int> arity = d.arities;
    for (const auto& [name, tuples] : d.relations) {
        if (name.empty()) {
            out.push_back("empty relation name");
            continue;
        }
        int k = -1;
        auto declared = arity.find(name);
        if (declared != arity.end()) k = declared->second;
        for (const Tuple& t : tuples) {
            if (k == -1) k = static_cast<int>(t.size());
            if (static_cast<int>(t.size()) != k) {
                out.push_back("relation " + name + ": mixed tuple arities");
                break;
            }
            for (Element e : t)
                if (e < 0 || e >= d.domain) {
                    out.push_back("relation " + name + ": element " + std::to_string(e) + " out of range");
                    break;
                }
        }
        if (k == 0) out.push_back("relation " + name + ": arity must be >= 1");
        if (k > 0) arity[name] = k;
    }

    for (const auto& [name, k] : arity) {
        bool m = m_mark_index(name).has_value(), z = z_mark_index(name).has_value();
        if ((name[0] == 'M' || name[0] == 'Z') && !m && !z && name.size() >= 2 &&
            std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; }))
            out.push_back("symbol " + name + " is not a legal mark name (no leading zeros, M index >= 1)");
        if ((m || z) && k != 1) out.push_back("mark symbol " + name + " must be unary");
        if (m) {
            auto it = d.relations.find(name);
            size_t distinct = 0;
            if (it != d.relations.end()) {
                std::set<Tuple> u(it->second.begin(), it->second.end());
                distinct = u.size();
            }
            if (distinct > 1) out.push_back("mark " + name + " placed on more than one element");
        }
    }

    if (!d.weights.empty()) {
        if (static_cast<int>(d.weights.size()) != d.domain) {
            out.push_back("weights length does not match domain");
        } else {
            double sum = 0;
            for (double w : d.weights) {
                if (!(w >= 0) || !std::isfinite(w)) {
                    out.push_back("weights must be finite and non-negative");
                    break;
                }
                sum += w;
            }
            if (std::abs(sum - 1.0) > kWeightSumTolerance)
                out.push_back("weights must sum to 1 (got " + std::to_string(sum) + ")");
        }
    }
    return out;
}

struct GaifmanGraph {
    int n = 0;
    std::vector<std::vector<Element>> adj; // sorted, no self loops, no duplicates

    bool adjacent(Element u, Element v) const {
        const auto& a = adj[u];
        return std::binary_search(a.begin(), a.end(), v);
    }
    int degree(Element v) const { return static_cast<int>(adj[v].size()); }
};

// Two distinct elements are linked iff they co-occur in some tuple. Unary
// tuples link nothing.
inline GaifmanGraph build_gaifman(int n, const std::map<std::string, std::set<Tuple>>& rels) {
    std::vector<std::set<Element>> nb(n);
    for (const auto& [name, tuples] : rels) {
        (void)name;
        for (const Tuple& t : tuples)
            for (size_t i = 0; i < t.size(); ++i)
                for (size_t j = i + 1; j < t.size(); ++j)
                    if (t[i] != t[j]) {
                        nb[t[i]].insert(t[j]);
                        nb[t[j]].insert(t[i]);
                    }
    }
    GaifmanGraph g;
    g.n = n;
    g.adj.resize(n);
    for (int v = 0; v < n; ++v) g.adj[v].assign(nb[v].begin(), nb[v].end());
    return g;
}

// Validated immutable structure. Weight vector kept empty for the uniform
// measure so exact counting paths can divide once instead of summing floats.
class Structure {
public:
    static Structure from_data(const StructureData& d) {
        auto problems = validate_structure(d);
        if (!problems.empty()) {
            std::string msg = "invalid structure:";
            for (const auto& p : problems) msg += "\n  " + p;
            fail(ErrorKind::Validation, msg);
        }
        Structure s;
        s.n_ = d.domain;
        for (const auto& [name, tuples] : d.relations) {
            int k = tuples.empty() ? 0 : static_cast<int>(tuples.front().size());
            auto declared = d.arities.find(name);
            if (declared != d.arities.end()) k = declared->second;
            if (k == 0) continue; // nameless empty relation with no declared arity: drop
            s.sig_.add(name, k);
            s.rels_[name] = std::set<Tuple>(tuples.begin(), tuples.end());
        }
        for (const auto& [name, k] : d.arities)
            if (!s.rels_.count(name)) {
                s.sig_.add(name, k);
                s.rels_[name] = {};
            }
        s.weights_ = d.weights;
        if (!s.weights_.empty()) {
            bool uniform = true;
            for (double w : s.weights_)
                if (w != s.weights_[0]) { uniform = false; break; }
            // Keep explicit weights only when they carry information.
            if (uniform && s.weights_[0] == 1.0 / s.n_) s.weights_.clear();
        }
        s.gaifman_ = build_gaifman(s.n_, s.rels_);
        if (!s.weights_.empty()) {
            s.cumulative_.reserve(s.n_);
            double acc = 0;
            for (double w : s.weights_) {
                acc += w;
                s.cumulative_.push_back(acc);
            }
        }
        return s;
    }

    int size() const { return n_; }
    const Signature& signature() const { return sig_; }
    const GaifmanGraph& gaifman() const { return gaifman_; }

    bool uniform() const { return weights_.empty(); }
    double weight(Element v) const { return uniform() ? 1.0 / n_ : weights_[v]; }
    const std::vector<double>& raw_weights() const { return weights_; }

    // Cumulative weights for inverse-CDF sampling (uniform handled separately).
    const std::vector<double>& cumulative() const { return cumulative_; }

    bool has_symbol(const std::string& name) const { return sig_.has(name); }
    int arity(const std::string& name) const {
        auto a = sig_.arity(name);
        if (!a) fail(ErrorKind::Validation, "unknown relation symbol " + name);
        return *a;
    }

    const std::set<Tuple>& tuples(const std::string& name) const {
        static const std::set<Tuple> empty;
        auto it = rels_.find(name);
        return it == rels_.end() ? empty : it->second;
    }

    bool holds(const std::string& name, const Tuple& t) const {
        auto it = rels_.find(name);
        return it != rels_.end() && it->second.count(t) > 0;
    }

    // The element carrying mark M<i>, if any.
    std::optional<Element> mark_element(int i) const {
        auto it = rels_.find("M" + std::to_string(i));
        if (it == rels_.end() || it->second.empty()) return std::nullopt;
        return it->second.begin()->front();
    }

    StructureData to_data() const {
        StructureData d;
        d.domain = n_;
        for (const auto& decl : sig_.decls()) d.arities[decl.name] = decl.arity;
        for (const auto& [name, tuples] : rels_)
            d.relations[name] = std::vector<Tuple>(tuples.begin(), tuples.end());
        d.weights = weights_;
        return d;
    }

    Structure with_weights(std::vector<double> w) const {
        StructureData d = to_data();
        d.weights = std::move(w);
        return from_data(d);
    }

    Structure with_unary_added(const std::string& name, const std::vector<Element>& members) const {
        StructureData d = to_data();
        d.arities[name] = 1;
        auto& tuples = d.relations[name];
        for (Element e : members) tuples.push_back({e});
        return from_data(d);
    }

private:
    int n_ = 0;
    Signature sig_;
    std::map<std::string, std::set<Tuple>> rels_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    GaifmanGraph gaifman_;
};

// Closed d-ball around v in the Gaifman graph, sorted. excluded (optional)
// removes vertices from the graph entirely: they neither appear nor relay.
inline std::vector<Element> ball(const GaifmanGraph& g, Element v, int radius,
                                 const std::vector<char>* excluded = nullptr) {
    if (v < 0 || v >= g.n) fail(ErrorKind::Precondition, "ball center out of range");
    if (radius < 0) fail(ErrorKind::Precondition, "ball radius must be >= 0");
    if (excluded && (*excluded)[v]) return {};
    std::vector<int> dist(g.n, -1);
    std::vector<Element> queue{v}, out{v};
    dist[v] = 0;
    for (size_t head = 0; head < queue.size(); ++head) {
        Element u = queue[head];
        if (dist[u] == radius) break;
        for (Element w : g.adj[u]) {
            if (dist[w] != -1 || (excluded && (*excluded)[w])) continue;
            dist[w] = dist[u] + 1;
            queue.push_back(w);
            out.push_back(w);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Element> ball(const Structure& s, Element v, int radius) {
    return ball(s.gaifman(), v, radius);
}

inline Structure forget_marks(const Structure& s) {
    StructureData d = s.to_data();
    for (auto it = d.relations.begin(); it != d.relations.end();)
        it = is_mark_symbol(it->first) ? d.relations.erase(it) : std::next(it);
    for (auto it = d.arities.begin(); it != d.arities.end();)
        it = is_mark_symbol(it->first) ? d.arities.erase(it) : std::next(it);
    return Structure::from_data(d);
}

// Substructure induced on `elems` (sorted ascending), elements renumbered by
// rank. Weights are dropped: callers use these for plain satisfaction tests.
inline Structure induced_substructure(const Structure& s, const std::vector<Element>& elems) {
    std::map<Element, Element> rank;
    for (size_t i = 0; i < elems.size(); ++i) rank[elems[i]] = static_cast<Element>(i);
    StructureData d;
    d.domain = static_cast<int>(elems.size());
    for (const auto& decl : s.signature().decls()) {
        d.arities[decl.name] = decl.arity;
        auto& out = d.relations[decl.name];
        for (const Tuple& t : s.tuples(decl.name)) {
            Tuple m;
            m.reserve(t.size());
            bool inside = true;
            for (Element e : t) {
                auto it = rank.find(e);
                if (it == rank.end()) { inside = false; break; }
                m.push_back(it->second);
            }
            if (inside) out.push_back(std::move(m));
        }
    }
    return Structure::from_data(d);
}

// Disjoint union with components shifted in order. Signatures must agree on
// arities (enforced by Signature::add).
inline Structure disjoint_union(const std::vector<Structure>& parts) {
    if (parts.empty()) fail(ErrorKind::Precondition, "disjoint union of nothing");
    StructureData d;
    int offset = 0;
    for (const Structure& p : parts) {
        for (const auto& decl : p.signature().decls()) {
            auto it = d.arities.find(decl.name);
            if (it != d.arities.end() && it->second != decl.arity)
                fail(ErrorKind::Precondition, "disjoint union: conflicting arities for " + decl.name);
            d.arities[decl.name] = decl.arity;
            auto& out = d.relations[decl.name];
            for (const Tuple& t : p.tuples(decl.name)) {
                Tuple m = t;
                for (Element& e : m) e += offset;
                out.push_back(std::move(m));
            }
        }
        offset += p.size();
    }
    d.domain = offset;
    return Structure::from_data(d);
}

// --- JSON round trip ------------------------------------------------------

inline StructureData structure_data_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorKind::Parse, "structure JSON: expected an object");
    StructureData d;
    if (!j.contains("domain") || !j["domain"].is_number_integer())
        fail(ErrorKind::Parse, "structure JSON: missing integer field 'domain'");
    d.domain = j["domain"].get<int>();
    if (j.contains("relations")) {
        if (!j["relations"].is_object()) fail(ErrorKind::Parse, "structure JSON: 'relations' must be an object");
        for (auto it = j["relations"].begin(); it != j["relations"].end(); ++it) {
            if (!it.value().is_array())
                fail(ErrorKind::Parse, "structure JSON: relation " + it.key() + " must be a list of tuples");
            auto& out = d.relations[it.key()];
            for (const auto& jt : it.value()) {
                if (!jt.is_array()) fail(ErrorKind::Parse, "structure JSON: tuples must be arrays");
                Tuple t;
                for (const auto& je : jt) {
                    if (!je.is_number_integer()) fail(ErrorKind::Parse, "structure JSON: tuple entries must be integers");
                    t.push_back(je.get<int>());
                }
                out.push_back(std::move(t));
            }
        }
    }
    if (j.contains("arities")) {
        if (!j["arities"].is_object()) fail(ErrorKind::Parse, "structure JSON: 'arities' must be an object");
        for (auto it = j["arities"].begin(); it != j["arities"].end(); ++it)
            d.arities[it.key()] = it.value().get<int>();
    }
    if (j.contains("weights")) {
        if (!j["weights"].is_array()) fail(ErrorKind::Parse, "structure JSON: 'weights' must be an array");
        for (const auto& jw : j["weights"]) d.weights.push_back(jw.get<double>());
    }
    return d;
}

inline nlohmann::json structure_to_json(const Structure& s) {
    nlohmann::json j;
    j["domain"] = s.size();
    nlohmann::json rels = nlohmann::json::object();
    nlohmann::json ars = nlohmann::json::object();
    for (const auto& decl : s.signature().decls()) {
        ars[decl.name] = decl.arity;
        nlohmann::json list = nlohmann::json::array();
        for (const Tuple& t : s.tuples(decl.name)) list.push_back(t);
        rels[decl.name] = std::move(list);
    }
    j["relations"] = std::move(rels);
    j["arities"] = std::move(ars);
    if (!s.uniform()) j["weights"] = s.raw_weights();
    return j;
}

inline Structure load_structure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Usage, "cannot open structure file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, "structure file " + path + ": " + e.what());
    }
    return Structure::from_data(structure_data_from_json(j));
}

} // namespace folab
