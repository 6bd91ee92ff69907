#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "error.hpp"
#include "rng.hpp"
#include "structure.hpp"

namespace folab {

struct GeneratorSpec {
    enum class Family { Path, Cycle, Grid, Tree, Star, ER };
    Family family = Family::Path;
    double er_p = 0.5;
    uint64_t er_seed = 1;
};

inline GeneratorSpec::Family parse_family(const std::string& name) {
    if (name == "path") return GeneratorSpec::Family::Path;
    if (name == "cycle") return GeneratorSpec::Family::Cycle;
    if (name == "grid") return GeneratorSpec::Family::Grid;
    if (name == "tree") return GeneratorSpec::Family::Tree;
    if (name == "star") return GeneratorSpec::Family::Star;
    if (name == "er") return GeneratorSpec::Family::ER;
    fail(ErrorKind::Usage, "unknown family " + name + " (path|cycle|grid|tree|star|er)");
}

// Deterministic graph families over the single binary symbol E, both edge
// orientations stored, uniform weights.
inline Structure generate(const GeneratorSpec& spec, int n) {
    if (n < 1) fail(ErrorKind::Precondition, "generator needs n >= 1");
    StructureData d;
    d.domain = n;
    d.arities["E"] = 2;
    auto& e = d.relations["E"];
    auto edge = [&](Element a, Element b) {
        e.push_back({a, b});
        e.push_back({b, a});
    };
    using F = GeneratorSpec::Family;
    switch (spec.family) {
    case F::Path:
        for (int i = 0; i + 1 < n; ++i) edge(i, i + 1);
        break;
    case F::Cycle:
        if (n < 3) fail(ErrorKind::Precondition, "cycle needs n >= 3");
        for (int i = 0; i < n; ++i) edge(i, (i + 1) % n);
        break;
    case F::Grid: {
        // floor(sqrt(n)) rows; vertices are the first n cells row-major.
        int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
        if (rows < 1) rows = 1;
        int cols = (n + rows - 1) / rows;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                int id = r * cols + c;
                if (id >= n) continue;
                if (c + 1 < cols && id + 1 < n) edge(id, id + 1);
                if (r + 1 < rows && id + cols < n) edge(id, id + cols);
            }
        break;
    }
    case F::Tree:
        for (int i = 0; i < n; ++i) {
            if (2 * i + 1 < n) edge(i, 2 * i + 1);
            if (2 * i + 2 < n) edge(i, 2 * i + 2);
        }
        break;
    case F::Star:
        for (int i = 1; i < n; ++i) edge(0, i);
        break;
    case F::ER: {
        if (!(spec.er_p >= 0 && spec.er_p <= 1))
            fail(ErrorKind::Precondition, "edge probability must be in [0,1]");
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                uint64_t pair_index = static_cast<uint64_t>(i) * n + j;
                SplitMix64 g(stream_seed(spec.er_seed, pair_index));
                if (g.next_double() < spec.er_p) edge(i, j);
            }
        break;
    }
    }
    return Structure::from_data(d);
}

} // namespace folab
