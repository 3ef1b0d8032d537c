// Copyright 2026 The detprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "detprep/css_code.hpp"
#include "detprep/f2.hpp"
#include "detprep/prep.hpp"
#include "detprep/sat.hpp"
#include "detprep/stabilizer_sat.hpp"

namespace detprep {

struct VerificationMeasurement {
    PauliKind kind = PauliKind::Z;  // measured operator type
    BitVector support;
    bool flagged = false;
    size_t ancilla = 0;
    size_t cbit = 0;
    size_t flag_ancilla = 0;
    size_t flag_cbit = 0;

    /// Syndrome bit this measurement reports for an error of the opposite type.
    bool detects(const BitVector &error) const { return inner(support, error); }
};

struct VerificationLayer {
    PauliKind error_kind = PauliKind::X;
    std::vector<VerificationMeasurement> measurements;
    size_t u = 0;
    size_t v = 0;
    std::vector<UnsatWitness> witnesses;

    std::vector<BitVector> supports() const {
        std::vector<BitVector> out;
        for (const auto &m : measurements) out.push_back(m.support);
        return out;
    }
    BitVector syndrome(const BitVector &error) const {
        BitVector s(measurements.size());
        for (size_t i = 0; i < measurements.size(); ++i) s.set(i, measurements[i].detects(error));
        return s;
    }
};

/// Direct inner-product check that every dangerous error trips some measurement.
inline bool check_coverage(const VerificationLayer &layer, const std::vector<BitVector> &danger) {
    for (const auto &e : danger) {
        bool hit = false;
        for (const auto &m : layer.measurements) hit = hit || m.detects(e);
        if (!hit) return false;
    }
    return true;
}
inline bool check_coverage(const VerificationLayer &layer, const DangerSet &danger) {
    return check_coverage(layer, danger.vectors());
}

namespace detail {

inline VerificationLayer make_layer(PauliKind error_kind, const std::vector<BitVector> &supports) {
    VerificationLayer layer;
    layer.error_kind = error_kind;
    for (const auto &s : supports) {
        VerificationMeasurement m;
        m.kind = opposite(error_kind);
        m.support = s;
        layer.measurements.push_back(m);
    }
    layer.u = supports.size();
    layer.v = total_weight(supports);
    return layer;
}

}  // namespace detail

/// All optimal verification layers at the minimal (u, v), deduplicated by the
/// set of measured supports and sorted. The first entry is the canonical choice.
struct VerificationSearch {
    std::vector<VerificationLayer> layers;
    size_t u = 0;
    size_t v = 0;
    std::vector<UnsatWitness> witnesses;
    bool truncated = false;
};

inline VerificationSearch search_verifications(const CssCode &code, PauliKind error_kind,
                                               const std::vector<BitVector> &danger, size_t limit,
                                               const SynthesisOptions &opts = {}) {
    VerificationSearch out;
    if (danger.empty()) {
        out.layers.push_back(detail::make_layer(error_kind, {}));
        return out;
    }
    BitMatrix gens = measurement_generators(code, error_kind, opts.use_logicals);
    auto record = [&](size_t u, std::optional<size_t> v, const detail::CoverInstance &ci, sat::Status st) {
        out.witnesses.push_back(UnsatWitness{u, v, st, static_cast<size_t>(ci.inst.num_vars()), ci.inst.num_clauses()});
    };

    // Minimize u with unbounded weight; u = 0 is unsat by an empty coverage clause.
    std::optional<std::vector<BitVector>> found;
    size_t u = 0;
    for (; u <= gens.num_rows(); ++u) {
        auto ci = detail::cover_instance(gens, danger, u, std::nullopt);
        auto r = sat::solve(ci.inst, {}, opts.deadline);
        if (r.status == sat::Status::Timeout) throw SynthesisTimeout("verification search timed out");
        if (r.sat()) {
            found = detail::read_supports(ci.mv, r);
            break;
        }
        out.witnesses.clear();
        record(u, std::nullopt, ci, r.status);
    }
    if (!found) throw SynthesisInfeasible("danger set is not coverable by the measurable operators");

    // Descend v from the first model until the bound becomes unsat.
    size_t v = detail::total_weight(*found);
    while (v > 0) {
        auto ci = detail::cover_instance(gens, danger, u, v - 1);
        auto r = sat::solve(ci.inst, {}, opts.deadline);
        if (r.status == sat::Status::Timeout) throw SynthesisTimeout("verification weight search timed out");
        if (!r.sat()) {
            record(u, v - 1, ci, r.status);
            break;
        }
        found = detail::read_supports(ci.mv, r);
        v = detail::total_weight(*found);
    }
    out.u = u;
    out.v = v;

    // Enumerate optimal layers, collapsing coefficient choices that name the same supports.
    auto ci = detail::cover_instance(gens, danger, u, v);
    auto sets = detail::enumerate_support_sets(ci.inst, ci.mv, limit, opts.deadline);
    out.truncated = sets.truncated;
    for (const auto &s : sets.sets) {
        auto layer = detail::make_layer(error_kind, s);
        layer.witnesses = out.witnesses;
        out.layers.push_back(std::move(layer));
    }
    if (out.layers.empty()) throw std::logic_error("optimal verification vanished during enumeration");
    return out;
}

/// Optimal verification layer: fewest measurements, then least total weight,
/// then lexicographically smallest sorted support list.
inline VerificationLayer synth_verification(const CssCode &code, const DangerSet &danger,
                                            const SynthesisOptions &opts = {}) {
    auto s = search_verifications(code, danger.kind, danger.vectors(), opts.enumeration_limit, opts);
    auto layer = s.layers.front();
    if (!check_coverage(layer, danger)) throw std::logic_error("verification fails coverage replay");
    return layer;
}

inline std::vector<VerificationLayer> enumerate_minimal_verifications(const CssCode &code, const DangerSet &danger,
                                                                      size_t limit, bool *truncated = nullptr,
                                                                      const SynthesisOptions &opts = {}) {
    auto s = search_verifications(code, danger.kind, danger.vectors(), limit, opts);
    if (truncated) *truncated = s.truncated;
    return s.layers;
}

}  // namespace detprep
