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
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "detprep/circuit.hpp"
#include "detprep/correction.hpp"
#include "detprep/css_code.hpp"
#include "detprep/prep.hpp"
#include "detprep/verification.hpp"

namespace detprep {

/// A stabilizer measurement as executed: data CNOT order plus optional flag.
/// Flag CNOTs sit after the first and before the last data CNOT.
struct MeasurementGadget {
    VerificationMeasurement measurement;
    std::vector<size_t> cnot_order;

    size_t weight() const { return cnot_order.size(); }
};

inline MeasurementGadget make_gadget(const VerificationMeasurement &m,
                                     std::optional<std::vector<size_t>> order = std::nullopt) {
    MeasurementGadget g{m, order ? *order : m.support.support()};
    return g;
}

inline void check_gadget(const MeasurementGadget &g) {
    auto sorted = g.cnot_order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != g.measurement.support.support()) throw std::invalid_argument("gadget: CNOT order is not the support");
    if (g.weight() < 2) throw std::invalid_argument("gadget: weight-1 measurement is not a stabilizer");
    if (g.measurement.flagged && g.weight() < 3) throw std::invalid_argument("gadget: flag needs weight >= 3");
}

/// Appends the gadget using the ancilla/cbit indices stored in its measurement.
inline void append_gadget(Circuit &c, const MeasurementGadget &g) {
    check_gadget(g);
    const auto &m = g.measurement;
    bool z_type = m.kind == PauliKind::Z;
    auto data_cnot = [&](size_t q) {
        c.add(z_type ? Gate::cnot(q, m.ancilla) : Gate::cnot(m.ancilla, q));
    };
    auto flag_cnot = [&]() {
        c.add(z_type ? Gate::cnot(m.flag_ancilla, m.ancilla) : Gate::cnot(m.ancilla, m.flag_ancilla));
    };
    c.add(z_type ? Gate::prep_z(m.ancilla) : Gate::prep_x(m.ancilla));
    if (m.flagged) c.add(z_type ? Gate::prep_x(m.flag_ancilla) : Gate::prep_z(m.flag_ancilla));
    size_t w = g.weight();
    for (size_t j = 0; j < w; ++j) {
        if (m.flagged && j == w - 1) flag_cnot();
        data_cnot(g.cnot_order[j]);
        if (m.flagged && j == 0) flag_cnot();
    }
    c.add(z_type ? Gate::meas_z(m.ancilla, m.cbit) : Gate::meas_x(m.ancilla, m.cbit));
    if (m.flagged) c.add(z_type ? Gate::meas_x(m.flag_ancilla, m.flag_cbit) : Gate::meas_z(m.flag_ancilla, m.flag_cbit));
}

/// Stand-alone fragment: data qubits, ancilla n, flag n + 1; cbit 0 for the
/// measurement and cbit 1 for the flag.
inline Circuit measurement_circuit(MeasurementGadget g) {
    size_t n = g.measurement.support.size();
    auto &m = g.measurement;
    m.ancilla = n;
    m.cbit = 0;
    m.flag_ancilla = n + 1;
    m.flag_cbit = 1;
    Circuit c(n + (m.flagged ? 2 : 1), n, m.flagged ? 2 : 1);
    append_gadget(c, g);
    return c;
}

struct HookError {
    size_t cut = 0;  // ancilla fault directly after data CNOT `cut` (1-based)
    BitVector error;  // canonical, of the measured operator's type
    bool flagged_visible = false;
    PauliKind kind = PauliKind::Z;
};

/// Hook errors for cuts 1..w-1. The flag sees faults after data CNOTs 2..w-1.
inline std::vector<HookError> hook_errors(const MeasurementGadget &g, const CssCode &code,
                                          ReductionMode mode = ReductionMode::State) {
    check_gadget(g);
    auto group = reduction_group(code, g.measurement.kind, mode);
    std::vector<HookError> out;
    size_t w = g.weight();
    for (size_t j = 1; j < w; ++j) {
        BitVector e(code.n);
        for (size_t k = j; k < w; ++k) e.set(g.cnot_order[k], true);
        bool visible = g.measurement.flagged && j >= 2 && j <= w - 1;
        out.push_back(HookError{j, group.canonical(e), visible, g.measurement.kind});
    }
    return out;
}

inline bool is_dangerous(const HookError &h) { return h.error.weight() >= 2; }

/// True unless every dangerous hook is equivalent to an error a later layer handles.
inline bool needs_flag(const MeasurementGadget &g, const CssCode &code, const DangerSet *downstream = nullptr,
                       ReductionMode mode = ReductionMode::State) {
    for (const auto &h : hook_errors(g, code, mode)) {
        if (!is_dangerous(h)) continue;
        if (downstream && downstream->kind == h.kind && downstream->contains_equivalent(h.error)) continue;
        return true;
    }
    return false;
}

/// CNOT order with the fewest dangerous hooks (exhaustive for weight <= 8,
/// ascending otherwise); ties keep the lexicographically first order.
inline std::vector<size_t> best_cnot_order(const VerificationMeasurement &m, const CssCode &code,
                                           ReductionMode mode = ReductionMode::State) {
    auto order = m.support.support();
    if (order.size() > 8 || order.size() < 3) return order;
    auto best = order;
    size_t best_count = SIZE_MAX;
    do {
        MeasurementGadget g{m, order};
        g.measurement.flagged = false;
        size_t count = 0;
        for (const auto &h : hook_errors(g, code, mode)) count += is_dangerous(h);
        if (count < best_count) {
            best_count = count;
            best = order;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return best;
}

/// Flag-triggered corrections for stand-alone gadgets, one per flagged gadget.
/// Each class collects the hook-type residual of every single fault in the
/// gadget that raises its flag, keyed by the gadget's own outcome bit.
inline std::vector<CorrectionBranch> synth_hook_corrections(const std::vector<MeasurementGadget> &gadgets,
                                                            const CssCode &code,
                                                            ReductionMode mode = ReductionMode::State,
                                                            const SynthesisOptions &opts = {}) {
    std::vector<CorrectionBranch> out;
    for (const auto &g : gadgets) {
        if (!g.measurement.flagged) continue;
        Circuit c = measurement_circuit(g);
        PauliKind hook_kind = g.measurement.kind;
        auto group = reduction_group(code, hook_kind, mode);
        ErrorClass cls;
        cls.error_kind = hook_kind;
        cls.b = BitVector::from_string("1");
        for (const auto &f : full_fault_set(c)) {
            auto prop = propagate(c, f);
            if (!prop.flips.get(1)) continue;
            BitVector prefix(1);
            prefix.set(0, prop.flips.get(0));
            cls.add(group.canonical(prop.data(hook_kind, code.n)), prefix, f.describe());
        }
        cls.sort();
        auto br = synth_correction(cls, code, group, opts);
        br.flag_branch = true;
        out.push_back(std::move(br));
    }
    return out;
}

}  // namespace detprep
