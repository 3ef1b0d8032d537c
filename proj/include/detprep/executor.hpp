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

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "detprep/circuit.hpp"
#include "detprep/correction.hpp"
#include "detprep/css_code.hpp"
#include "detprep/flags.hpp"
#include "detprep/verification.hpp"

namespace detprep {

struct ProtocolBranch {
    CorrectionBranch branch;
    Circuit circuit;  // measurements followed by conditional recovery gates
};

struct ProtocolLayer {
    VerificationLayer verification;
    std::vector<MeasurementGadget> gadgets;
    Circuit circuit;
    std::vector<size_t> syndrome_cbits;
    std::vector<size_t> flag_cbits;
    std::vector<ProtocolBranch> branches;       // ordered by syndrome index
    std::vector<ProtocolBranch> flag_branches;  // ordered by flag index

    PauliKind error_kind() const { return verification.error_kind; }
    bool flagged() const { return !flag_cbits.empty(); }
};

/// Deterministic fault-tolerant |0>_L preparation: encoder, up to two
/// verification layers with their conditional corrections, early exit on flags.
/// All fragments share one qubit and cbit numbering; data qubits come first.
struct DetFtProtocol {
    CssCode code;
    Circuit prep;
    std::vector<ProtocolLayer> layers;
    bool early_exit = true;
    ReductionMode mode = ReductionMode::State;
    size_t width = 0;
    size_t num_cbits = 0;
    bool truncated = false;  // global search stopped early

    size_t num_fragments() const {
        size_t k = 1;
        for (const auto &l : layers) k += 1 + l.branches.size() + l.flag_branches.size();
        return k;
    }
};

/// Reference to one circuit fragment of a protocol.
struct FragmentRef {
    size_t id = 0;
    std::string name;
    const Circuit *circuit = nullptr;
};

inline std::vector<FragmentRef> fragments(const DetFtProtocol &p) {
    std::vector<FragmentRef> out;
    out.push_back({0, "prep", &p.prep});
    for (size_t i = 0; i < p.layers.size(); ++i) {
        const auto &l = p.layers[i];
        std::string base = "layer" + std::to_string(i + 1);
        out.push_back({out.size(), base + ".verify", &l.circuit});
        for (const auto &b : l.branches) {
            out.push_back({out.size(), base + ".branch[b=" + b.branch.b.str('0') + "]", &b.circuit});
        }
        for (size_t f = 0; f < l.flag_branches.size(); ++f) {
            out.push_back({out.size(), base + ".flag[" + std::to_string(f) + "]", &l.flag_branches[f].circuit});
        }
    }
    return out;
}

/// Rebuilds every circuit fragment from the protocol's semantic parts: ancilla
/// and cbit numbers must already be assigned.
inline void rebuild_circuits(DetFtProtocol &p) {
    Circuit prep(p.width, p.code.n, p.num_cbits);
    for (const auto &g : p.prep.gates) prep.add(g);
    p.prep = std::move(prep);
    for (auto &layer : p.layers) {
        layer.circuit = Circuit(p.width, p.code.n, p.num_cbits);
        for (const auto &g : layer.gadgets) append_gadget(layer.circuit, g);
        for (auto *list : {&layer.branches, &layer.flag_branches}) {
            for (auto &pb : *list) {
                auto &br = pb.branch;
                br.trigger.mask = br.trigger.mask.resized(p.num_cbits);
                br.trigger.value = br.trigger.value.resized(p.num_cbits);
                Circuit c(p.width, p.code.n, p.num_cbits);
                std::vector<size_t> key_cbits = br.prefix_cbits;
                for (const auto &m : br.measurements) {
                    append_gadget(c, make_gadget(m));
                    key_cbits.push_back(m.cbit);
                }
                for (const auto &[key, rec] : br.recovery) {
                    if (rec.is_zero()) continue;
                    ClassicalCondition cond = br.trigger;
                    for (size_t i = 0; i < key_cbits.size(); ++i) {
                        cond.mask.set(key_cbits[i], true);
                        cond.value.set(key_cbits[i], key.get(i));
                    }
                    for (size_t q : rec.support()) c.add(Gate::cond_pauli(br.error_kind, q, cond));
                }
                pb.circuit = std::move(c);
            }
        }
    }
}

/// Mutable Pauli frame over the protocol's qubits plus the measured cbits.
struct PauliFrame {
    BitVector x;
    BitVector z;
    BitVector cbits;
};

/// Record of one run: which fragments executed and the final frame.
struct Trace {
    PauliFrame frame;
    std::vector<size_t> executed;  // fragment ids in order
    bool exited_early = false;
};

/// Called after each executed gate; may modify the frame (fault injection).
using GateHook = std::function<void(size_t fragment, size_t gate_index, const Gate &gate, PauliFrame &frame)>;

inline void run_fragment(size_t id, const Circuit &c, PauliFrame &frame, const GateHook &hook) {
    for (size_t i = 0; i < c.gates.size(); ++i) {
        const Gate &g = c.gates[i];
        if (g.type == GateType::CondPauli) {
            if (!g.condition.holds(frame.cbits)) continue;
            if (g.pauli == PauliKind::X) {
                frame.x.flip(g.q0);
            } else {
                frame.z.flip(g.q0);
            }
        } else {
            apply_gate_to_frame(g, frame.x, frame.z, frame.cbits);
        }
        if (hook) hook(id, i, g, frame);
    }
}

/// Runs the protocol's classical control flow on a Pauli frame. Every measured
/// operator stabilizes the ideal state, so each outcome equals its frame bit.
/// `last_layer` limits execution to layers [0, last_layer).
inline Trace execute(const DetFtProtocol &p, const GateHook &hook = {}, size_t last_layer = SIZE_MAX) {
    Trace t;
    t.frame = PauliFrame{BitVector(p.width), BitVector(p.width), BitVector(p.num_cbits)};
    size_t id = 0;
    run_fragment(id, p.prep, t.frame, hook);
    t.executed.push_back(id);
    ++id;
    for (size_t li = 0; li < p.layers.size(); ++li) {
        const auto &layer = p.layers[li];
        if (li >= last_layer) break;
        run_fragment(id, layer.circuit, t.frame, hook);
        t.executed.push_back(id);
        ++id;
        bool flag_raised = false;
        for (size_t c : layer.flag_cbits) flag_raised = flag_raised || t.frame.cbits.get(c);
        size_t first_flag_id = id + layer.branches.size();
        if (flag_raised) {
            for (size_t f = 0; f < layer.flag_branches.size(); ++f) {
                const auto &pb = layer.flag_branches[f];
                if (!pb.branch.trigger.holds(t.frame.cbits)) continue;
                run_fragment(first_flag_id + f, pb.circuit, t.frame, hook);
                t.executed.push_back(first_flag_id + f);
            }
        } else {
            for (size_t b = 0; b < layer.branches.size(); ++b) {
                const auto &pb = layer.branches[b];
                if (!pb.branch.trigger.holds(t.frame.cbits)) continue;
                run_fragment(id + b, pb.circuit, t.frame, hook);
                t.executed.push_back(id + b);
            }
        }
        id = first_flag_id + layer.flag_branches.size();
        if (flag_raised && p.early_exit) {
            t.exited_early = li + 1 < p.layers.size();
            break;
        }
    }
    return t;
}

/// Single fault placed in a specific fragment.
struct ProtocolFault {
    size_t fragment = 0;
    Fault fault;
};

inline GateHook inject(const ProtocolFault &pf) {
    return [pf](size_t fragment, size_t gate_index, const Gate &, PauliFrame &frame) {
        if (fragment != pf.fragment || gate_index != pf.fault.location) return;
        if (pf.fault.flip) {
            frame.cbits.flip(*pf.fault.flip);
        } else {
            frame.x ^= pf.fault.x;
            frame.z ^= pf.fault.z;
        }
    };
}

/// Every single fault of every fragment: all nontrivial Paulis on each gate's
/// support (including conditional recovery gates) and each measurement flip.
inline std::vector<ProtocolFault> protocol_faults(const DetFtProtocol &p, size_t max_fragment = SIZE_MAX) {
    std::vector<ProtocolFault> out;
    for (const auto &fr : fragments(p)) {
        if (fr.id >= max_fragment) break;
        for (auto &f : full_fault_set(*fr.circuit, true)) out.push_back(ProtocolFault{fr.id, std::move(f)});
    }
    return out;
}

struct Violation {
    std::string fault;   // provenance
    std::string trace;   // executed fragments
    size_t residual_x_weight = 0;
    size_t residual_z_weight = 0;
    bool logical_error = false;

    std::string describe() const {
        std::ostringstream out;
        out << fault << " | path " << trace << " | reduced weight X=" << residual_x_weight << " Z=" << residual_z_weight
            << (logical_error ? " | logical error" : "");
        return out.str();
    }
};

/// Outcome of perfect lookup EC on the data frame: true iff a logical X
/// error remains (detected by some lz row).
inline bool logical_error_after_ec(const CssCode &code, const LookupDecoder &x_decoder, const BitVector &data_x) {
    BitVector x = data_x;
    auto corr = x_decoder.decode(x_decoder.syndrome(x));
    if (!corr) return true;
    x ^= *corr;
    for (const auto &l : code.lz.rows()) {
        if (inner(l, x)) return true;
    }
    return false;
}

inline std::string trace_names(const DetFtProtocol &p, const Trace &t) {
    auto fr = fragments(p);
    std::string out;
    for (size_t id : t.executed) {
        if (!out.empty()) out += " > ";
        out += fr[id].name;
    }
    return out;
}

/// Order-1 fault-tolerance check: every single fault must leave reduced
/// weight <= 1 per type and no logical error after perfect EC. Also asserts
/// that the fault-free run measures all zeros.
inline std::vector<Violation> exhaustive_single_fault_check(const DetFtProtocol &p) {
    std::vector<Violation> out;
    auto gx = reduction_group(p.code, PauliKind::X, ReductionMode::State);
    auto gz = reduction_group(p.code, PauliKind::Z, ReductionMode::State);
    auto decoder = build_lookup_decoder(p.code, PauliKind::X);
    size_t n = p.code.n;

    Trace clean = execute(p);
    if (!clean.frame.cbits.is_zero() || !clean.frame.x.is_zero() || !clean.frame.z.is_zero()) {
        out.push_back(Violation{"no fault", trace_names(p, clean), 0, 0, false});
    }
    auto fr = fragments(p);
    for (const auto &pf : protocol_faults(p)) {
        Trace t = execute(p, inject(pf));
        bool fired = false;
        for (size_t id : t.executed) fired = fired || id == pf.fragment;
        if (!fired) continue;
        BitVector dx = t.frame.x.slice(0, n), dz = t.frame.z.slice(0, n);
        size_t wx = gx.reduced_weight(dx), wz = gz.reduced_weight(dz);
        bool logical = logical_error_after_ec(p.code, decoder, dx);
        if (wx > 1 || wz > 1 || logical) {
            out.push_back(Violation{fr[pf.fragment].name + " " + pf.fault.describe(), trace_names(p, t), wx, wz, logical});
        }
    }
    return out;
}

}  // namespace detprep
