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

#include <chrono>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "detprep/correction.hpp"
#include "detprep/executor.hpp"
#include "detprep/flags.hpp"
#include "detprep/prep.hpp"
#include "detprep/verification.hpp"

namespace detprep {

struct ProtocolOptions {
    SynthesisOptions synthesis;
    PrepOptions prep;
    ReductionMode mode = ReductionMode::State;
    bool early_exit = true;
    /// Pick each gadget's CNOT order to minimize dangerous hooks.
    bool optimize_cnot_order = false;
    /// Run the exhaustive order-1 check before returning.
    bool check = true;
    /// Alternative optimal verifications tried when a correction is infeasible.
    size_t verification_candidates = 16;
    std::optional<Circuit> prep_circuit;
};

/// Assembly failed its own fault-tolerance postcondition.
struct ProtocolCheckFailed : std::runtime_error {
    std::vector<Violation> violations;
    explicit ProtocolCheckFailed(std::vector<Violation> v)
        : std::runtime_error("assembled protocol has " + std::to_string(v.size()) + " single-fault violations"),
          violations(std::move(v)) {}
};

namespace detail {

inline size_t alloc_qubit(DetFtProtocol &p) { return p.width++; }
inline size_t alloc_cbit(DetFtProtocol &p) { return p.num_cbits++; }

/// Id of the first fragment after the verification of layer `li`.
inline size_t fragments_through_verification(const DetFtProtocol &p, size_t li) {
    size_t id = 1;
    for (size_t i = 0; i < li; ++i) id += 1 + p.layers[i].branches.size() + p.layers[i].flag_branches.size();
    return id + 1;
}

/// Single faults in the prep and in every verification fragment of layers [0, upto).
inline std::vector<ProtocolFault> verification_faults(const DetFtProtocol &p, size_t upto) {
    std::vector<ProtocolFault> out;
    auto fr = fragments(p);
    std::vector<size_t> ids{0};
    size_t id = 1;
    for (size_t i = 0; i < upto && i < p.layers.size(); ++i) {
        ids.push_back(id);
        id += 1 + p.layers[i].branches.size() + p.layers[i].flag_branches.size();
    }
    for (size_t f : ids) {
        for (auto &fault : full_fault_set(*fr[f].circuit)) out.push_back(ProtocolFault{f, std::move(fault)});
    }
    return out;
}

}  // namespace detail

/// Dangerous `kind` errors left on the data by single faults in the prep and
/// the existing layers' verification circuits (after their corrections), for
/// runs that reach the end of the existing layers.
inline DangerSet layer_danger(const DetFtProtocol &p, PauliKind kind, ReductionMode mode) {
    DangerSet out{kind, reduction_group(p.code, kind, mode), {}};
    for (const auto &pf : detail::verification_faults(p, p.layers.size())) {
        Trace t = execute(p, inject(pf));
        if (t.exited_early) continue;
        bool flagged = false;
        for (const auto &l : p.layers) {
            for (size_t c : l.flag_cbits) flagged = flagged || t.frame.cbits.get(c);
        }
        if (flagged) continue;
        BitVector e = (kind == PauliKind::X ? t.frame.x : t.frame.z).slice(0, p.code.n);
        if (acts_trivially(p.code, kind, e)) continue;
        if (out.reduction.reduced_weight(e) >= 2) out.add(e, &pf.fault);
    }
    out.sort();
    return out;
}

/// Appends a verification layer without branches, allocating ancillas and cbits.
inline void add_verification_layer(DetFtProtocol &p, VerificationLayer v, const std::vector<bool> &flag,
                                   const ProtocolOptions &opts) {
    ProtocolLayer layer;
    for (size_t i = 0; i < v.measurements.size(); ++i) {
        auto &m = v.measurements[i];
        m.ancilla = detail::alloc_qubit(p);
        m.cbit = detail::alloc_cbit(p);
        layer.syndrome_cbits.push_back(m.cbit);
    }
    for (size_t i = 0; i < v.measurements.size(); ++i) {
        auto &m = v.measurements[i];
        m.flagged = i < flag.size() && flag[i];
        if (!m.flagged) continue;
        m.flag_ancilla = detail::alloc_qubit(p);
        m.flag_cbit = detail::alloc_cbit(p);
        layer.flag_cbits.push_back(m.flag_cbit);
    }
    for (const auto &m : v.measurements) {
        std::optional<std::vector<size_t>> order;
        if (opts.optimize_cnot_order) order = best_cnot_order(m, p.code, opts.mode);
        layer.gadgets.push_back(make_gadget(m, order));
    }
    layer.verification = std::move(v);
    p.layers.push_back(std::move(layer));
    rebuild_circuits(p);
}

/// Error classes of the last layer, built by running every single fault of the
/// prep and verification circuits through the protocol.
struct LayerClasses {
    std::map<uint64_t, ErrorClass> syndrome;  // by syndrome index, f = 0
    std::vector<ErrorClass> flags;            // one per flag bit
};

inline LayerClasses collect_classes(const DetFtProtocol &p, ReductionMode mode) {
    size_t li = p.layers.size() - 1;
    const auto &layer = p.layers[li];
    PauliKind kind = layer.error_kind();
    PauliKind hook_kind = opposite(kind);
    auto group = reduction_group(p.code, kind, mode);
    auto hook_group = reduction_group(p.code, hook_kind, mode);
    size_t n = p.code.n;
    LayerClasses out;
    for (size_t f = 0; f < layer.flag_cbits.size(); ++f) {
        ErrorClass cls;
        cls.error_kind = hook_kind;
        cls.b = BitVector(layer.flag_cbits.size());
        cls.b.set(f, true);
        out.flags.push_back(std::move(cls));
    }
    auto fr = fragments(p);
    for (const auto &pf : detail::verification_faults(p, p.layers.size())) {
        Trace t = execute(p, inject(pf));
        if (t.exited_early) continue;
        bool earlier_flag = false;
        for (size_t i = 0; i < li; ++i) {
            for (size_t c : p.layers[i].flag_cbits) earlier_flag = earlier_flag || t.frame.cbits.get(c);
        }
        if (earlier_flag) continue;
        BitVector b(layer.syndrome_cbits.size());
        for (size_t i = 0; i < b.size(); ++i) b.set(i, t.frame.cbits.get(layer.syndrome_cbits[i]));
        std::vector<size_t> raised;
        for (size_t f = 0; f < layer.flag_cbits.size(); ++f) {
            if (t.frame.cbits.get(layer.flag_cbits[f])) raised.push_back(f);
        }
        std::string prov = fr[pf.fragment].name + " " + pf.fault.describe();
        BitVector ex = (kind == PauliKind::X ? t.frame.x : t.frame.z).slice(0, n);
        BitVector eh = (hook_kind == PauliKind::X ? t.frame.x : t.frame.z).slice(0, n);
        // Errors that stabilize the state need no correction in either mode.
        if (acts_trivially(p.code, kind, ex)) ex = BitVector(n);
        if (acts_trivially(p.code, hook_kind, eh)) eh = BitVector(n);
        if (raised.size() > 1) throw std::logic_error("single fault raised two flags: " + prov);
        if (raised.size() == 1) {
            if (group.reduced_weight(ex) > 1) {
                throw std::logic_error("flagged fault leaves a dangerous " + std::string(1, kind_char(kind)) +
                                       " error: " + prov);
            }
            out.flags[raised[0]].add(hook_group.canonical(eh), b, prov);
            continue;
        }
        if (b.is_zero()) continue;
        auto &cls = out.syndrome[syndrome_index(b)];
        cls.error_kind = kind;
        cls.b = b;
        cls.add(group.canonical(ex), BitVector(0), prov);
    }
    for (auto &[k, cls] : out.syndrome) cls.sort();
    for (auto &cls : out.flags) cls.sort();
    return out;
}

/// Synthesizes the syndrome and flag branches of the last layer. The reduction
/// mode selects what verification must detect; recoveries always target the
/// state group, since errors differing by a state logical act identically.
inline void add_layer_branches(DetFtProtocol &p, const ProtocolOptions &opts) {
    auto classes = collect_classes(p, ReductionMode::State);
    size_t li = p.layers.size() - 1;
    PauliKind kind = p.layers[li].error_kind();
    auto group = reduction_group(p.code, kind, ReductionMode::State);
    auto hook_group = reduction_group(p.code, opposite(kind), ReductionMode::State);
    size_t a = p.layers[li].syndrome_cbits.size();
    std::vector<ProtocolBranch> branches, flag_branches;
    auto place = [&](CorrectionBranch br, ClassicalCondition trigger, std::vector<size_t> prefix) {
        for (auto &m : br.measurements) {
            m.ancilla = detail::alloc_qubit(p);
            m.cbit = detail::alloc_cbit(p);
        }
        br.trigger = std::move(trigger);
        br.prefix_cbits = std::move(prefix);
        return ProtocolBranch{std::move(br), Circuit()};
    };
    for (uint64_t bi = 1; bi < (uint64_t{1} << a); ++bi) {
        ErrorClass cls;
        if (auto it = classes.syndrome.find(bi); it != classes.syndrome.end()) {
            cls = it->second;
        } else {
            cls.error_kind = kind;
            cls.b = BitVector::from_word(a, bi);
        }
        auto br = synth_correction(cls, p.code, group, opts.synthesis);
        ClassicalCondition trig{BitVector(p.num_cbits), BitVector(p.num_cbits)};
        const auto &layer = p.layers[li];
        for (size_t i = 0; i < a; ++i) {
            trig.mask.set(layer.syndrome_cbits[i], true);
            trig.value.set(layer.syndrome_cbits[i], cls.b.get(i));
        }
        for (size_t c : layer.flag_cbits) trig.mask.set(c, true);
        branches.push_back(place(std::move(br), std::move(trig), {}));
    }
    for (size_t f = 0; f < classes.flags.size(); ++f) {
        auto br = synth_correction(classes.flags[f], p.code, hook_group, opts.synthesis);
        br.flag_branch = true;
        const auto &layer = p.layers[li];
        ClassicalCondition trig{BitVector(p.num_cbits), BitVector(p.num_cbits)};
        for (size_t g = 0; g < layer.flag_cbits.size(); ++g) {
            trig.mask.set(layer.flag_cbits[g], true);
            trig.value.set(layer.flag_cbits[g], g == f);
        }
        flag_branches.push_back(place(std::move(br), std::move(trig), layer.syndrome_cbits));
    }
    p.layers[li].branches = std::move(branches);
    p.layers[li].flag_branches = std::move(flag_branches);
    rebuild_circuits(p);
}

inline std::vector<bool> flag_policy(const DetFtProtocol &p, const VerificationLayer &v, const ProtocolOptions &opts) {
    std::vector<bool> flags;
    for (const auto &m : v.measurements) {
        VerificationMeasurement mm = m;
        mm.flagged = false;
        std::optional<std::vector<size_t>> order;
        if (opts.optimize_cnot_order) order = best_cnot_order(mm, p.code, opts.mode);
        flags.push_back(mm.support.weight() >= 3 && needs_flag(make_gadget(mm, order), p.code, nullptr, opts.mode));
    }
    return flags;
}

/// Protocol holding only the encoder.
inline DetFtProtocol start_protocol(const CssCode &code, const ProtocolOptions &opts) {
    if (code.d >= 5) throw std::invalid_argument("codes with distance >= 5 need more than one fault per layer");
    DetFtProtocol p;
    p.code = code;
    p.mode = opts.mode;
    p.early_exit = opts.early_exit;
    p.width = code.n;
    p.prep = opts.prep_circuit ? *opts.prep_circuit : synth_prep(code, opts.prep);
    if (p.prep.width != code.n) throw std::invalid_argument("prep circuit width != n");
    rebuild_circuits(p);
    return p;
}

/// Danger kinds to verify in order: X first when the encoder spreads X errors.
inline std::vector<PauliKind> layer_order(const DetFtProtocol &base, const ProtocolOptions &opts) {
    auto dx = layer_danger(base, PauliKind::X, opts.mode);
    auto dz = layer_danger(base, PauliKind::Z, opts.mode);
    if (!dx.empty()) return {PauliKind::X, PauliKind::Z};
    if (!dz.empty()) return {PauliKind::Z, PauliKind::X};
    return {};
}

/// Completes the first layer with a chosen verification. Returns the protocol
/// and, when a second layer is required, its danger set.
inline std::pair<DetFtProtocol, std::optional<DangerSet>> complete_first_layer(const DetFtProtocol &base,
                                                                               const VerificationLayer &v,
                                                                               PauliKind second_kind,
                                                                               const ProtocolOptions &opts) {
    DetFtProtocol unflagged = base;
    add_verification_layer(unflagged, v, {}, opts);
    auto d2 = layer_danger(unflagged, second_kind, opts.mode);
    if (!d2.empty()) {
        // A flagged single layer suffices when the only second-type danger is hooks.
        auto flags = flag_policy(base, v, opts);
        if (std::find(flags.begin(), flags.end(), true) != flags.end()) {
            DetFtProtocol flagged = base;
            add_verification_layer(flagged, v, flags, opts);
            if (layer_danger(flagged, second_kind, opts.mode).empty()) {
                add_layer_branches(flagged, opts);
                return {std::move(flagged), std::nullopt};
            }
        }
    }
    add_layer_branches(unflagged, opts);
    if (d2.empty()) return {std::move(unflagged), std::nullopt};
    auto d2_after = layer_danger(unflagged, second_kind, opts.mode);
    return {std::move(unflagged), std::move(d2_after)};
}

inline DetFtProtocol complete_second_layer(const DetFtProtocol &base, const VerificationLayer &v,
                                           const ProtocolOptions &opts) {
    DetFtProtocol p = base;
    add_verification_layer(p, v, flag_policy(base, v, opts), opts);
    add_layer_branches(p, opts);
    return p;
}

inline void enforce_check(const DetFtProtocol &p, const ProtocolOptions &opts) {
    if (!opts.check) return;
    auto violations = exhaustive_single_fault_check(p);
    if (!violations.empty()) throw ProtocolCheckFailed(std::move(violations));
}

inline std::vector<VerificationLayer> verification_candidates(const CssCode &code, const DangerSet &danger,
                                                              size_t limit, const ProtocolOptions &opts,
                                                              bool *truncated = nullptr) {
    auto s = search_verifications(code, danger.kind, danger.vectors(), limit, opts.synthesis);
    if (truncated) *truncated = s.truncated;
    return s.layers;
}

/// Default assembly: canonical optimal verification per layer, falling back to
/// other optimal verifications when a correction is infeasible.
inline DetFtProtocol assemble(const CssCode &code, const ProtocolOptions &opts = {}) {
    DetFtProtocol base = start_protocol(code, opts);
    auto order = layer_order(base, opts);
    if (order.empty()) {
        enforce_check(base, opts);
        return base;
    }
    auto d1 = layer_danger(base, order[0], opts.mode);
    std::optional<std::string> last_error;
    for (const auto &v1 : verification_candidates(code, d1, opts.verification_candidates, opts)) {
        try {
            auto [p1, d2] = complete_first_layer(base, v1, order[1], opts);
            if (!d2) {
                enforce_check(p1, opts);
                return p1;
            }
            for (const auto &v2 : verification_candidates(code, *d2, opts.verification_candidates, opts)) {
                try {
                    auto p2 = complete_second_layer(p1, v2, opts);
                    enforce_check(p2, opts);
                    return p2;
                } catch (const SynthesisInfeasible &e) {
                    last_error = e.what();
                }
            }
        } catch (const SynthesisInfeasible &e) {
            last_error = e.what();
        }
    }
    throw SynthesisInfeasible(last_error.value_or("no verification admits deterministic corrections"));
}

struct LayerMetrics {
    size_t a_m = 0, a_f = 0, w_m = 0, w_f = 0;
    bool flagged = false;
    std::vector<size_t> corr_a_m, corr_w_m;  // syndrome branches, by syndrome index
    std::vector<size_t> corr_a_f, corr_w_f;  // flag branches, by flag index

    bool operator==(const LayerMetrics &) const = default;
};

struct MetricsRow {
    std::vector<LayerMetrics> layers;
    size_t sum_anc = 0;
    size_t sum_cnot = 0;
    double avg_anc = 0;
    double avg_cnot = 0;

    bool operator==(const MetricsRow &) const = default;

    static std::string csv_header() {
        std::string h;
        for (int l = 1; l <= 2; ++l) {
            std::string p = "l" + std::to_string(l) + "_";
            h += p + "am," + p + "af," + p + "wm," + p + "wf," + p + "corr_am," + p + "corr_af," + p + "corr_wm," + p +
                 "corr_wf,";
        }
        return h + "sum_anc,sum_cnot,avg_anc,avg_cnot";
    }
    static std::string list(const std::vector<size_t> &v) {
        std::string s = "[";
        for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s + "]";
    }
    static std::string number(double x) {
        std::ostringstream out;
        out << x;
        return out.str();
    }
    /// Table-style row; blank cells where a layer or its flags are absent.
    std::string csv_row() const {
        std::string row;
        auto quoted = [](const std::string &s) { return "\"" + s + "\""; };
        for (size_t l = 0; l < 2; ++l) {
            if (l >= layers.size()) {
                row += ",,,,,,,,";
                continue;
            }
            const auto &m = layers[l];
            row += std::to_string(m.a_m) + "," + (m.flagged ? std::to_string(m.a_f) : "") + "," +
                   std::to_string(m.w_m) + "," + (m.flagged ? std::to_string(m.w_f) : "") + ",";
            row += quoted(list(m.corr_a_m)) + "," + (m.flagged ? quoted(list(m.corr_a_f)) : "") + "," +
                   quoted(list(m.corr_w_m)) + "," + (m.flagged ? quoted(list(m.corr_w_f)) : "") + ",";
        }
        return row + std::to_string(sum_anc) + "," + std::to_string(sum_cnot) + "," + number(avg_anc) + "," +
               number(avg_cnot);
    }
    std::string summary() const {
        std::ostringstream out;
        for (size_t l = 0; l < layers.size(); ++l) {
            const auto &m = layers[l];
            out << "layer " << l + 1 << ": verification a_m=" << m.a_m << " w_m=" << m.w_m;
            if (m.flagged) out << " a_f=" << m.a_f << " w_f=" << m.w_f;
            out << "; corrections a=" << list(m.corr_a_m) << " w=" << list(m.corr_w_m);
            if (m.flagged) out << "; flag corrections a=" << list(m.corr_a_f) << " w=" << list(m.corr_w_f);
            out << '\n';
        }
        out << "total ancillas " << sum_anc << ", CNOTs " << sum_cnot << "; mean correction ancillas " << avg_anc
            << ", CNOTs " << avg_cnot << '\n';
        return out.str();
    }
};

/// Ancilla and CNOT counts of a fragment. Ancillas coupled to a data qubit are
/// measurement ancillas, the rest are flags; CNOTs likewise by whether they
/// touch data.
struct FragmentCounts {
    size_t a_m = 0, a_f = 0, w_m = 0, w_f = 0;
};

inline FragmentCounts fragment_counts(const Circuit &c) {
    FragmentCounts out;
    std::set<size_t> prepared, touches_data;
    for (const auto &g : c.gates) {
        if (g.is_prep() && g.q0 >= c.num_data) prepared.insert(g.q0);
        if (g.type != GateType::Cnot) continue;
        bool d0 = g.q0 < c.num_data, d1 = g.q1 < c.num_data;
        if (d0 || d1) {
            ++out.w_m;
            if (!d0) touches_data.insert(g.q0);
            if (!d1) touches_data.insert(g.q1);
        } else {
            ++out.w_f;
        }
    }
    for (size_t q : prepared) (touches_data.count(q) ? out.a_m : out.a_f)++;
    return out;
}

/// Metrics recomputed from the emitted circuit fragments.
inline MetricsRow metrics(const DetFtProtocol &p) {
    MetricsRow row;
    size_t entries = 0, anc = 0, cnot = 0;
    for (const auto &layer : p.layers) {
        LayerMetrics m;
        auto v = fragment_counts(layer.circuit);
        m.a_m = v.a_m;
        m.a_f = v.a_f;
        m.w_m = v.w_m;
        m.w_f = v.w_f;
        m.flagged = layer.flagged();
        for (const auto &b : layer.branches) {
            auto c = fragment_counts(b.circuit);
            m.corr_a_m.push_back(c.a_m + c.a_f);
            m.corr_w_m.push_back(c.w_m + c.w_f);
        }
        for (const auto &b : layer.flag_branches) {
            auto c = fragment_counts(b.circuit);
            m.corr_a_f.push_back(c.a_m + c.a_f);
            m.corr_w_f.push_back(c.w_m + c.w_f);
        }
        for (size_t x : m.corr_a_m) anc += x;
        for (size_t x : m.corr_a_f) anc += x;
        for (size_t x : m.corr_w_m) cnot += x;
        for (size_t x : m.corr_w_f) cnot += x;
        entries += m.corr_a_m.size() + m.corr_a_f.size();
        row.sum_anc += m.a_m + m.a_f;
        row.sum_cnot += m.w_m + m.w_f;
        row.layers.push_back(std::move(m));
    }
    if (entries) {
        row.avg_anc = static_cast<double>(anc) / static_cast<double>(entries);
        row.avg_cnot = static_cast<double>(cnot) / static_cast<double>(entries);
    }
    return row;
}

/// Global-search objective: verification ancillas, verification CNOTs, mean
/// correction CNOTs, mean correction ancillas.
inline std::tuple<size_t, size_t, double, double> objective(const MetricsRow &m) {
    return {m.sum_anc, m.sum_cnot, m.avg_cnot, m.avg_anc};
}

/// Text listing of every fragment, used as a stable tie-break between protocols.
inline std::string protocol_text(const DetFtProtocol &p) {
    std::string out;
    for (const auto &fr : fragments(p)) out += "# " + fr.name + "\n" + circuit_text(*fr.circuit);
    return out;
}

struct GlobalOptions {
    ProtocolOptions protocol;
    std::optional<double> budget_seconds;
    size_t enumeration_limit = 256;
};

/// Assembles every combination of optimal verifications across layers and
/// keeps the best by `objective`. Stops at the budget with `truncated` set.
inline DetFtProtocol global_optimize(const CssCode &code, const GlobalOptions &gopts = {}) {
    const ProtocolOptions &opts = gopts.protocol;
    auto start = std::chrono::steady_clock::now();
    auto expired = [&]() {
        if (!gopts.budget_seconds) return false;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > *gopts.budget_seconds;
    };
    DetFtProtocol best = assemble(code, opts);
    auto best_obj = objective(metrics(best));
    std::string best_text = protocol_text(best);
    bool truncated = false;
    auto consider = [&](DetFtProtocol cand) {
        try {
            enforce_check(cand, opts);
        } catch (const ProtocolCheckFailed &) {
            return;
        }
        auto obj = objective(metrics(cand));
        std::string text = protocol_text(cand);
        if (obj < best_obj || (obj == best_obj && text < best_text)) {
            best = std::move(cand);
            best_obj = obj;
            best_text = std::move(text);
        }
    };

    DetFtProtocol base = start_protocol(code, opts);
    auto order = layer_order(base, opts);
    if (!order.empty() && !(gopts.budget_seconds && *gopts.budget_seconds <= 0)) {
        auto d1 = layer_danger(base, order[0], opts.mode);
        bool trunc1 = false;
        auto cands1 = verification_candidates(code, d1, gopts.enumeration_limit, opts, &trunc1);
        truncated = truncated || trunc1;
        for (const auto &v1 : cands1) {
            if (expired()) {
                truncated = true;
                break;
            }
            try {
                auto [p1, d2] = complete_first_layer(base, v1, order[1], opts);
                if (!d2) {
                    consider(std::move(p1));
                    continue;
                }
                bool trunc2 = false;
                auto cands2 = verification_candidates(code, *d2, gopts.enumeration_limit, opts, &trunc2);
                truncated = truncated || trunc2;
                for (const auto &v2 : cands2) {
                    if (expired()) {
                        truncated = true;
                        break;
                    }
                    try {
                        consider(complete_second_layer(p1, v2, opts));
                    } catch (const SynthesisInfeasible &) {
                    }
                }
            } catch (const SynthesisInfeasible &) {
            } catch (const SynthesisTimeout &) {
                truncated = true;
            }
        }
    } else if (!order.empty()) {
        truncated = true;
    }
    best.truncated = truncated;
    return best;
}

}  // namespace detprep
