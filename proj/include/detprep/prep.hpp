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
#include <random>
#include <tuple>
#include <stdexcept>
#include <vector>

#include "detprep/circuit.hpp"
#include "detprep/css_code.hpp"
#include "detprep/stabilizer_sat.hpp"

namespace detprep {

/// True iff the circuit's output stabilizer group equals <hx, hz, lz> (|0>_L).
inline bool verify_prep(const Circuit &c, const CssCode &code) {
    if (c.width != code.n) throw std::invalid_argument("verify_prep: circuit width != n");
    auto [sx, sz] = stabilizer_flow(c);
    // Symplectic rows [x | z].
    BitMatrix produced(2 * code.n);
    for (size_t i = 0; i < sx.num_rows(); ++i) produced.append_row(sx.row(i).concat(sz.row(i)));
    BitMatrix expected(2 * code.n);
    BitVector zero(code.n);
    for (const auto &r : code.hx.rows()) expected.append_row(r.concat(zero));
    for (const auto &r : code.hz.rows()) expected.append_row(zero.concat(r));
    for (const auto &r : code.lz.rows()) expected.append_row(zero.concat(r));
    return same_row_space(produced, expected);
}

/// Dangerous errors of one type: propagated single faults whose reduced weight is
/// at least 2, grouped by canonical coset representative.
struct DangerSet {
    struct Entry {
        BitVector error;  // canonical representative over data qubits
        std::vector<Fault> witnesses;
    };
    PauliKind kind = PauliKind::X;
    ReductionGroup reduction;
    std::vector<Entry> errors;

    size_t size() const { return errors.size(); }
    bool empty() const { return errors.empty(); }
    std::vector<BitVector> vectors() const {
        std::vector<BitVector> out;
        for (const auto &e : errors) out.push_back(e.error);
        return out;
    }
    bool contains_equivalent(const BitVector &e) const {
        for (const auto &entry : errors) {
            if (reduction.equivalent(entry.error, e)) return true;
        }
        return false;
    }
    /// Adds `e` (any representative); returns false if an equivalent error is present.
    bool add(const BitVector &e, const Fault *witness = nullptr) {
        BitVector canon = reduction.canonical(e);
        for (auto &entry : errors) {
            if (entry.error == canon) {
                if (witness) entry.witnesses.push_back(*witness);
                return false;
            }
        }
        Entry entry{canon, {}};
        if (witness) entry.witnesses.push_back(*witness);
        errors.push_back(std::move(entry));
        return true;
    }
    void sort() {
        std::sort(errors.begin(), errors.end(), [](const Entry &a, const Entry &b) {
            if (a.error.weight() != b.error.weight()) return a.error.weight() < b.error.weight();
            return a.error.lex_less(b.error);
        });
    }
};

/// Dangerous `kind` errors produced by single faults of the circuit.
inline DangerSet dangerous_errors(const Circuit &c, const CssCode &code, PauliKind kind,
                                  ReductionMode mode = ReductionMode::State) {
    DangerSet out{kind, reduction_group(code, kind, mode), {}};
    for (const auto &f : fault_locations(c)) {
        const BitVector &fault_part = kind == PauliKind::X ? f.x : f.z;
        if (f.is_flip() || fault_part.is_zero()) continue;
        auto prop = propagate(c, f);
        BitVector residual = prop.data(kind, code.n);
        if (acts_trivially(code, kind, residual)) continue;
        if (out.reduction.reduced_weight(residual) >= 2) out.add(residual, &f);
    }
    out.sort();
    return out;
}

/// CNOT schedule of an encoder built from rref(hx): pivot qubits start in |+>,
/// the rest in |0>, and each reduced row fans out from its pivot. All CNOTs
/// commute, so any order prepares the same state but spreads faults differently.
struct EncoderSchedule {
    std::vector<size_t> pivots;
    std::vector<std::vector<size_t>> targets;  // fan-out order per pivot
    bool interleave = false;                   // round-robin over rows instead of row by row
};

inline EncoderSchedule default_schedule(const CssCode &code) {
    EncoderSchedule s;
    auto r = rref(code.hx);
    for (size_t i = 0; i < r.rank; ++i) {
        s.pivots.push_back(r.pivots[i]);
        std::vector<size_t> t;
        for (size_t q : r.reduced.row(i).support()) {
            if (q != r.pivots[i]) t.push_back(q);
        }
        s.targets.push_back(std::move(t));
    }
    return s;
}

inline Circuit encoder_circuit(const CssCode &code, const EncoderSchedule &s) {
    Circuit c(code.n, code.n);
    std::vector<bool> is_pivot(code.n, false);
    for (size_t p : s.pivots) is_pivot[p] = true;
    for (size_t q = 0; q < code.n; ++q) c.add(is_pivot[q] ? Gate::prep_x(q) : Gate::prep_z(q));
    if (!s.interleave) {
        for (size_t i = 0; i < s.pivots.size(); ++i) {
            for (size_t t : s.targets[i]) c.add(Gate::cnot(s.pivots[i], t));
        }
        return c;
    }
    size_t depth = 0;
    for (const auto &t : s.targets) depth = std::max(depth, t.size());
    for (size_t k = 0; k < depth; ++k) {
        for (size_t i = 0; i < s.pivots.size(); ++i) {
            if (k < s.targets[i].size()) c.add(Gate::cnot(s.pivots[i], s.targets[i][k]));
        }
    }
    return c;
}

struct PrepOptions {
    /// Search CNOT orders to minimize the verification cost of the danger sets.
    bool optimize = true;
    size_t max_evaluations = 400;
    /// Extra greedy encoders with seeded random tie-breaking.
    size_t restarts = 8;
    uint64_t seed = 1;
    ReductionMode mode = ReductionMode::State;
    SynthesisOptions synthesis;
};

/// Lexicographic cost: number of error types needing verification, total
/// measurements, total weight, total danger-set size. Encoders with a danger
/// set no measurement can cover cost SIZE_MAX.
inline std::tuple<size_t, size_t, size_t, size_t> prep_cost(const Circuit &c, const CssCode &code,
                                                            const PrepOptions &opts) {
    size_t kinds = 0, u = 0, v = 0, size = 0;
    for (PauliKind k : {PauliKind::X, PauliKind::Z}) {
        auto d = dangerous_errors(c, code, k, opts.mode);
        if (d.empty()) continue;
        size_t du = 0, dv = 0;
        try {
            std::tie(du, dv) = optimal_cover_cost(code, k, d.vectors(), opts.synthesis);
        } catch (const SynthesisInfeasible &) {
            // Undetectable danger: rank behind every coverable encoder.
            return {SIZE_MAX, 0, 0, 0};
        }
        ++kinds;
        u += du;
        v += dv;
        size += d.size();
    }
    return {kinds, u, v, size};
}

/// Encoder found by greedy column reduction of rref(hx): each step applies the
/// column operation col_t ^= col_c that minimizes the weight of the re-reduced
/// matrix, until every row has weight one. Replaying the operations backwards
/// as CNOT(c, t) from the remaining pivots prepares the code state. Ties go to
/// the lowest (c, t), or to a random one when `rng` is given.
inline Circuit greedy_encoder(const CssCode &code, std::mt19937_64 *rng = nullptr) {
    const size_t n = code.n;
    auto total_weight = [](const BitMatrix &m) {
        size_t w = 0;
        for (const auto &r : m.rows()) w += r.weight();
        return w;
    };
    BitMatrix m = rref(code.hx).reduced;
    std::vector<std::pair<size_t, size_t>> ops;
    while (total_weight(m) > m.num_rows()) {
        size_t best_w = SIZE_MAX;
        std::vector<std::pair<std::pair<size_t, size_t>, BitMatrix>> ties;
        for (size_t c = 0; c < n; ++c) {
            for (size_t t = 0; t < n; ++t) {
                if (c == t) continue;
                BitMatrix trial(n);
                bool touched = false;
                for (const auto &r : m.rows()) {
                    BitVector row = r;
                    if (row.get(c)) {
                        row.flip(t);
                        touched = true;
                    }
                    trial.append_row(row);
                }
                if (!touched) continue;
                BitMatrix reduced = rref(trial).reduced;
                size_t w = total_weight(reduced);
                if (w < best_w) {
                    best_w = w;
                    ties.clear();
                }
                if (w == best_w) ties.emplace_back(std::make_pair(c, t), std::move(reduced));
            }
        }
        size_t pick = rng ? (*rng)() % ties.size() : 0;
        ops.push_back(ties[pick].first);
        m = std::move(ties[pick].second);
    }
    std::vector<bool> is_pivot(n, false);
    for (size_t p : rref(m).pivots) is_pivot[p] = true;
    Circuit c(n, n);
    for (size_t q = 0; q < n; ++q) c.add(is_pivot[q] ? Gate::prep_x(q) : Gate::prep_z(q));
    for (size_t k = ops.size(); k-- > 0;) c.add(Gate::cnot(ops[k].first, ops[k].second));
    return c;
}

/// Hill climb over swaps of adjacent commuting CNOTs; keeps strict improvements.
inline Circuit improve_cnot_order(Circuit c, const CssCode &code, const PrepOptions &opts, size_t &evals) {
    auto best_cost = prep_cost(c, code, opts);
    ++evals;
    bool improved = true;
    while (improved && evals < opts.max_evaluations) {
        improved = false;
        for (size_t i = 0; i + 1 < c.gates.size() && evals < opts.max_evaluations; ++i) {
            const Gate &a = c.gates[i];
            const Gate &b = c.gates[i + 1];
            if (a.type != GateType::Cnot || b.type != GateType::Cnot) continue;
            if (a.q0 == b.q1 || a.q1 == b.q0) continue;
            Circuit trial = c;
            std::swap(trial.gates[i], trial.gates[i + 1]);
            ++evals;
            if (auto cost = prep_cost(trial, code, opts); cost < best_cost) {
                c = std::move(trial);
                best_cost = cost;
                improved = true;
            }
        }
    }
    return c;
}

/// Encoder for |0>_L. With `optimize`, two families are searched: the RREF
/// fan-out encoder (target swaps and the interleave toggle) and greedy
/// column-reduction encoders (adjacent CNOT swaps), one with fixed and
/// `restarts` with seeded random tie-breaking. The lowest prep_cost wins; ties
/// keep the earlier candidate.
inline Circuit synth_prep(const CssCode &code, const PrepOptions &opts = {}) {
    EncoderSchedule best = default_schedule(code);
    if (!opts.optimize) return encoder_circuit(code, best);
    size_t evals = 0;
    auto cost_of = [&](const EncoderSchedule &s) {
        ++evals;
        return prep_cost(encoder_circuit(code, s), code, opts);
    };
    auto best_cost = cost_of(best);
    bool improved = true;
    while (improved && evals < opts.max_evaluations) {
        improved = false;
        EncoderSchedule trial = best;
        trial.interleave = !trial.interleave;
        if (auto c = cost_of(trial); c < best_cost) {
            best = trial;
            best_cost = c;
            improved = true;
        }
        for (size_t i = 0; i < best.targets.size() && evals < opts.max_evaluations; ++i) {
            for (size_t a = 0; a < best.targets[i].size(); ++a) {
                for (size_t b = a + 1; b < best.targets[i].size() && evals < opts.max_evaluations; ++b) {
                    trial = best;
                    std::swap(trial.targets[i][a], trial.targets[i][b]);
                    if (auto c = cost_of(trial); c < best_cost) {
                        best = trial;
                        best_cost = c;
                        improved = true;
                    }
                }
            }
        }
    }
    Circuit winner = encoder_circuit(code, best);
    std::mt19937_64 rng(opts.seed);
    for (size_t r = 0; r <= opts.restarts; ++r) {
        size_t greedy_evals = 0;
        Circuit greedy = greedy_encoder(code, r == 0 ? nullptr : &rng);
        greedy = improve_cnot_order(std::move(greedy), code, opts, greedy_evals);
        if (auto c = prep_cost(greedy, code, opts); c < best_cost) {
            winner = std::move(greedy);
            best_cost = c;
        }
    }
    return winner;
}

}  // namespace detprep
