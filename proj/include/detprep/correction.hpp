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
#include <set>
#include <string>
#include <vector>

#include "detprep/css_code.hpp"
#include "detprep/f2.hpp"
#include "detprep/prep.hpp"
#include "detprep/sat.hpp"
#include "detprep/stabilizer_sat.hpp"
#include "detprep/verification.hpp"

namespace detprep {

/// One error a branch must handle. `prefix` holds classical bits already known
/// when the branch runs (for flag branches, the layer's syndrome); members with
/// different prefixes never need a common recovery.
struct ClassMember {
    BitVector error;
    BitVector prefix;
    std::vector<std::string> provenance;
};

/// Errors sharing one verification outcome.
struct ErrorClass {
    PauliKind error_kind = PauliKind::X;
    BitVector b;
    std::vector<ClassMember> members;

    size_t prefix_size() const { return members.empty() ? 0 : members.front().prefix.size(); }

    /// Adds a member unless the same (error, prefix) pair is present. `error`
    /// must already be canonical for the class's reduction group.
    bool add(const BitVector &error, const BitVector &prefix = BitVector(0), const std::string &provenance = {}) {
        for (auto &m : members) {
            if (m.error == error && m.prefix == prefix) {
                if (!provenance.empty() && m.provenance.size() < 4) m.provenance.push_back(provenance);
                return false;
            }
        }
        ClassMember m{error, prefix, {}};
        if (!provenance.empty()) m.provenance.push_back(provenance);
        members.push_back(std::move(m));
        return true;
    }
    void sort() {
        std::sort(members.begin(), members.end(), [](const ClassMember &a, const ClassMember &b) {
            if (a.prefix != b.prefix) return a.prefix < b.prefix;
            if (a.error.weight() != b.error.weight()) return a.error.weight() < b.error.weight();
            return a.error < b.error;
        });
    }
};

/// Integer value of a syndrome, bit i weighted 2^i.
inline uint64_t syndrome_index(const BitVector &b) {
    uint64_t out = 0;
    for (size_t i : b.support()) out |= uint64_t{1} << i;
    return out;
}

/// An observed error together with the verification outcome it produced.
struct ObservedError {
    BitVector error;
    BitVector syndrome;
    std::string provenance;
};

/// One class per nonzero achievable syndrome, ordered by syndrome index.
/// Dangerous errors use the layer's syndrome; `benign` errors carry their own
/// (measurement flips produce a syndrome without any data error).
inline std::vector<ErrorClass> partition_by_syndrome(const DangerSet &danger, const std::vector<ObservedError> &benign,
                                                     const VerificationLayer &layer) {
    std::map<uint64_t, ErrorClass> classes;
    auto put = [&](const BitVector &e, const BitVector &b, const std::string &prov) {
        if (b.is_zero()) return;
        auto &cls = classes[syndrome_index(b)];
        cls.error_kind = danger.kind;
        cls.b = b;
        cls.add(danger.reduction.canonical(e), BitVector(0), prov);
    };
    for (const auto &entry : danger.errors) put(entry.error, layer.syndrome(entry.error), "danger");
    for (const auto &o : benign) put(o.error, o.syndrome, o.provenance);
    std::vector<ErrorClass> out;
    for (auto &[key, cls] : classes) {
        cls.sort();
        out.push_back(std::move(cls));
    }
    return out;
}

struct CandidateCorrection {
    BitVector c;
    std::vector<size_t> corrects;  // member indices, ascending
};

inline bool weight_lex_less(const BitVector &a, const BitVector &b) {
    if (a.weight() != b.weight()) return a.weight() < b.weight();
    return a < b;
}

/// Candidates {e + rho : wt(rho) <= 1}, canonical modulo `g`, with exact
/// correction sets. Equal sets keep the lightest operator; with `prune`,
/// candidates whose set is strictly contained in another's are dropped.
inline std::vector<CandidateCorrection> candidate_corrections(const ErrorClass &cls, const ReductionGroup &g,
                                                              bool prune = true) {
    std::set<BitVector> raw;
    for (const auto &m : cls.members) {
        raw.insert(g.canonical(m.error));
        for (size_t q = 0; q < m.error.size(); ++q) {
            BitVector e = m.error;
            e.flip(q);
            raw.insert(g.canonical(e));
        }
    }
    std::vector<BitVector> ordered(raw.begin(), raw.end());
    std::sort(ordered.begin(), ordered.end(), weight_lex_less);
    std::vector<CandidateCorrection> out;
    std::set<std::vector<size_t>> sets_seen;
    for (const auto &c : ordered) {
        CandidateCorrection cand{c, {}};
        for (size_t i = 0; i < cls.members.size(); ++i) {
            if (g.reduced_weight(cls.members[i].error ^ c) <= 1) cand.corrects.push_back(i);
        }
        if (cand.corrects.empty() || !sets_seen.insert(cand.corrects).second) continue;
        out.push_back(std::move(cand));
    }
    if (!prune) return out;
    std::vector<CandidateCorrection> kept;
    for (size_t a = 0; a < out.size(); ++a) {
        bool dominated = false;
        for (size_t b = 0; b < out.size() && !dominated; ++b) {
            if (a == b || out[b].corrects.size() <= out[a].corrects.size()) continue;
            dominated = std::includes(out[b].corrects.begin(), out[b].corrects.end(), out[a].corrects.begin(),
                                      out[a].corrects.end());
        }
        if (!dominated) kept.push_back(out[a]);
    }
    return kept;
}

/// Conditional correction: extra measurements plus a recovery per key, where the
/// key is the member prefix followed by the extra measurement outcomes.
struct CorrectionBranch {
    PauliKind error_kind = PauliKind::X;  // type of the errors (and recovery operators)
    BitVector b;                          // class syndrome
    bool flag_branch = false;
    ClassicalCondition trigger;          // over protocol cbits, filled in by assembly
    std::vector<size_t> prefix_cbits;    // protocol cbits forming the key prefix
    std::vector<VerificationMeasurement> measurements;
    std::map<BitVector, BitVector> recovery;
    size_t u = 0;
    size_t v = 0;
    std::vector<UnsatWitness> witnesses;

    BitVector syndrome(const BitVector &error) const {
        BitVector s(measurements.size());
        for (size_t i = 0; i < measurements.size(); ++i) s.set(i, measurements[i].detects(error));
        return s;
    }
    BitVector key(const BitVector &prefix, const BitVector &error) const { return prefix.concat(syndrome(error)); }
    const BitVector *lookup(const BitVector &key) const {
        auto it = recovery.find(key);
        return it == recovery.end() ? nullptr : &it->second;
    }
};

/// Solver-independent replay: every member is looked up and left with reduced
/// weight at most 1.
inline bool verify_branch(const CorrectionBranch &branch, const ErrorClass &cls, const ReductionGroup &g) {
    for (const auto &m : cls.members) {
        const BitVector *c = branch.lookup(branch.key(m.prefix, m.error));
        if (!c) return false;
        if (g.reduced_weight(m.error ^ *c) > 1) return false;
    }
    return true;
}

namespace detail {

/// Recovery map for a fixed measurement set: each key group takes the lightest
/// candidate correcting all of its members. Empty optional if some group has none.
inline std::optional<std::map<BitVector, BitVector>> recovery_for(const CorrectionBranch &branch,
                                                                  const ErrorClass &cls,
                                                                  const std::vector<CandidateCorrection> &cands) {
    std::map<BitVector, std::vector<size_t>> groups;
    for (size_t i = 0; i < cls.members.size(); ++i) {
        groups[branch.key(cls.members[i].prefix, cls.members[i].error)].push_back(i);
    }
    std::map<BitVector, BitVector> out;
    for (const auto &[key, idx] : groups) {
        const CandidateCorrection *best = nullptr;
        for (const auto &cand : cands) {
            if (std::includes(cand.corrects.begin(), cand.corrects.end(), idx.begin(), idx.end())) {
                if (!best || weight_lex_less(cand.c, best->c)) best = &cand;
            }
        }
        if (!best) return std::nullopt;
        out.emplace(key, best->c);
    }
    return out;
}

struct CorrectionInstance {
    sat::CnfInstance inst;
    MeasurementVars mv;
};

inline CorrectionInstance correction_instance(const BitMatrix &gens, const ErrorClass &cls,
                                              const std::vector<CandidateCorrection> &cands, size_t u,
                                              std::optional<size_t> v) {
    CorrectionInstance ci;
    auto &inst = ci.inst;
    ci.mv = encode_measurements(inst, gens, u, v);
    size_t m = cls.members.size();
    // y[e][t], 0 when e is not in F(c_t).
    std::vector<std::vector<sat::Lit>> y(m, std::vector<sat::Lit>(cands.size(), 0));
    for (size_t t = 0; t < cands.size(); ++t) {
        for (size_t e : cands[t].corrects) y[e][t] = inst.new_var("select");
    }
    for (size_t e = 0; e < m; ++e) {
        std::vector<sat::Lit> any;
        for (size_t t = 0; t < cands.size(); ++t) {
            if (y[e][t]) any.push_back(y[e][t]);
        }
        inst.add_clause(any);
    }
    // Whether measurements separate two members depends only on the difference
    // of their signatures against the generators, so collisions are tracked
    // per distinct difference: eq[d] holds iff every measurement misses d.
    std::vector<BitVector> sig;
    for (const auto &mem : cls.members) sig.push_back(gens.mul_vec(mem.error));
    std::map<BitVector, sat::Lit> eq;
    auto eq_of = [&](const BitVector &d) {
        auto it = eq.find(d);
        if (it != eq.end()) return it->second;
        sat::Lit e = inst.new_var("eq");
        std::vector<sat::Lit> hit;
        for (size_t i = 0; i < u; ++i) {
            std::vector<sat::Lit> terms;
            for (size_t j : d.support()) terms.push_back(ci.mv.lambda[i][j]);
            sat::Lit x = inst.xor_of(terms);
            inst.add_clause({-e, -x});
            hit.push_back(x);
        }
        hit.push_back(e);
        inst.add_clause(hit);
        eq.emplace(d, e);
        return e;
    };
    for (size_t a = 0; a < m; ++a) {
        for (size_t b = a + 1; b < m; ++b) {
            if (cls.members[a].prefix != cls.members[b].prefix) continue;
            sat::Lit e = eq_of(sig[a] ^ sig[b]);
            for (size_t t = 0; t < cands.size(); ++t) {
                sat::Lit ya = y[a][t], yb = y[b][t];
                if (!ya && !yb) continue;
                if (ya && yb) {
                    inst.add_clause({-e, -ya, yb});
                    inst.add_clause({-e, ya, -yb});
                } else {
                    inst.add_clause({-e, -(ya ? ya : yb)});
                }
            }
        }
    }
    // Collisions are closed under sums (they form the common kernel).
    std::vector<std::pair<BitVector, sat::Lit>> diffs(eq.begin(), eq.end());
    for (size_t i = 0; i < diffs.size(); ++i) {
        for (size_t j = i + 1; j < diffs.size(); ++j) {
            auto it = eq.find(diffs[i].first ^ diffs[j].first);
            if (it == eq.end()) continue;
            inst.add_clause({-diffs[i].second, -diffs[j].second, it->second});
        }
    }
    return ci;
}

inline CorrectionBranch make_branch(const ErrorClass &cls, const std::vector<BitVector> &supports) {
    CorrectionBranch br;
    br.error_kind = cls.error_kind;
    br.b = cls.b;
    for (const auto &s : supports) {
        VerificationMeasurement meas;
        meas.kind = opposite(cls.error_kind);
        meas.support = s;
        br.measurements.push_back(meas);
    }
    br.u = supports.size();
    br.v = total_weight(supports);
    return br;
}

}  // namespace detail

/// Optimal correction branch for one class: fewest extra measurements, then
/// least total weight, then lexicographically smallest sorted supports.
inline CorrectionBranch synth_correction(const ErrorClass &cls, const CssCode &code, const ReductionGroup &g,
                                         const SynthesisOptions &opts = {}) {
    auto all = candidate_corrections(cls, g, false);
    auto cands = candidate_corrections(cls, g, true);
    auto finish = [&](CorrectionBranch br) {
        auto rec = detail::recovery_for(br, cls, all);
        if (!rec) throw std::logic_error("correction model without a consistent recovery");
        br.recovery = std::move(*rec);
        if (!verify_branch(br, cls, g)) throw std::logic_error("synthesized correction fails replay");
        return br;
    };

    // u = 0: one recovery per prefix group suffices.
    {
        auto br = detail::make_branch(cls, {});
        if (detail::recovery_for(br, cls, all)) return finish(std::move(br));
    }

    BitMatrix gens = measurement_generators(code, cls.error_kind, opts.use_logicals);
    std::vector<UnsatWitness> witnesses;
    auto record = [&](size_t u, std::optional<size_t> v, const detail::CorrectionInstance &ci, sat::Status st) {
        witnesses.push_back(UnsatWitness{u, v, st, static_cast<size_t>(ci.inst.num_vars()), ci.inst.num_clauses()});
    };
    std::optional<std::vector<BitVector>> found;
    size_t u = 0;
    for (; u <= gens.num_rows(); ++u) {
        auto ci = detail::correction_instance(gens, cls, cands, u, std::nullopt);
        auto r = sat::solve(ci.inst, {}, opts.deadline);
        if (r.status == sat::Status::Timeout) throw SynthesisTimeout("correction search timed out");
        if (r.sat()) {
            found = detail::read_supports(ci.mv, r);
            break;
        }
        witnesses.clear();
        record(u, std::nullopt, ci, r.status);
    }
    if (!found) throw SynthesisInfeasible("no deterministic correction with this verification layer");
    size_t v = detail::total_weight(*found);
    while (v > 0) {
        auto ci = detail::correction_instance(gens, cls, cands, u, v - 1);
        auto r = sat::solve(ci.inst, {}, opts.deadline);
        if (r.status == sat::Status::Timeout) throw SynthesisTimeout("correction weight search timed out");
        if (!r.sat()) {
            record(u, v - 1, ci, r.status);
            break;
        }
        found = detail::read_supports(ci.mv, r);
        v = detail::total_weight(*found);
    }
    auto ci = detail::correction_instance(gens, cls, cands, u, v);
    auto sets = detail::enumerate_support_sets(ci.inst, ci.mv, opts.enumeration_limit, opts.deadline);
    std::vector<BitVector> chosen = sets.sets.empty() ? detail::sorted_supports(*found) : sets.sets.front();
    auto br = detail::make_branch(cls, chosen);
    br.witnesses = std::move(witnesses);
    return finish(std::move(br));
}

}  // namespace detprep
