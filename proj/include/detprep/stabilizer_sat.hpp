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
#include <utility>
#include <vector>

#include "detprep/css_code.hpp"
#include "detprep/f2.hpp"
#include "detprep/sat.hpp"

namespace detprep {

/// Thrown when no measurement set satisfies a synthesis problem.
struct SynthesisInfeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown when a solver budget ran out before any answer was found.
struct SynthesisTimeout : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Record of a solver call proving that a smaller budget has no solution.
/// `v` empty means the weight was unbounded.
struct UnsatWitness {
    size_t u = 0;
    std::optional<size_t> v;
    sat::Status status = sat::Status::Unsat;
    size_t num_vars = 0;
    size_t num_clauses = 0;

    bool proven() const { return status == sat::Status::Unsat; }
};

struct SynthesisOptions {
    /// Z-type measurements may use the state's Z logicals as well as hz.
    bool use_logicals = true;
    /// Wall-clock deadline for each synthesis call.
    sat::Budget deadline;
    /// Cap on the number of optimal layers enumerated for tie-breaking.
    size_t enumeration_limit = 64;
};

/// Generators of the operators that may be measured to detect `error_kind` errors
/// on |0>_L: hz (optionally with lz) for X errors, hx for Z errors.
inline BitMatrix measurement_generators(const CssCode &code, PauliKind error_kind, bool use_logicals) {
    if (error_kind == PauliKind::X) {
        return row_basis(use_logicals ? code.hz.stacked(code.lz) : code.hz);
    }
    return row_basis(code.hx);
}

namespace detail {

/// Variables for u measurements drawn from the row space of `gens`.
struct MeasurementVars {
    std::vector<std::vector<sat::Lit>> lambda;  // [i][j]
    std::vector<std::vector<sat::Lit>> sup;     // [i][q]
};

inline MeasurementVars encode_measurements(sat::CnfInstance &inst, const BitMatrix &gens, size_t u,
                                           std::optional<size_t> v) {
    MeasurementVars mv;
    size_t r = gens.num_rows(), n = gens.num_cols();
    std::vector<sat::Lit> all_sup;
    for (size_t i = 0; i < u; ++i) {
        auto lam = inst.new_vars(r, "lambda");
        mv.lambda.emplace_back(lam.begin(), lam.end());
        std::vector<sat::Lit> sup;
        for (size_t q = 0; q < n; ++q) {
            std::vector<sat::Lit> terms;
            for (size_t j = 0; j < r; ++j) {
                if (gens.row(j).get(q)) terms.push_back(lam[j]);
            }
            sat::Lit s = inst.xor_of(terms);
            sup.push_back(s);
            all_sup.push_back(s);
        }
        // Each measurement is a nontrivial operator.
        inst.add_clause(std::vector<sat::Lit>(mv.lambda.back().begin(), mv.lambda.back().end()));
        mv.sup.push_back(std::move(sup));
    }
    // Coefficient vectors strictly increase (coordinate 0 most significant).
    // Generators are independent, so this only removes reorderings.
    for (size_t i = 0; i + 1 < u; ++i) {
        const auto &a = mv.lambda[i];
        const auto &b = mv.lambda[i + 1];
        std::vector<sat::Lit> some_less;
        sat::Lit prefix_equal = 0;  // 0 means "true" for the empty prefix
        for (size_t j = 0; j < r; ++j) {
            sat::Lit less = inst.new_var("order");
            if (prefix_equal) inst.add_clause({-less, prefix_equal});
            inst.add_clause({-less, -a[j]});
            inst.add_clause({-less, b[j]});
            some_less.push_back(less);
            sat::Lit next = inst.new_var("order");
            if (prefix_equal) inst.add_clause({-next, prefix_equal});
            inst.add_clause({-next, -a[j], b[j]});
            inst.add_clause({-next, a[j], -b[j]});
            prefix_equal = next;
        }
        inst.add_clause(some_less);
    }
    if (v) inst.add_at_most(all_sup, *v);
    return mv;
}

/// Literal for the syndrome bit of measurement i on error e.
inline sat::Lit syndrome_lit(sat::CnfInstance &inst, const MeasurementVars &mv, const BitMatrix &gens, size_t i,
                             const BitVector &e) {
    std::vector<sat::Lit> terms;
    for (size_t j = 0; j < gens.num_rows(); ++j) {
        if (inner(gens.row(j), e)) terms.push_back(mv.lambda[i][j]);
    }
    return inst.xor_of(terms);
}

inline std::vector<BitVector> read_supports(const MeasurementVars &mv, const sat::SolveOutcome &r) {
    std::vector<BitVector> out;
    for (const auto &row : mv.sup) {
        BitVector s(row.size());
        for (size_t q = 0; q < row.size(); ++q) s.set(q, r.value(row[q]));
        out.push_back(s);
    }
    return out;
}

inline size_t total_weight(const std::vector<BitVector> &supports) {
    size_t w = 0;
    for (const auto &s : supports) w += s.weight();
    return w;
}

inline std::vector<BitVector> sorted_supports(std::vector<BitVector> s) {
    std::sort(s.begin(), s.end());
    return s;
}

struct CoverInstance {
    sat::CnfInstance inst;
    MeasurementVars mv;
};

inline CoverInstance cover_instance(const BitMatrix &gens, const std::vector<BitVector> &danger, size_t u,
                                    std::optional<size_t> v) {
    CoverInstance ci;
    ci.mv = encode_measurements(ci.inst, gens, u, v);
    for (const auto &e : danger) {
        std::vector<sat::Lit> clause;
        for (size_t i = 0; i < u; ++i) clause.push_back(syndrome_lit(ci.inst, ci.mv, gens, i, e));
        ci.inst.add_clause(clause);
    }
    return ci;
}


struct SupportSets {
    std::vector<std::vector<BitVector>> sets;  // each sorted; the list is sorted
    bool truncated = false;
};

/// Distinct measurement support sets over all models of `inst`, blocking every
/// ordering of a found set at once. Stops at `limit` distinct sets.
inline SupportSets enumerate_support_sets(const sat::CnfInstance &inst, const MeasurementVars &mv, size_t limit,
                                          sat::Budget deadline) {
    SupportSets out;
    std::set<std::vector<BitVector>> seen;
    sat::Solver solver(inst);
    size_t u = mv.sup.size();
    while (true) {
        auto r = solver.solve({}, deadline);
        if (r.status == sat::Status::Timeout) {
            out.truncated = true;
            break;
        }
        if (!r.sat()) break;
        auto supports = sorted_supports(read_supports(mv, r));
        if (seen.size() == limit) {
            out.truncated = true;
            break;
        }
        seen.insert(supports);
        if (u == 0) break;
        std::vector<size_t> perm(u);
        for (size_t i = 0; i < u; ++i) perm[i] = i;
        do {
            std::vector<sat::Lit> block;
            for (size_t i = 0; i < u; ++i) {
                for (size_t q = 0; q < mv.sup[i].size(); ++q) {
                    sat::Lit l = mv.sup[i][q];
                    block.push_back(supports[perm[i]].get(q) ? -l : l);
                }
            }
            solver.add_clause(block);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    out.sets.assign(seen.begin(), seen.end());
    return out;
}

}  // namespace detail

/// Optimal (u, v) for covering `danger` with measurements, without enumeration.
inline std::pair<size_t, size_t> optimal_cover_cost(const CssCode &code, PauliKind error_kind,
                                                    const std::vector<BitVector> &danger,
                                                    const SynthesisOptions &opts = {}) {
    if (danger.empty()) return {0, 0};
    BitMatrix gens = measurement_generators(code, error_kind, opts.use_logicals);
    for (size_t u = 1; u <= gens.num_rows(); ++u) {
        auto ci = detail::cover_instance(gens, danger, u, std::nullopt);
        auto r = sat::solve(ci.inst, {}, opts.deadline);
        if (r.status == sat::Status::Timeout) throw SynthesisTimeout("cover search timed out");
        if (!r.sat()) continue;
        size_t v = detail::total_weight(detail::read_supports(ci.mv, r));
        while (v > 0) {
            auto cv = detail::cover_instance(gens, danger, u, v - 1);
            auto rv = sat::solve(cv.inst, {}, opts.deadline);
            if (rv.status == sat::Status::Timeout) throw SynthesisTimeout("cover search timed out");
            if (!rv.sat()) break;
            v = detail::total_weight(detail::read_supports(cv.mv, rv));
        }
        return {u, v};
    }
    throw SynthesisInfeasible("danger set is not coverable by the measurable operators");
}

}  // namespace detprep
