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
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "detprep/f2.hpp"

namespace detprep {

/// Type of a CSS Pauli operator. X-type errors are seen by Z-type checks and vice versa.
enum class PauliKind : uint8_t { X, Z };

constexpr PauliKind opposite(PauliKind k) { return k == PauliKind::X ? PauliKind::Z : PauliKind::X; }
constexpr char kind_char(PauliKind k) { return k == PauliKind::X ? 'X' : 'Z'; }

/// Which group errors are reduced against.
///
/// `State` uses the stabilizer group of the prepared |0>_L state, i.e. the Z-type
/// logicals count as stabilizers for Z errors. `Code` uses the code stabilizers only.
enum class ReductionMode : uint8_t { State, Code };

inline const char *mode_name(ReductionMode m) { return m == ReductionMode::State ? "state" : "code"; }
inline ReductionMode parse_reduction_mode(const std::string &s) {
    if (s == "state") return ReductionMode::State;
    if (s == "code") return ReductionMode::Code;
    throw std::invalid_argument("unknown reduction mode '" + s + "' (expected state|code)");
}

struct CssCode {
    std::string name;
    size_t n = 0;
    size_t k = 0;
    size_t d = 0;
    BitMatrix hx;
    BitMatrix hz;
    BitMatrix lx;
    BitMatrix lz;

    /// Generators whose measurement detects errors of `error_kind`.
    const BitMatrix &detecting_checks(PauliKind error_kind) const { return error_kind == PauliKind::X ? hz : hx; }
    /// Stabilizer generators of the given operator type.
    const BitMatrix &stabilizers(PauliKind kind) const { return kind == PauliKind::X ? hx : hz; }
    const BitMatrix &logicals(PauliKind kind) const { return kind == PauliKind::X ? lx : lz; }
};

/// Subgroup an error is reduced against; stores a row basis of its generators.
///
/// Reduction enumerates all 2^rank group elements, so the rank is capped.
class ReductionGroup {
   public:
    static constexpr size_t kMaxRank = 20;

    ReductionGroup() = default;
    explicit ReductionGroup(const BitMatrix &generators)
        : n_(generators.num_cols()), basis_(row_basis(generators)) {
        if (basis_.num_rows() > kMaxRank) {
            throw std::length_error("reduction group rank " + std::to_string(basis_.num_rows()) + " exceeds " +
                                    std::to_string(kMaxRank));
        }
        if (n_ <= 64) {
            for (const auto &r : basis_.rows()) words_.push_back(r.to_word());
            elements_.assign(size_t{1} << words_.size(), 0);
            // Gray-code order keeps the table construction incremental.
            for (size_t i = 1; i < elements_.size(); ++i) {
                elements_[i] = elements_[i - 1] ^ words_[std::countr_zero(i)];
            }
        }
    }

    size_t num_qubits() const { return n_; }
    size_t rank() const { return basis_.num_rows(); }
    const BitMatrix &basis() const { return basis_; }

    bool contains(const BitVector &e) const { return row_space_contains(basis_, e); }
    bool equivalent(const BitVector &a, const BitVector &b) const { return contains(a ^ b); }

    /// Minimum Hamming weight over the coset e + group.
    size_t reduced_weight(const BitVector &e) const {
        check(e);
        if (n_ <= 64) return reduced_weight_word(e.to_word());
        size_t best = e.weight();
        for_each_coset_element(e, [&](const BitVector &v) { best = std::min(best, v.weight()); });
        return best;
    }

    size_t reduced_weight_word(uint64_t e) const {
        int best = std::popcount(e);
        for (uint64_t s : elements_) {
            int w = std::popcount(e ^ s);
            if (w < best) best = w;
        }
        return static_cast<size_t>(best);
    }

    /// Canonical coset representative: minimum weight, then lexicographically smallest.
    BitVector canonical(const BitVector &e) const {
        check(e);
        if (n_ <= 64) {
            uint64_t best = e.to_word();
            int best_w = std::popcount(best);
            for (uint64_t s : elements_) {
                uint64_t v = e.to_word() ^ s;
                int w = std::popcount(v);
                // Lexicographic order with coordinate 0 first equals bit-reversed integer order.
                if (w < best_w || (w == best_w && lex_less_word(v, best))) {
                    best = v;
                    best_w = w;
                }
            }
            return BitVector::from_word(n_, best);
        }
        BitVector best = e;
        for_each_coset_element(e, [&](const BitVector &v) {
            if (v.weight() < best.weight() || (v.weight() == best.weight() && v.lex_less(best))) best = v;
        });
        return best;
    }

   private:
    static bool lex_less_word(uint64_t a, uint64_t b) {
        uint64_t diff = a ^ b;
        if (!diff) return false;
        uint64_t lowest = diff & (~diff + 1);
        return (b & lowest) != 0;
    }
    void check(const BitVector &e) const {
        if (e.size() != n_) throw std::invalid_argument("reduction: error length does not match group");
    }
    template <typename F>
    void for_each_coset_element(const BitVector &e, F &&f) const {
        BitVector cur = e;
        f(cur);
        size_t count = size_t{1} << basis_.num_rows();
        for (size_t i = 1; i < count; ++i) {
            cur ^= basis_.row(std::countr_zero(i));
            f(cur);
        }
    }

    size_t n_ = 0;
    BitMatrix basis_;
    std::vector<uint64_t> words_;
    std::vector<uint64_t> elements_;
};

/// Group used to reduce errors of `error_kind` on the prepared |0>_L state.
inline ReductionGroup reduction_group(const CssCode &code, PauliKind error_kind, ReductionMode mode) {
    if (error_kind == PauliKind::X) return ReductionGroup(code.hx);
    if (mode == ReductionMode::State) return ReductionGroup(code.hz.stacked(code.lz));
    return ReductionGroup(code.hz);
}

inline size_t reduced_weight(const BitVector &e, const ReductionGroup &g) { return g.reduced_weight(e); }

/// True iff an error of `kind` stabilizes |0>_L and so leaves it unchanged.
/// Such errors are harmless under either reduction mode.
inline bool acts_trivially(const CssCode &code, PauliKind kind, const BitVector &e) {
    if (e.is_zero()) return true;
    if (kind == PauliKind::X) return !code.hx.empty() && row_space_contains(code.hx, e);
    return row_space_contains(code.hz.empty() ? code.lz : code.hz.stacked(code.lz), e);
}

/// Checks every CssCode invariant; returns a description of the first violation.
inline std::optional<std::string> validate(const CssCode &code) {
    const size_t n = code.n;
    auto cols_ok = [&](const BitMatrix &m) { return m.empty() || m.num_cols() == n; };
    if (!cols_ok(code.hx) || !cols_ok(code.hz) || !cols_ok(code.lx) || !cols_ok(code.lz)) {
        return "matrix width does not match n";
    }
    if (!code.hx.mul_transpose(code.hz).is_zero()) return "hx * hz^T != 0 (stabilizers do not commute)";
    size_t rx = rank(code.hx);
    size_t rz = rank(code.hz);
    if (rx + rz + code.k != n) return "rank(hx) + rank(hz) != n - k";
    if (code.lx.num_rows() != code.k || code.lz.num_rows() != code.k) return "logical operator count != k";
    if (!code.hz.mul_transpose(code.lx).is_zero()) return "logical X does not commute with hz";
    if (!code.hx.mul_transpose(code.lz).is_zero()) return "logical Z does not commute with hx";
    for (size_t i = 0; i < code.k; ++i) {
        if (row_space_contains(code.hx, code.lx.row(i))) return "logical in stabilizer: lx row " + std::to_string(i);
        if (row_space_contains(code.hz, code.lz.row(i))) return "logical in stabilizer: lz row " + std::to_string(i);
    }
    for (size_t i = 0; i < code.k; ++i) {
        for (size_t j = 0; j < code.k; ++j) {
            if (inner(code.lx.row(i), code.lz.row(j)) != (i == j)) return "logicals are not symplectically paired";
        }
    }
    return std::nullopt;
}

/// Logical representatives completing kernel(hz) (resp. kernel(hx)) beyond the
/// stabilizer row spaces, symplectically paired so that <lx_i, lz_j> = delta_ij.
inline std::pair<BitMatrix, BitMatrix> derive_logicals(const BitMatrix &hx, const BitMatrix &hz) {
    size_t n = std::max(hx.num_cols(), hz.num_cols());
    if (!hx.empty() && !hz.empty() && !hx.mul_transpose(hz).is_zero()) {
        throw std::invalid_argument("derive_logicals: hx * hz^T != 0");
    }
    BitMatrix hx_n = hx.empty() ? BitMatrix(n) : hx;
    BitMatrix hz_n = hz.empty() ? BitMatrix(n) : hz;
    auto complete = [&](const BitMatrix &commuting_with, const BitMatrix &stabs) {
        BitMatrix span = row_basis(stabs);
        BitMatrix extra(n);
        BitMatrix kernel = kernel_basis(commuting_with);
        for (const auto &v : kernel.rows()) {
            if (!row_space_contains(span, v)) {
                span.append_row(v);
                extra.append_row(v);
            }
        }
        return extra;
    };
    BitMatrix lx = complete(hz_n, hx_n);
    BitMatrix lz = complete(hx_n, hz_n);
    if (lx.num_rows() != lz.num_rows()) throw std::logic_error("derive_logicals: unequal logical counts");
    // Symplectic Gram-Schmidt.
    size_t k = lx.num_rows();
    for (size_t i = 0; i < k; ++i) {
        size_t j = i;
        while (j < k && !inner(lx.row(i), lz.row(j))) ++j;
        if (j == k) {
            size_t a = i + 1;
            bool found = false;
            for (; a < k && !found; ++a) {
                for (size_t b = i; b < k; ++b) {
                    if (inner(lx.row(a), lz.row(b))) {
                        std::swap(lx.row(i), lx.row(a));
                        j = b;
                        found = true;
                        break;
                    }
                }
            }
            if (!found) throw std::logic_error("derive_logicals: degenerate pairing");
        }
        std::swap(lz.row(i), lz.row(j));
        for (size_t m = 0; m < k; ++m) {
            if (m == i) continue;
            if (inner(lx.row(m), lz.row(i))) lx.row(m) ^= lx.row(i);
            if (inner(lx.row(i), lz.row(m))) lz.row(m) ^= lz.row(i);
        }
    }
    return {std::move(lx), std::move(lz)};
}

/// Minimum weight of an operator of type `kind` that commutes with the opposite
/// checks but is not a stabilizer.
inline size_t logical_distance(const CssCode &code, PauliKind kind) {
    const BitMatrix &commuting = code.stabilizers(opposite(kind));
    BitMatrix kernel = kernel_basis(commuting.empty() ? BitMatrix(code.n) : commuting);
    if (kernel.num_rows() > ReductionGroup::kMaxRank) throw std::length_error("distance: kernel too large");
    ReductionGroup stabs(code.stabilizers(kind).empty() ? BitMatrix(code.n) : code.stabilizers(kind));
    size_t best = code.n + 1;
    BitVector cur(code.n);
    size_t count = size_t{1} << kernel.num_rows();
    for (size_t i = 1; i < count; ++i) {
        cur ^= kernel.row(std::countr_zero(i));
        size_t w = cur.weight();
        if (w < best && !stabs.contains(cur)) best = w;
    }
    return best;
}

/// Code distance: minimum over both logical types.
inline size_t distance(const CssCode &code) {
    return std::min(logical_distance(code, PauliKind::X), logical_distance(code, PauliKind::Z));
}

/// Assembles a code, deriving logicals when absent and computing the distance.
inline CssCode make_code(std::string name, BitMatrix hx, BitMatrix hz, std::optional<BitMatrix> lx = std::nullopt,
                         std::optional<BitMatrix> lz = std::nullopt) {
    CssCode code;
    code.name = std::move(name);
    code.n = std::max(hx.num_cols(), hz.num_cols());
    if (hx.num_cols() != code.n) hx = BitMatrix(code.n);
    if (hz.num_cols() != code.n) hz = BitMatrix(code.n);
    code.hx = std::move(hx);
    code.hz = std::move(hz);
    if (lx && lz) {
        code.lx = *lx;
        code.lz = *lz;
    } else {
        auto [dx, dz] = derive_logicals(code.hx, code.hz);
        code.lx = std::move(dx);
        code.lz = std::move(dz);
        if (code.lx.num_rows() == 1) {
            // Single logical qubit: use minimum-weight representatives.
            code.lx.row(0) = ReductionGroup(code.hx).canonical(code.lx.row(0));
            code.lz.row(0) = ReductionGroup(code.hz).canonical(code.lz.row(0));
        }
    }
    code.k = code.lx.num_rows();
    if (auto err = validate(code)) throw std::invalid_argument("invalid code '" + code.name + "': " + *err);
    code.d = distance(code);
    return code;
}

/// Minimum-weight lookup table decoder for one error type.
class LookupDecoder {
   public:
    LookupDecoder() = default;
    LookupDecoder(const BitMatrix &checks, PauliKind error_kind) : kind_(error_kind), checks_(checks) {
        size_t n = checks.num_cols();
        size_t reachable = size_t{1} << rank(checks);
        table_.reserve(reachable);
        // Enumerate errors by increasing weight; first hit per syndrome has minimum weight.
        std::vector<size_t> idx;
        for (size_t w = 0; w <= n && table_.size() < reachable; ++w) {
            idx.resize(w);
            for (size_t i = 0; i < w; ++i) idx[i] = i;
            while (true) {
                BitVector e = BitVector::from_support(n, idx);
                table_.try_emplace(checks.mul_vec(e), e);
                if (table_.size() == reachable) break;
                // next combination
                size_t i = w;
                while (i > 0 && idx[i - 1] == n - w + i - 1) --i;
                if (i == 0) break;
                ++idx[i - 1];
                for (size_t j = i; j < w; ++j) idx[j] = idx[j - 1] + 1;
            }
        }
    }

    PauliKind error_kind() const { return kind_; }
    const BitMatrix &checks() const { return checks_; }
    size_t size() const { return table_.size(); }

    BitVector syndrome(const BitVector &error) const { return checks_.mul_vec(error); }
    /// Correction for a syndrome; nothing if the syndrome is unreachable.
    std::optional<BitVector> decode(const BitVector &syndrome) const {
        auto it = table_.find(syndrome);
        if (it == table_.end()) return std::nullopt;
        return it->second;
    }

   private:
    PauliKind kind_ = PauliKind::X;
    BitMatrix checks_;
    std::unordered_map<BitVector, BitVector, BitVectorHash> table_;
};

/// Decoder for errors of `error_kind` (X errors use hz syndromes).
inline LookupDecoder build_lookup_decoder(const CssCode &code, PauliKind error_kind) {
    return LookupDecoder(code.detecting_checks(error_kind), error_kind);
}

}  // namespace detprep
