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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace detprep {

/// Dense bit vector over GF(2), packed into 64-bit words.
///
/// Bits at positions >= size() are always zero, so word-level equality,
/// hashing and popcounts never see stale padding.
class BitVector {
   public:
    BitVector() = default;
    explicit BitVector(size_t size) : size_(size), words_((size + 63) / 64, 0) {}

    static BitVector from_support(size_t size, std::initializer_list<size_t> support) {
        return from_support(size, std::vector<size_t>(support));
    }
    static BitVector from_support(size_t size, const std::vector<size_t> &support) {
        BitVector v(size);
        for (size_t q : support) v.set(q, true);
        return v;
    }
    static BitVector unit(size_t size, size_t index) {
        BitVector v(size);
        v.set(index, true);
        return v;
    }
    /// Parses a string over {'0','1'} or {'.','1'}; index 0 is the first character.
    static BitVector from_string(std::string_view s) {
        BitVector v(s.size());
        for (size_t i = 0; i < s.size(); ++i) {
            char c = s[i];
            if (c == '1') {
                v.set(i, true);
            } else if (c != '0' && c != '.' && c != '_') {
                throw std::invalid_argument("bit string may only contain '0', '.', '_' or '1'");
            }
        }
        return v;
    }
    /// Low `size` bits of `word`, bit i of the word becoming coordinate i.
    static BitVector from_word(size_t size, uint64_t word) {
        if (size > 64) throw std::invalid_argument("from_word supports at most 64 bits");
        BitVector v(size);
        if (size > 0) v.words_[0] = size == 64 ? word : word & ((uint64_t{1} << size) - 1);
        return v;
    }

    size_t size() const { return size_; }
    bool empty() const { return size_ == 0; }
    size_t num_words() const { return words_.size(); }
    const std::vector<uint64_t> &words() const { return words_; }

    bool get(size_t i) const {
        check_index(i);
        return (words_[i >> 6] >> (i & 63)) & 1;
    }
    bool operator[](size_t i) const { return get(i); }
    void set(size_t i, bool value) {
        check_index(i);
        uint64_t mask = uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }
    void flip(size_t i) {
        check_index(i);
        words_[i >> 6] ^= uint64_t{1} << (i & 63);
    }

    /// First 64 coordinates as a word (coordinate i -> bit i).
    uint64_t to_word() const {
        if (size_ > 64) throw std::logic_error("to_word on a vector longer than 64 bits");
        return words_.empty() ? 0 : words_[0];
    }

    size_t weight() const {
        size_t w = 0;
        for (uint64_t word : words_) w += std::popcount(word);
        return w;
    }
    bool is_zero() const {
        return std::all_of(words_.begin(), words_.end(), [](uint64_t w) { return w == 0; });
    }
    std::vector<size_t> support() const {
        std::vector<size_t> out;
        for (size_t k = 0; k < words_.size(); ++k) {
            uint64_t w = words_[k];
            while (w) {
                out.push_back(k * 64 + std::countr_zero(w));
                w &= w - 1;
            }
        }
        return out;
    }

    BitVector &operator^=(const BitVector &other) {
        check_same_size(other);
        for (size_t k = 0; k < words_.size(); ++k) words_[k] ^= other.words_[k];
        return *this;
    }
    BitVector &operator&=(const BitVector &other) {
        check_same_size(other);
        for (size_t k = 0; k < words_.size(); ++k) words_[k] &= other.words_[k];
        return *this;
    }
    friend BitVector operator^(BitVector a, const BitVector &b) { return a ^= b; }
    friend BitVector operator&(BitVector a, const BitVector &b) { return a &= b; }

    bool operator==(const BitVector &other) const = default;

    /// Lexicographic order on the coordinate string (coordinate 0 most significant),
    /// with shorter vectors first.
    bool lex_less(const BitVector &other) const {
        if (size_ != other.size_) return size_ < other.size_;
        for (size_t k = 0; k < words_.size(); ++k) {
            if (words_[k] != other.words_[k]) {
                uint64_t diff = words_[k] ^ other.words_[k];
                uint64_t lowest = diff & (~diff + 1);
                return (other.words_[k] & lowest) != 0;
            }
        }
        return false;
    }
    friend bool operator<(const BitVector &a, const BitVector &b) { return a.lex_less(b); }

    /// Concatenation of this vector followed by `tail`.
    BitVector concat(const BitVector &tail) const {
        BitVector out(size_ + tail.size_);
        for (size_t i : support()) out.set(i, true);
        for (size_t i : tail.support()) out.set(size_ + i, true);
        return out;
    }
    BitVector slice(size_t begin, size_t end) const {
        if (begin > end || end > size_) throw std::out_of_range("BitVector::slice range");
        BitVector out(end - begin);
        for (size_t i = begin; i < end; ++i) {
            if (get(i)) out.set(i - begin, true);
        }
        return out;
    }
    /// Copy resized to `size`, truncating or zero-extending.
    BitVector resized(size_t size) const {
        BitVector out(size);
        for (size_t i : support()) {
            if (i < size) out.set(i, true);
        }
        return out;
    }

    /// Renders as '1' and `zero` characters, coordinate 0 first.
    std::string str(char zero = '.') const {
        std::string s(size_, zero);
        for (size_t i : support()) s[i] = '1';
        return s;
    }

    size_t hash() const {
        uint64_t h = 0x9E3779B97F4A7C15ull ^ size_;
        for (uint64_t w : words_) {
            h ^= w + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
        }
        return static_cast<size_t>(h);
    }

   private:
    void check_index(size_t i) const {
        if (i >= size_) throw std::out_of_range("BitVector index " + std::to_string(i) + " >= " + std::to_string(size_));
    }
    void check_same_size(const BitVector &other) const {
        if (size_ != other.size_) throw std::invalid_argument("BitVector length mismatch");
    }

    size_t size_ = 0;
    std::vector<uint64_t> words_;
};

struct BitVectorHash {
    size_t operator()(const BitVector &v) const { return v.hash(); }
};

/// Parity of the coordinate-wise AND.
inline bool inner(const BitVector &u, const BitVector &v) {
    if (u.size() != v.size()) throw std::invalid_argument("inner: length mismatch");
    uint64_t acc = 0;
    for (size_t k = 0; k < u.num_words(); ++k) acc ^= u.words()[k] & v.words()[k];
    return std::popcount(acc) & 1;
}

/// Row-major matrix over GF(2).
class BitMatrix {
   public:
    BitMatrix() = default;
    BitMatrix(size_t rows, size_t cols) : cols_(cols), rows_(rows, BitVector(cols)) {}
    explicit BitMatrix(size_t cols) : cols_(cols) {}
    BitMatrix(size_t cols, std::vector<BitVector> rows) : cols_(cols), rows_(std::move(rows)) {
        for (const auto &r : rows_) {
            if (r.size() != cols_) throw std::invalid_argument("BitMatrix rows must share the column count");
        }
    }

    /// Rows given as strings over {'.','1'} (or '0'); all must share a length.
    static BitMatrix from_strings(const std::vector<std::string> &rows, std::optional<size_t> cols = std::nullopt) {
        size_t c = cols.value_or(rows.empty() ? 0 : rows.front().size());
        BitMatrix m(c);
        for (const auto &s : rows) m.append_row(BitVector::from_string(s));
        return m;
    }
    /// Rows given by supports.
    static BitMatrix from_supports(size_t cols, const std::vector<std::vector<size_t>> &supports) {
        BitMatrix m(cols);
        for (const auto &s : supports) m.append_row(BitVector::from_support(cols, s));
        return m;
    }
    static BitMatrix identity(size_t n) {
        BitMatrix m(n, n);
        for (size_t i = 0; i < n; ++i) m.rows_[i].set(i, true);
        return m;
    }

    size_t num_rows() const { return rows_.size(); }
    size_t num_cols() const { return cols_; }
    bool empty() const { return rows_.empty(); }
    const BitVector &row(size_t i) const { return rows_.at(i); }
    BitVector &row(size_t i) { return rows_.at(i); }
    const std::vector<BitVector> &rows() const { return rows_; }
    bool get(size_t r, size_t c) const { return rows_.at(r).get(c); }
    void set(size_t r, size_t c, bool v) { rows_.at(r).set(c, v); }

    void append_row(BitVector v) {
        if (v.size() != cols_) throw std::invalid_argument("append_row: length mismatch");
        rows_.push_back(std::move(v));
    }
    /// Rows of this matrix followed by the rows of `other`.
    BitMatrix stacked(const BitMatrix &other) const {
        if (other.cols_ != cols_ && !other.empty()) throw std::invalid_argument("stacked: column mismatch");
        BitMatrix out = *this;
        for (const auto &r : other.rows_) out.rows_.push_back(r);
        return out;
    }
    BitVector column(size_t c) const {
        BitVector out(rows_.size());
        for (size_t r = 0; r < rows_.size(); ++r) {
            if (rows_[r].get(c)) out.set(r, true);
        }
        return out;
    }
    BitMatrix transposed() const {
        BitMatrix out(cols_, rows_.size());
        for (size_t r = 0; r < rows_.size(); ++r) {
            for (size_t c : rows_[r].support()) out.rows_[c].set(r, true);
        }
        return out;
    }

    /// M · vᵀ: one bit per row.
    BitVector mul_vec(const BitVector &v) const {
        if (v.size() != cols_) throw std::invalid_argument("mul_vec: length mismatch");
        BitVector out(rows_.size());
        for (size_t r = 0; r < rows_.size(); ++r) {
            if (inner(rows_[r], v)) out.set(r, true);
        }
        return out;
    }
    /// coefficients · M: XOR of the selected rows.
    BitVector combine(const BitVector &coefficients) const {
        if (coefficients.size() != rows_.size()) throw std::invalid_argument("combine: coefficient length mismatch");
        BitVector out(cols_);
        for (size_t r : coefficients.support()) out ^= rows_[r];
        return out;
    }
    /// this · otherᵀ (rows × other.rows).
    BitMatrix mul_transpose(const BitMatrix &other) const {
        if (other.cols_ != cols_) throw std::invalid_argument("mul_transpose: column mismatch");
        BitMatrix out(rows_.size(), other.num_rows());
        for (size_t i = 0; i < rows_.size(); ++i) {
            for (size_t j = 0; j < other.num_rows(); ++j) {
                if (inner(rows_[i], other.rows_[j])) out.rows_[i].set(j, true);
            }
        }
        return out;
    }
    bool is_zero() const {
        return std::all_of(rows_.begin(), rows_.end(), [](const BitVector &r) { return r.is_zero(); });
    }

    std::vector<std::string> strings(char zero = '.') const {
        std::vector<std::string> out;
        for (const auto &r : rows_) out.push_back(r.str(zero));
        return out;
    }

    bool operator==(const BitMatrix &other) const = default;

   private:
    size_t cols_ = 0;
    std::vector<BitVector> rows_;
};

struct RrefResult {
    BitMatrix reduced;
    std::vector<size_t> pivots;
    size_t rank = 0;
};

/// Reduced row echelon form. Pivots are chosen leftmost-column first, taking the
/// topmost available row; zero rows are kept at the bottom.
inline RrefResult rref(const BitMatrix &m) {
    RrefResult out{m, {}, 0};
    auto &rows = out.reduced;
    size_t next = 0;
    for (size_t c = 0; c < m.num_cols() && next < m.num_rows(); ++c) {
        size_t pivot_row = next;
        while (pivot_row < m.num_rows() && !rows.get(pivot_row, c)) ++pivot_row;
        if (pivot_row == m.num_rows()) continue;
        std::swap(rows.row(pivot_row), rows.row(next));
        for (size_t r = 0; r < m.num_rows(); ++r) {
            if (r != next && rows.get(r, c)) rows.row(r) ^= rows.row(next);
        }
        out.pivots.push_back(c);
        ++next;
    }
    out.rank = next;
    return out;
}

inline size_t rank(const BitMatrix &m) { return rref(m).rank; }

/// Nonzero rows of rref(m): a basis of the row space.
inline BitMatrix row_basis(const BitMatrix &m) {
    auto r = rref(m);
    BitMatrix out(m.num_cols());
    for (size_t i = 0; i < r.rank; ++i) out.append_row(r.reduced.row(i));
    return out;
}

/// Coefficients c with c · m = v, or nothing when v lies outside the row space.
inline std::optional<BitVector> in_row_space(const BitMatrix &m, const BitVector &v) {
    if (v.size() != m.num_cols()) throw std::invalid_argument("in_row_space: length mismatch");
    // Track which original rows make up each working row.
    size_t rows = m.num_rows();
    std::vector<BitVector> work = m.rows();
    std::vector<BitVector> combo;
    combo.reserve(rows);
    for (size_t r = 0; r < rows; ++r) combo.push_back(BitVector::unit(rows, r));
    BitVector residual = v;
    BitVector coeff(rows);
    size_t next = 0;
    for (size_t c = 0; c < m.num_cols() && next < rows; ++c) {
        size_t p = next;
        while (p < rows && !work[p].get(c)) ++p;
        if (p == rows) continue;
        std::swap(work[p], work[next]);
        std::swap(combo[p], combo[next]);
        for (size_t r = next + 1; r < rows; ++r) {
            if (work[r].get(c)) {
                work[r] ^= work[next];
                combo[r] ^= combo[next];
            }
        }
        if (residual.get(c)) {
            residual ^= work[next];
            coeff ^= combo[next];
        }
        ++next;
    }
    if (!residual.is_zero()) return std::nullopt;
    return coeff;
}

inline bool row_space_contains(const BitMatrix &m, const BitVector &v) { return in_row_space(m, v).has_value(); }

/// Basis of {x : m · xᵀ = 0}, with cols − rank rows.
inline BitMatrix kernel_basis(const BitMatrix &m) {
    auto r = rref(m);
    size_t n = m.num_cols();
    std::vector<bool> is_pivot(n, false);
    for (size_t p : r.pivots) is_pivot[p] = true;
    BitMatrix out(n);
    for (size_t free = 0; free < n; ++free) {
        if (is_pivot[free]) continue;
        BitVector x(n);
        x.set(free, true);
        for (size_t i = 0; i < r.rank; ++i) {
            if (r.reduced.get(i, free)) x.set(r.pivots[i], true);
        }
        out.append_row(std::move(x));
    }
    return out;
}

/// True iff both matrices span the same row space.
inline bool same_row_space(const BitMatrix &a, const BitMatrix &b) {
    if (a.num_cols() != b.num_cols()) return false;
    size_t ra = rank(a);
    return ra == rank(b) && ra == rank(a.stacked(b));
}

}  // namespace detprep

template <>
struct std::hash<detprep::BitVector> {
    size_t operator()(const detprep::BitVector &v) const { return v.hash(); }
};
