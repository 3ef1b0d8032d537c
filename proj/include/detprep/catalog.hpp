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

#include <stdexcept>
#include <string>
#include <vector>

#include "detprep/css_code.hpp"

// Built-in CSS codes. Qubit indices are 0-based; the comments give the usual
// 1-based labels where a standard presentation exists.
//
//   steane        [[7,1,3]]   color code on a triangle (X and Z on the same faces)
//   shor          [[9,1,3]]   3x3 concatenated repetition code
//   surface9      [[9,1,3]]   rotated surface code on a 3x3 grid
//   tetrahedral15 [[15,1,3]]  quantum Reed-Muller code; qubits are the nonzero
//                             points v of F_2^4, X checks are the 4 coordinate
//                             hyperplanes, Z checks add their pairwise intersections
//   hamming15     [[15,7,3]]  both check types from the [15,11,3] Hamming code
//   tesseract16   [[16,6,4]]  qubits on the 4-cube; X and Z checks span RM(1,4)
//   carbon12      [[12,2,4]]  weight-4/6 CSS instance with the carbon code's parameters
//   c11_1_3       [[11,1,3]]  CSS instance with weight-4/6 checks
//   c16_2_4       [[16,2,4]]  tesseract16 with two logical X and two logical Z
//                             operators (of different logical qubits) promoted
//                             to stabilizers
//
// Entries without a canonical matrix form are gated by validate() and distance()
// in the test suite, not by textual comparison with a reference.

namespace detprep {

inline std::vector<std::string> catalog_names() {
    return {"steane", "shor", "surface9", "tetrahedral15", "hamming15", "carbon12", "tesseract16", "c11_1_3", "c16_2_4"};
}

namespace detail {

inline CssCode steane_code() {
    // 1-based: X1X2X5X6, X1X3X5X7, X4X5X6X7 and the same for Z.
    std::vector<std::vector<size_t>> faces = {{0, 1, 4, 5}, {0, 2, 4, 6}, {3, 4, 5, 6}};
    BitMatrix lx = BitMatrix::from_supports(7, {{2, 3, 6}});  // X3X4X7
    BitMatrix lz = BitMatrix::from_supports(7, {{0, 1, 2}});  // Z1Z2Z3
    return make_code("steane", BitMatrix::from_supports(7, faces), BitMatrix::from_supports(7, faces), lx, lz);
}

inline CssCode shor_code() {
    BitMatrix hz = BitMatrix::from_supports(9, {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {6, 7}, {7, 8}});
    BitMatrix hx = BitMatrix::from_supports(9, {{0, 1, 2, 3, 4, 5}, {3, 4, 5, 6, 7, 8}});
    return make_code("shor", hx, hz);
}

inline CssCode surface9_code() {
    // 0 1 2
    // 3 4 5
    // 6 7 8
    BitMatrix hx = BitMatrix::from_supports(9, {{0, 1, 3, 4}, {4, 5, 7, 8}, {1, 2}, {6, 7}});
    BitMatrix hz = BitMatrix::from_supports(9, {{1, 2, 4, 5}, {3, 4, 6, 7}, {0, 3}, {5, 8}});
    return make_code("surface9", hx, hz);
}

inline std::vector<size_t> points_where(size_t mask_bits) {
    std::vector<size_t> out;
    for (size_t v = 1; v < 16; ++v) {
        if ((v & mask_bits) == mask_bits) out.push_back(v - 1);
    }
    return out;
}

inline CssCode tetrahedral15_code() {
    std::vector<std::vector<size_t>> xs, zs;
    for (size_t i = 0; i < 4; ++i) xs.push_back(points_where(size_t{1} << i));
    zs = xs;
    for (size_t i = 0; i < 4; ++i) {
        for (size_t j = i + 1; j < 4; ++j) zs.push_back(points_where((size_t{1} << i) | (size_t{1} << j)));
    }
    return make_code("tetrahedral15", BitMatrix::from_supports(15, xs), BitMatrix::from_supports(15, zs));
}

inline CssCode hamming15_code() {
    std::vector<std::vector<size_t>> rows;
    for (size_t i = 0; i < 4; ++i) rows.push_back(points_where(size_t{1} << i));
    return make_code("hamming15", BitMatrix::from_supports(15, rows), BitMatrix::from_supports(15, rows));
}

inline BitMatrix rm1_16() {
    std::vector<std::vector<size_t>> rows;
    std::vector<size_t> all;
    for (size_t v = 0; v < 16; ++v) all.push_back(v);
    rows.push_back(all);
    for (size_t i = 0; i < 4; ++i) {
        std::vector<size_t> r;
        for (size_t v = 0; v < 16; ++v) {
            if ((v >> i) & 1) r.push_back(v);
        }
        rows.push_back(r);
    }
    return BitMatrix::from_supports(16, rows);
}

inline CssCode tesseract16_code() { return make_code("tesseract16", rm1_16(), rm1_16()); }

inline CssCode carbon12_code() {
    BitMatrix hx = BitMatrix::from_strings({
        "1.1.1.11...1",
        "1..111.11...",
        "....1111.11.",
        "111....111..",
        "..1.1...1.1.",
    });
    BitMatrix hz = BitMatrix::from_strings({
        "1.11..111...",
        "..1.1...1.1.",
        "...1...1.1.1",
        "1..1.1..1.11",
        "1111.....11.",
    });
    return make_code("carbon12", hx, hz);
}

inline CssCode c11_1_3_code() {
    BitMatrix hx = BitMatrix::from_strings({
        "...111.11.1",
        "11.1.1.....",
        "1..11....1.",
        "..111...1..",
        "1.....1.1.1",
    });
    BitMatrix hz = BitMatrix::from_strings({
        ".11..1.11.1",
        "..11.1...1.",
        ".1...11...1",
        "11..1...1..",
        "....1.1.11.",
    });
    return make_code("c11_1_3", hx, hz);
}

inline CssCode c16_2_4_code() {
    CssCode t = tesseract16_code();
    // Logical pairs (0, 1) are fixed in X, pairs (2, 3) in Z; the commutation
    // relations of the promoted operators are trivial across different pairs.
    BitMatrix hx = t.hx;
    BitMatrix hz = t.hz;
    hx.append_row(t.lx.row(0));
    hx.append_row(t.lx.row(1));
    hz.append_row(t.lz.row(2));
    hz.append_row(t.lz.row(3));
    return make_code("c16_2_4", hx, hz);
}

}  // namespace detail

/// Built-in code by name; throws std::out_of_range for unknown names.
inline CssCode catalog(const std::string &name) {
    if (name == "steane") return detail::steane_code();
    if (name == "shor") return detail::shor_code();
    if (name == "surface9") return detail::surface9_code();
    if (name == "tetrahedral15") return detail::tetrahedral15_code();
    if (name == "hamming15") return detail::hamming15_code();
    if (name == "carbon12") return detail::carbon12_code();
    if (name == "tesseract16") return detail::tesseract16_code();
    if (name == "c11_1_3") return detail::c11_1_3_code();
    if (name == "c16_2_4") return detail::c16_2_4_code();
    throw std::out_of_range("unknown code '" + name + "'");
}

}  // namespace detprep
