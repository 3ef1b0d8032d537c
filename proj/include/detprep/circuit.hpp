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

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "detprep/css_code.hpp"
#include "detprep/f2.hpp"

namespace detprep {

/// Holds iff (measured bits AND mask) == value.
struct ClassicalCondition {
    BitVector mask;
    BitVector value;

    bool holds(const BitVector &cbits) const {
        if (cbits.size() != mask.size()) throw std::invalid_argument("condition width != cbit count");
        return (cbits & mask) == value;
    }
    bool operator==(const ClassicalCondition &) const = default;
};

enum class GateType : uint8_t { PrepZ, PrepX, Cnot, MeasZ, MeasX, CondPauli };

struct Gate {
    GateType type = GateType::PrepZ;
    size_t q0 = 0;  // qubit, or CNOT control
    size_t q1 = 0;  // CNOT target
    size_t cbit = 0;
    PauliKind pauli = PauliKind::X;
    ClassicalCondition condition;

    static Gate make(GateType type, size_t q0, size_t q1 = 0, size_t cbit = 0) {
        Gate g;
        g.type = type;
        g.q0 = q0;
        g.q1 = q1;
        g.cbit = cbit;
        return g;
    }
    static Gate prep_z(size_t q) { return make(GateType::PrepZ, q); }
    static Gate prep_x(size_t q) { return make(GateType::PrepX, q); }
    static Gate cnot(size_t control, size_t target) { return make(GateType::Cnot, control, target); }
    static Gate meas_z(size_t q, size_t cbit) { return make(GateType::MeasZ, q, 0, cbit); }
    static Gate meas_x(size_t q, size_t cbit) { return make(GateType::MeasX, q, 0, cbit); }
    static Gate cond_pauli(PauliKind kind, size_t q, ClassicalCondition cond) {
        return Gate{GateType::CondPauli, q, 0, 0, kind, std::move(cond)};
    }

    bool is_prep() const { return type == GateType::PrepZ || type == GateType::PrepX; }
    bool is_measurement() const { return type == GateType::MeasZ || type == GateType::MeasX; }
    std::vector<size_t> qubits() const {
        if (type == GateType::Cnot) return {q0, q1};
        return {q0};
    }
    bool operator==(const Gate &) const = default;
};

/// Ordered gate list over `width` qubits; data qubits come first.
struct Circuit {
    size_t width = 0;
    size_t num_data = 0;
    size_t num_cbits = 0;
    std::vector<Gate> gates;

    Circuit() = default;
    Circuit(size_t width_, size_t num_data_, size_t num_cbits_ = 0)
        : width(width_), num_data(num_data_), num_cbits(num_cbits_) {}

    Circuit &add(Gate g) {
        for (size_t q : g.qubits()) {
            if (q >= width) throw std::out_of_range("gate qubit " + std::to_string(q) + " >= width");
        }
        if (g.is_measurement() && g.cbit >= num_cbits) throw std::out_of_range("measurement cbit out of range");
        if (g.type == GateType::Cnot && g.q0 == g.q1) throw std::invalid_argument("CNOT control equals target");
        gates.push_back(std::move(g));
        return *this;
    }
    void append(const Circuit &other) {
        if (other.width != width || other.num_cbits != num_cbits) {
            throw std::invalid_argument("append: circuit shapes differ");
        }
        for (const auto &g : other.gates) gates.push_back(g);
    }
    size_t count(GateType t) const {
        size_t c = 0;
        for (const auto &g : gates) c += g.type == t;
        return c;
    }
    bool operator==(const Circuit &) const = default;
};

/// A single fault: a Pauli applied immediately after `location`, or a flipped
/// outcome of the measurement at `location`.
struct Fault {
    size_t location = 0;
    BitVector x;
    BitVector z;
    std::optional<size_t> flip;

    bool is_flip() const { return flip.has_value(); }
    std::string describe() const {
        std::ostringstream out;
        out << "gate " << location << ": ";
        if (flip) {
            out << "flip m" << *flip;
            return out.str();
        }
        for (size_t q = 0; q < x.size(); ++q) {
            bool fx = x.get(q), fz = z.get(q);
            if (fx || fz) out << (fx && fz ? 'Y' : fx ? 'X' : 'Z') << q << ' ';
        }
        std::string s = out.str();
        if (!s.empty() && s.back() == ' ') s.pop_back();
        return s;
    }
};

struct Propagation {
    BitVector residual_x;  // over the full width
    BitVector residual_z;
    BitVector flips;  // over cbits

    BitVector data_x(size_t num_data) const { return residual_x.slice(0, num_data); }
    BitVector data_z(size_t num_data) const { return residual_z.slice(0, num_data); }
    BitVector data(PauliKind kind, size_t num_data) const {
        return kind == PauliKind::X ? data_x(num_data) : data_z(num_data);
    }
};

/// Frame action of one gate on a Pauli (x, z), accumulating measurement flips.
inline void apply_gate_to_frame(const Gate &g, BitVector &x, BitVector &z, BitVector &flips) {
    switch (g.type) {
        case GateType::PrepZ:
        case GateType::PrepX:
            x.set(g.q0, false);
            z.set(g.q0, false);
            break;
        case GateType::Cnot:
            if (x.get(g.q0)) x.flip(g.q1);
            if (z.get(g.q1)) z.flip(g.q0);
            break;
        case GateType::MeasZ:
            if (x.get(g.q0)) flips.flip(g.cbit);
            break;
        case GateType::MeasX:
            if (z.get(g.q0)) flips.flip(g.cbit);
            break;
        case GateType::CondPauli:
            break;
    }
}

/// Forward conjugation of a fault through the rest of the circuit.
/// Classical conditions are ignored.
inline Propagation propagate(const Circuit &c, const Fault &f) {
    if (f.location >= c.gates.size()) throw std::out_of_range("fault location beyond circuit");
    Propagation out{BitVector(c.width), BitVector(c.width), BitVector(c.num_cbits)};
    if (f.flip) {
        const Gate &g = c.gates[f.location];
        if (!g.is_measurement() || g.cbit != *f.flip) throw std::invalid_argument("flip fault not at its measurement");
        out.flips.flip(*f.flip);
    } else {
        if (f.x.size() != c.width || f.z.size() != c.width) throw std::invalid_argument("fault width mismatch");
        out.residual_x = f.x;
        out.residual_z = f.z;
    }
    for (size_t j = f.location + 1; j < c.gates.size(); ++j) {
        apply_gate_to_frame(c.gates[j], out.residual_x, out.residual_z, out.flips);
    }
    return out;
}

/// Synthesis-level fault set: X and Z faults after every preparation, the six
/// CSS-typed two-qubit Paulis after every CNOT, and an outcome flip per measurement.
inline std::vector<Fault> fault_locations(const Circuit &c) {
    std::vector<Fault> out;
    auto pauli = [&](size_t loc, std::vector<size_t> xs, std::vector<size_t> zs) {
        out.push_back(Fault{loc, BitVector::from_support(c.width, xs), BitVector::from_support(c.width, zs), {}});
    };
    for (size_t i = 0; i < c.gates.size(); ++i) {
        const Gate &g = c.gates[i];
        if (g.is_prep()) {
            pauli(i, {g.q0}, {});
            pauli(i, {}, {g.q0});
        } else if (g.type == GateType::Cnot) {
            pauli(i, {g.q1}, {});
            pauli(i, {g.q0}, {});
            pauli(i, {g.q0, g.q1}, {});
            pauli(i, {}, {g.q1});
            pauli(i, {}, {g.q0});
            pauli(i, {}, {g.q0, g.q1});
        } else if (g.is_measurement()) {
            out.push_back(Fault{i, BitVector(c.width), BitVector(c.width), g.cbit});
        }
    }
    return out;
}

/// Every nontrivial Pauli on the gate's support (3 or 15), plus flips at measurements.
inline std::vector<Fault> full_fault_set(const Circuit &c, bool include_conditional = false) {
    std::vector<Fault> out;
    for (size_t i = 0; i < c.gates.size(); ++i) {
        const Gate &g = c.gates[i];
        if (g.is_measurement()) {
            out.push_back(Fault{i, BitVector(c.width), BitVector(c.width), g.cbit});
            continue;
        }
        if (g.type == GateType::CondPauli && !include_conditional) continue;
        auto qs = g.qubits();
        size_t count = size_t{1} << (2 * qs.size());
        for (size_t p = 1; p < count; ++p) {
            Fault f{i, BitVector(c.width), BitVector(c.width), {}};
            for (size_t j = 0; j < qs.size(); ++j) {
                if ((p >> (2 * j)) & 1) f.x.set(qs[j], true);
                if ((p >> (2 * j + 1)) & 1) f.z.set(qs[j], true);
            }
            out.push_back(std::move(f));
        }
    }
    return out;
}

/// Stabilizer generators (x-part, z-part) of the state produced by a
/// preparation-only circuit.
inline std::pair<BitMatrix, BitMatrix> stabilizer_flow(const Circuit &c) {
    std::vector<BitVector> xs, zs;
    for (const auto &g : c.gates) {
        switch (g.type) {
            case GateType::PrepZ:
                xs.emplace_back(c.width);
                zs.push_back(BitVector::unit(c.width, g.q0));
                break;
            case GateType::PrepX:
                xs.push_back(BitVector::unit(c.width, g.q0));
                zs.emplace_back(c.width);
                break;
            case GateType::Cnot:
                for (size_t i = 0; i < xs.size(); ++i) {
                    if (xs[i].get(g.q0)) xs[i].flip(g.q1);
                    if (zs[i].get(g.q1)) zs[i].flip(g.q0);
                }
                break;
            default:
                throw std::invalid_argument("stabilizer_flow: only preparations and CNOTs are allowed");
        }
    }
    return {BitMatrix(c.width, std::move(xs)), BitMatrix(c.width, std::move(zs))};
}

namespace detail {
inline std::string cond_str(const BitVector &v) { return v.str('0'); }
}  // namespace detail

inline std::string gate_text(const Gate &g) {
    std::ostringstream out;
    switch (g.type) {
        case GateType::PrepZ: out << "PREPZ " << g.q0; break;
        case GateType::PrepX: out << "PREPX " << g.q0; break;
        case GateType::Cnot: out << "CNOT " << g.q0 << ' ' << g.q1; break;
        case GateType::MeasZ: out << "MEASZ " << g.q0 << " -> m" << g.cbit; break;
        case GateType::MeasX: out << "MEASX " << g.q0 << " -> m" << g.cbit; break;
        case GateType::CondPauli:
            out << "CORR" << kind_char(g.pauli) << ' ' << g.q0 << " IF " << detail::cond_str(g.condition.mask) << '='
                << detail::cond_str(g.condition.value);
            break;
    }
    return out.str();
}

/// One gate per line; `header` lines are written as `#` comments first.
inline std::string circuit_text(const Circuit &c, const std::vector<std::string> &header = {}) {
    std::ostringstream out;
    for (const auto &h : header) out << "# " << h << '\n';
    for (const auto &g : c.gates) out << gate_text(g) << '\n';
    return out.str();
}

/// Parses the text format; blank lines and `#` comments are skipped.
inline Circuit parse_circuit_text(const std::string &text, size_t width, size_t num_data, size_t num_cbits) {
    Circuit c(width, num_data, num_cbits);
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream ls(line.substr(start));
        std::string op;
        ls >> op;
        auto fail = [&](const std::string &why) {
            throw std::invalid_argument("circuit text line " + std::to_string(line_no) + ": " + why);
        };
        auto read_cbit = [&]() {
            std::string arrow, m;
            ls >> arrow >> m;
            if (arrow != "->" || m.size() < 2 || m[0] != 'm') fail("expected '-> mN'");
            return static_cast<size_t>(std::stoul(m.substr(1)));
        };
        size_t q = 0, t = 0;
        if (op == "PREPZ" || op == "PREPX") {
            if (!(ls >> q)) fail("missing qubit");
            c.add(op == "PREPZ" ? Gate::prep_z(q) : Gate::prep_x(q));
        } else if (op == "CNOT") {
            if (!(ls >> q >> t)) fail("missing qubits");
            c.add(Gate::cnot(q, t));
        } else if (op == "MEASZ" || op == "MEASX") {
            if (!(ls >> q)) fail("missing qubit");
            size_t m = read_cbit();
            c.add(op == "MEASZ" ? Gate::meas_z(q, m) : Gate::meas_x(q, m));
        } else if (op == "CORRX" || op == "CORRZ") {
            std::string kw, cond;
            if (!(ls >> q >> kw >> cond) || kw != "IF") fail("expected 'CORR? q IF mask=value'");
            auto eq = cond.find('=');
            if (eq == std::string::npos) fail("condition needs mask=value");
            ClassicalCondition cc{BitVector::from_string(cond.substr(0, eq)), BitVector::from_string(cond.substr(eq + 1))};
            if (cc.mask.size() != num_cbits || cc.value.size() != num_cbits) fail("condition width != cbit count");
            c.add(Gate::cond_pauli(op == "CORRX" ? PauliKind::X : PauliKind::Z, q, std::move(cc)));
        } else {
            fail("unknown gate '" + op + "'");
        }
    }
    return c;
}

}  // namespace detprep
