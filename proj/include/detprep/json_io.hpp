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

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "detprep/protocol.hpp"
#include "detprep/simulation.hpp"

namespace detprep {

using Json = nlohmann::ordered_json;

/// Raised for JSON input that does not describe a valid code or protocol.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Json matrix_json(const BitMatrix &m) {
    Json out = Json::array();
    for (const auto &r : m.rows()) out.push_back(r.str());
    return out;
}

inline BitVector bits_from_json(const Json &j, size_t size, const char *what) {
    if (!j.is_string()) throw FormatError(std::string(what) + ": expected a bit string");
    BitVector v = BitVector::from_string(j.get<std::string>());
    if (v.size() != size) {
        throw FormatError(std::string(what) + ": expected " + std::to_string(size) + " bits, got " +
                          std::to_string(v.size()));
    }
    return v;
}

inline BitMatrix matrix_from_json(const Json &j, size_t n, const char *what) {
    if (!j.is_array()) throw FormatError(std::string(what) + ": expected a list of bit strings");
    BitMatrix m(n);
    for (const auto &row : j) m.append_row(bits_from_json(row, n, what));
    return m;
}

inline PauliKind kind_from_json(const Json &j) {
    std::string s = j.get<std::string>();
    if (s == "X") return PauliKind::X;
    if (s == "Z") return PauliKind::Z;
    throw FormatError("unknown Pauli kind '" + s + "'");
}

inline std::string kind_json(PauliKind k) { return std::string(1, kind_char(k)); }

inline Json witnesses_json(const std::vector<UnsatWitness> &ws) {
    Json out = Json::array();
    for (const auto &w : ws) {
        Json j;
        j["u"] = w.u;
        j["v"] = w.v ? Json(*w.v) : Json(nullptr);
        j["status"] = sat::status_name(w.status);
        j["vars"] = w.num_vars;
        j["clauses"] = w.num_clauses;
        out.push_back(std::move(j));
    }
    return out;
}

inline std::vector<UnsatWitness> witnesses_from_json(const Json &j) {
    std::vector<UnsatWitness> out;
    for (const auto &w : j) {
        UnsatWitness x;
        x.u = w.at("u").get<size_t>();
        if (!w.at("v").is_null()) x.v = w.at("v").get<size_t>();
        std::string s = w.at("status").get<std::string>();
        if (s == "unsat") {
            x.status = sat::Status::Unsat;
        } else if (s == "timeout") {
            x.status = sat::Status::Timeout;
        } else if (s == "sat") {
            x.status = sat::Status::Sat;
        } else {
            throw FormatError("unknown solver status '" + s + "'");
        }
        x.num_vars = w.at("vars").get<size_t>();
        x.num_clauses = w.at("clauses").get<size_t>();
        out.push_back(x);
    }
    return out;
}

inline Json measurement_json(const VerificationMeasurement &m, const std::vector<size_t> *order = nullptr) {
    Json j;
    j["kind"] = kind_json(m.kind);
    j["support"] = m.support.str();
    j["flagged"] = m.flagged;
    j["ancilla"] = m.ancilla;
    j["cbit"] = m.cbit;
    if (m.flagged) {
        j["flag_ancilla"] = m.flag_ancilla;
        j["flag_cbit"] = m.flag_cbit;
    }
    if (order) j["cnot_order"] = *order;
    return j;
}

inline VerificationMeasurement measurement_from_json(const Json &j, size_t n) {
    VerificationMeasurement m;
    m.kind = kind_from_json(j.at("kind"));
    m.support = bits_from_json(j.at("support"), n, "measurement support");
    m.flagged = j.at("flagged").get<bool>();
    m.ancilla = j.at("ancilla").get<size_t>();
    m.cbit = j.at("cbit").get<size_t>();
    if (m.flagged) {
        m.flag_ancilla = j.at("flag_ancilla").get<size_t>();
        m.flag_cbit = j.at("flag_cbit").get<size_t>();
    }
    return m;
}

inline Json branch_json(const CorrectionBranch &b) {
    Json j;
    j["error_kind"] = kind_json(b.error_kind);
    j["b"] = b.b.str('0');
    j["flag_branch"] = b.flag_branch;
    j["trigger"] = {{"mask", b.trigger.mask.str('0')}, {"value", b.trigger.value.str('0')}};
    j["prefix_cbits"] = b.prefix_cbits;
    Json ms = Json::array();
    for (const auto &m : b.measurements) ms.push_back(measurement_json(m));
    j["measurements"] = std::move(ms);
    Json rec = Json::object();
    for (const auto &[key, r] : b.recovery) rec[key.str('0')] = r.str();
    j["recovery"] = std::move(rec);
    j["u"] = b.u;
    j["v"] = b.v;
    j["witnesses"] = witnesses_json(b.witnesses);
    return j;
}

inline CorrectionBranch branch_from_json(const Json &j, size_t n, size_t num_cbits) {
    CorrectionBranch b;
    b.error_kind = kind_from_json(j.at("error_kind"));
    b.b = BitVector::from_string(j.at("b").get<std::string>());
    b.flag_branch = j.at("flag_branch").get<bool>();
    b.trigger.mask = bits_from_json(j.at("trigger").at("mask"), num_cbits, "trigger mask");
    b.trigger.value = bits_from_json(j.at("trigger").at("value"), num_cbits, "trigger value");
    b.prefix_cbits = j.at("prefix_cbits").get<std::vector<size_t>>();
    for (size_t c : b.prefix_cbits) {
        if (c >= num_cbits) throw FormatError("prefix cbit out of range");
    }
    for (const auto &m : j.at("measurements")) b.measurements.push_back(measurement_from_json(m, n));
    size_t key_size = b.prefix_cbits.size() + b.measurements.size();
    for (const auto &[key, rec] : j.at("recovery").items()) {
        BitVector k = BitVector::from_string(key);
        if (k.size() != key_size) throw FormatError("recovery key '" + key + "' has the wrong length");
        b.recovery[k] = bits_from_json(rec, n, "recovery");
    }
    b.u = j.at("u").get<size_t>();
    b.v = j.at("v").get<size_t>();
    b.witnesses = witnesses_from_json(j.at("witnesses"));
    return b;
}

inline Json metrics_json(const MetricsRow &m) {
    Json j;
    j["csv_header"] = MetricsRow::csv_header();
    j["csv_row"] = m.csv_row();
    j["sum_anc"] = m.sum_anc;
    j["sum_cnot"] = m.sum_cnot;
    j["avg_anc"] = m.avg_anc;
    j["avg_cnot"] = m.avg_cnot;
    return j;
}

}  // namespace detail

inline Json code_to_json(const CssCode &code) {
    Json j;
    j["name"] = code.name;
    j["n"] = code.n;
    j["k"] = code.k;
    j["hx"] = detail::matrix_json(code.hx);
    j["hz"] = detail::matrix_json(code.hz);
    j["lx"] = detail::matrix_json(code.lx);
    j["lz"] = detail::matrix_json(code.lz);
    return j;
}

/// Reads a code object; logicals are derived when absent. Throws FormatError.
inline CssCode code_from_json(const Json &j) {
    try {
        size_t n = j.at("n").get<size_t>();
        std::string name = j.contains("name") ? j.at("name").get<std::string>() : "custom";
        BitMatrix hx = detail::matrix_from_json(j.at("hx"), n, "hx");
        BitMatrix hz = detail::matrix_from_json(j.at("hz"), n, "hz");
        std::optional<BitMatrix> lx, lz;
        if (j.contains("lx") && j.contains("lz")) {
            lx = detail::matrix_from_json(j.at("lx"), n, "lx");
            lz = detail::matrix_from_json(j.at("lz"), n, "lz");
        }
        if (!hx.mul_transpose(hz).is_zero()) throw FormatError("hx and hz do not commute");
        CssCode code = make_code(name, hx, hz, lx, lz);
        if (code.n != n) throw FormatError("n does not match the matrices");
        if (j.contains("k") && j.at("k").get<size_t>() != code.k) throw FormatError("k does not match the matrices");
        if (auto err = validate(code)) throw FormatError("invalid code: " + *err);
        return code;
    } catch (const Json::exception &e) {
        throw FormatError(std::string("code JSON: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw FormatError(std::string("code JSON: ") + e.what());
    }
}

inline Json protocol_to_json(const DetFtProtocol &p) {
    Json j;
    j["format"] = "detprep-protocol";
    j["version"] = 1;
    j["code"] = code_to_json(p.code);
    j["mode"] = mode_name(p.mode);
    j["early_exit"] = p.early_exit;
    j["width"] = p.width;
    j["num_cbits"] = p.num_cbits;
    Json prep = Json::array();
    for (const auto &g : p.prep.gates) prep.push_back(gate_text(g));
    j["prep"] = std::move(prep);
    Json layers = Json::array();
    for (const auto &l : p.layers) {
        Json lj;
        lj["error_kind"] = detail::kind_json(l.error_kind());
        lj["u"] = l.verification.u;
        lj["v"] = l.verification.v;
        lj["witnesses"] = detail::witnesses_json(l.verification.witnesses);
        lj["syndrome_cbits"] = l.syndrome_cbits;
        lj["flag_cbits"] = l.flag_cbits;
        Json ver = Json::array();
        for (const auto &g : l.gadgets) ver.push_back(detail::measurement_json(g.measurement, &g.cnot_order));
        lj["verification"] = std::move(ver);
        Json branches = Json::array();
        for (const auto &b : l.branches) branches.push_back(detail::branch_json(b.branch));
        lj["branches"] = std::move(branches);
        Json flags = Json::array();
        for (const auto &b : l.flag_branches) flags.push_back(detail::branch_json(b.branch));
        lj["flag_branches"] = std::move(flags);
        layers.push_back(std::move(lj));
    }
    j["layers"] = std::move(layers);
    j["truncated"] = p.truncated;
    j["metrics"] = detail::metrics_json(metrics(p));
    return j;
}

/// Rebuilds a protocol from JSON. The stored metrics must match the rebuilt
/// circuits. Throws FormatError on any inconsistency.
inline DetFtProtocol protocol_from_json(const Json &j) {
    try {
        if (j.value("format", "") != "detprep-protocol") throw FormatError("not a protocol file");
        DetFtProtocol p;
        p.code = code_from_json(j.at("code"));
        const size_t n = p.code.n;
        std::string mode = j.at("mode").get<std::string>();
        if (mode == "state") {
            p.mode = ReductionMode::State;
        } else if (mode == "code") {
            p.mode = ReductionMode::Code;
        } else {
            throw FormatError("unknown reduction mode '" + mode + "'");
        }
        p.early_exit = j.at("early_exit").get<bool>();
        p.width = j.at("width").get<size_t>();
        p.num_cbits = j.at("num_cbits").get<size_t>();
        p.truncated = j.value("truncated", false);
        if (p.width < n) throw FormatError("width is smaller than the code length");
        std::string prep_text;
        for (const auto &line : j.at("prep")) prep_text += line.get<std::string>() + "\n";
        p.prep = parse_circuit_text(prep_text, p.width, n, p.num_cbits);
        auto check_qubit = [&](size_t q) {
            if (q >= p.width) throw FormatError("qubit index out of range");
        };
        auto check_cbit = [&](size_t c) {
            if (c >= p.num_cbits) throw FormatError("cbit index out of range");
        };
        for (const auto &lj : j.at("layers")) {
            ProtocolLayer l;
            l.verification.error_kind = detail::kind_from_json(lj.at("error_kind"));
            l.verification.u = lj.at("u").get<size_t>();
            l.verification.v = lj.at("v").get<size_t>();
            l.verification.witnesses = detail::witnesses_from_json(lj.at("witnesses"));
            l.syndrome_cbits = lj.at("syndrome_cbits").get<std::vector<size_t>>();
            l.flag_cbits = lj.at("flag_cbits").get<std::vector<size_t>>();
            for (const auto &mj : lj.at("verification")) {
                auto m = detail::measurement_from_json(mj, n);
                check_qubit(m.ancilla);
                check_cbit(m.cbit);
                if (m.flagged) {
                    check_qubit(m.flag_ancilla);
                    check_cbit(m.flag_cbit);
                }
                auto order = mj.at("cnot_order").get<std::vector<size_t>>();
                MeasurementGadget g = make_gadget(m, order);
                check_gadget(g);
                l.verification.measurements.push_back(m);
                l.gadgets.push_back(std::move(g));
            }
            for (const char *key : {"branches", "flag_branches"}) {
                for (const auto &bj : lj.at(key)) {
                    ProtocolBranch pb;
                    pb.branch = detail::branch_from_json(bj, n, p.num_cbits);
                    for (const auto &m : pb.branch.measurements) {
                        check_qubit(m.ancilla);
                        check_cbit(m.cbit);
                    }
                    (std::string(key) == "branches" ? l.branches : l.flag_branches).push_back(std::move(pb));
                }
            }
            p.layers.push_back(std::move(l));
        }
        rebuild_circuits(p);
        if (j.contains("metrics")) {
            std::string stored = j.at("metrics").at("csv_row").get<std::string>();
            if (stored != metrics(p).csv_row()) throw FormatError("stored metrics do not match the protocol");
        }
        return p;
    } catch (const Json::exception &e) {
        throw FormatError(std::string("protocol JSON: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw FormatError(std::string("protocol JSON: ") + e.what());
    } catch (const std::out_of_range &e) {
        throw FormatError(std::string("protocol JSON: ") + e.what());
    }
}

inline Json sim_result_json(const SimResult &r) {
    Json j;
    j["p"] = r.p;
    j["shots"] = r.shots;
    j["errors"] = r.errors;
    j["ler"] = r.ler;
    j["ci"] = r.ci;
    j["ci_low"] = r.ci_low;
    j["ci_high"] = r.ci_high;
    j["interval"] = r.exact_interval ? "clopper-pearson" : "normal";
    return j;
}

inline Json noise_json(const NoiseModel &noise) {
    Json j;
    j["model"] = "depolarizing";
    j["single_qubit"] = noise.single_qubit;
    j["two_qubit"] = noise.two_qubit;
    j["measurement"] = noise.measurement;
    j["conditional"] = noise.conditional;
    return j;
}

inline std::string format_double(double x) {
    std::ostringstream out;
    out.precision(17);
    out << x;
    return out.str();
}

/// Results CSV: '#' header lines with seed and noise, then p,shots,errors,ler,ci.
inline std::string sim_results_csv(const std::vector<SimResult> &rs, uint64_t seed, const NoiseModel &noise) {
    std::ostringstream out;
    out << "# seed=" << seed << " noise=depolarizing single_qubit=" << noise.single_qubit
        << " two_qubit=" << noise.two_qubit << " measurement=" << noise.measurement
        << " conditional=" << noise.conditional << "\n";
    out << "p,shots,errors,ler,ci\n";
    for (const auto &r : rs) {
        out << format_double(r.p) << ',' << r.shots << ',' << r.errors << ',' << format_double(r.ler) << ','
            << format_double(r.ci) << '\n';
    }
    return out.str();
}

}  // namespace detprep
