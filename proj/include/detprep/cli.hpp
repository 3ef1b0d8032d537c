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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "detprep/catalog.hpp"
#include "detprep/json_io.hpp"
#include "detprep/protocol.hpp"
#include "detprep/simulation.hpp"

namespace detprep::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInputError = 1,  // I/O failure, unknown code, malformed input
    kInfeasible = 2,
    kTimeout = 3,  // partial result written
    kViolations = 4,
};

struct JobConfig {
    std::string command;
    std::string target;  // code name or file, or protocol file
    bool global = false;
    std::optional<double> budget;
    uint64_t seed = 1;
    std::vector<double> p_grid{1e-3, 3e-3, 1e-2};
    uint64_t shots = 100000;
    std::optional<uint64_t> target_errors;
    std::string out = "detprep_out";
    std::string reduction = "state";
    size_t jobs = 1;
};

/// Raised for bad inputs; mapped to kInputError.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << content;
    out.close();
    if (!out) throw InputError("cannot write '" + path.string() + "'");
}

inline std::filesystem::path prepare_out_dir(const std::string &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw InputError("cannot create output directory '" + dir + "'");
    // Probe writability before running any long computation.
    auto probe = std::filesystem::path(dir) / ".detprep_write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw InputError("output directory '" + dir + "' is not writable");
    }
    std::filesystem::remove(probe, ec);
    return dir;
}

/// A catalog name, or a path to a code JSON file.
inline CssCode load_code(const std::string &target) {
    auto names = catalog_names();
    if (std::find(names.begin(), names.end(), target) != names.end()) return catalog(target);
    if (!std::filesystem::exists(target)) throw InputError("unknown code '" + target + "'");
    try {
        return code_from_json(Json::parse(read_file(target)));
    } catch (const Json::exception &e) {
        throw InputError(std::string("malformed code file: ") + e.what());
    } catch (const FormatError &e) {
        throw InputError(e.what());
    }
}

inline DetFtProtocol load_protocol(const std::string &path) {
    std::string text = read_file(path);
    try {
        return protocol_from_json(Json::parse(text));
    } catch (const Json::exception &e) {
        throw InputError(std::string("malformed protocol file: ") + e.what());
    } catch (const FormatError &e) {
        throw InputError(e.what());
    }
}

inline ReductionMode parse_mode(const std::string &s) {
    if (s == "state") return ReductionMode::State;
    if (s == "code") return ReductionMode::Code;
    throw InputError("--reduction must be 'state' or 'code'");
}

inline std::string summary_text(const DetFtProtocol &p) {
    std::ostringstream out;
    out << p.code.name << " [[" << p.code.n << "," << p.code.k << "," << p.code.d << "]] (" << mode_name(p.mode)
        << " reduction)\n";
    out << metrics(p).summary();
    return out.str();
}

inline int cmd_synth(const JobConfig &cfg, std::ostream &out, std::ostream &err) {
    CssCode code = load_code(cfg.target);
    auto dir = prepare_out_dir(cfg.out);
    ProtocolOptions opts;
    opts.mode = parse_mode(cfg.reduction);
    opts.prep.mode = opts.mode;
    opts.prep.seed = cfg.seed;
    DetFtProtocol p;
    int status = kOk;
    try {
        if (cfg.global) {
            GlobalOptions g;
            g.protocol = opts;
            g.budget_seconds = cfg.budget;
            p = global_optimize(code, g);
            if (p.truncated) status = kTimeout;
        } else {
            if (cfg.budget) opts.synthesis.deadline = sat::deadline_after(*cfg.budget);
            p = assemble(code, opts);
        }
    } catch (const SynthesisInfeasible &e) {
        err << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const SynthesisTimeout &e) {
        err << "timeout: " << e.what() << "\n";
        return kTimeout;
    } catch (const ProtocolCheckFailed &e) {
        err << "internal error: " << e.what() << "\n";
        for (const auto &v : e.violations) err << "  " << v.describe() << "\n";
        return kViolations;
    }
    write_file(dir / "protocol.json", protocol_to_json(p).dump(2) + "\n");
    write_file(dir / "circuit.txt", protocol_text(p));
    write_file(dir / "metrics.csv", MetricsRow::csv_header() + "\n" + metrics(p).csv_row() + "\n");
    out << summary_text(p);
    out << "wrote " << (dir / "protocol.json").string() << ", circuit.txt, metrics.csv\n";
    if (status == kTimeout) err << "budget exhausted: result is the best protocol found so far\n";
    return status;
}

inline int cmd_check(const JobConfig &cfg, std::ostream &out, std::ostream &) {
    DetFtProtocol p = load_protocol(cfg.target);
    auto violations = exhaustive_single_fault_check(p);
    out << summary_text(p);
    if (violations.empty()) {
        out << "check passed: no single fault leaves a dangerous error\n";
        return kOk;
    }
    out << violations.size() << " violations\n";
    for (const auto &v : violations) out << "  " << v.describe() << "\n";
    return kViolations;
}

inline int cmd_simulate(const JobConfig &cfg, std::ostream &out, std::ostream &err) {
    DetFtProtocol p = load_protocol(cfg.target);
    if (cfg.p_grid.empty()) throw InputError("--p needs at least one value");
    if (cfg.shots == 0) throw InputError("--shots must be positive");
    auto dir = prepare_out_dir(cfg.out);
    NoiseModel noise;
    SimOptions so;
    so.seed = cfg.seed;
    so.shots = cfg.shots;
    so.target_errors = cfg.target_errors;
    so.jobs = cfg.jobs;
    std::vector<SimResult> results;
    for (double p_phys : cfg.p_grid) {
        noise.p = p_phys;
        try {
            noise.validate();
        } catch (const std::invalid_argument &e) {
            throw InputError(e.what());
        }
        results.push_back(estimate_ler(p, noise, so));
    }
    auto fit = fit_scaling(results);
    write_file(dir / "simulation.csv", sim_results_csv(results, cfg.seed, noise));
    Json j;
    j["code"] = p.code.name;
    j["seed"] = cfg.seed;
    j["noise"] = noise_json(noise);
    j["max_shots"] = cfg.shots;
    j["target_errors"] = cfg.target_errors ? Json(*cfg.target_errors) : Json(nullptr);
    Json rs = Json::array();
    for (const auto &r : results) rs.push_back(sim_result_json(r));
    j["results"] = std::move(rs);
    j["slope"] = fit.sufficient ? Json(fit.slope) : Json(nullptr);
    write_file(dir / "simulation.json", j.dump(2) + "\n");
    out << "p          shots        errors    ler          ci95\n";
    for (const auto &r : results) {
        out << format_double(r.p) << "  " << r.shots << "  " << r.errors << "  " << r.ler << "  " << r.ci << "\n";
    }
    if (fit.sufficient) {
        out << "slope " << fit.slope << " over " << fit.points << " points\n";
    } else {
        err << "warning: slope omitted, " << fit.message << "\n";
    }
    return kOk;
}

inline int cmd_codes(const JobConfig &cfg, std::ostream &out, std::ostream &) {
    if (cfg.target.empty() || cfg.target == "list") {
        for (const auto &name : catalog_names()) {
            auto c = catalog(name);
            out << name << " [[" << c.n << "," << c.k << "," << c.d << "]]\n";
        }
        return kOk;
    }
    CssCode c = load_code(cfg.target);
    out << c.name << " [[" << c.n << "," << c.k << "," << c.d << "]]\n";
    for (const auto &r : c.hx.rows()) out << "X " << r.str() << "\n";
    for (const auto &r : c.hz.rows()) out << "Z " << r.str() << "\n";
    for (const auto &r : c.lx.rows()) out << "LX " << r.str() << "\n";
    for (const auto &r : c.lz.rows()) out << "LZ " << r.str() << "\n";
    return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    CLI::App app{"Deterministic fault-tolerant state preparation synthesis"};
    app.require_subcommand(1);
    JobConfig cfg;
    std::string show_name;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--seed", cfg.seed, "64-bit seed for all randomness");
        sub->add_option("--out", cfg.out, "output directory");
        sub->add_option("--jobs", cfg.jobs, "worker thread cap")->check(CLI::PositiveNumber);
    };
    auto *synth = app.add_subcommand("synth", "synthesize a protocol for a code");
    synth->add_option("code", cfg.target, "catalog name or code JSON file")->required();
    synth->add_flag("--global", cfg.global, "search all optimal verifications");
    synth->add_option("--budget", cfg.budget, "time budget in seconds");
    synth->add_option("--reduction", cfg.reduction, "reduction group")->check(CLI::IsMember({"state", "code"}));
    add_common(synth);

    auto *check = app.add_subcommand("check", "exhaustive single-fault check of a protocol");
    check->add_option("protocol", cfg.target, "protocol JSON")->required();
    add_common(check);

    auto *simulate = app.add_subcommand("simulate", "Monte Carlo logical error rate");
    simulate->add_option("protocol", cfg.target, "protocol JSON")->required();
    simulate->add_option("--p", cfg.p_grid, "physical error rates")->delimiter(',');
    simulate->add_option("--shots", cfg.shots, "maximum shots per point");
    simulate->add_option("--target-errors", cfg.target_errors, "stop a point at this many logical errors");
    add_common(simulate);

    auto *codes = app.add_subcommand("codes", "list or show catalog codes");
    codes->add_option("action", cfg.target, "'list' or 'show'");
    codes->add_option("name", show_name, "code to show");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        app.exit(e, out, err);
        return kOk;
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return kInputError;
    }

    try {
        if (synth->parsed()) return cmd_synth(cfg, out, err);
        if (check->parsed()) return cmd_check(cfg, out, err);
        if (simulate->parsed()) return cmd_simulate(cfg, out, err);
        if (codes->parsed()) {
            if (cfg.target == "show") {
                if (show_name.empty()) throw InputError("codes show needs a code name");
                cfg.target = show_name;
            } else if (!cfg.target.empty() && cfg.target != "list") {
                throw InputError("codes action must be 'list' or 'show'");
            }
            return cmd_codes(cfg, out, err);
        }
    } catch (const InputError &e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::out_of_range &e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}

}  // namespace detprep::cli
