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
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "detprep/executor.hpp"

namespace detprep {

/// Circuit-level depolarizing noise. Each enabled location fails with
/// probability p: preparations, conditional Paulis and CNOTs draw a uniformly
/// random nontrivial Pauli on their support (3 or 15 choices), measurements
/// flip their outcome. Idle qubits are noiseless.
struct NoiseModel {
    double p = 0;
    bool single_qubit = true;
    bool two_qubit = true;
    bool measurement = true;
    bool conditional = true;

    void validate() const {
        if (!(p >= 0 && p <= 1)) throw std::invalid_argument("noise probability must lie in [0, 1]");
    }
};

/// splitmix64 stream. Shot i of seed s uses its own stream, so results do not
/// depend on how shots are scheduled over workers.
class ShotRng {
   public:
    explicit ShotRng(uint64_t state) : state_(state) {}
    static ShotRng for_shot(uint64_t seed, uint64_t shot) {
        ShotRng mix(seed);
        uint64_t base = mix.next();
        return ShotRng(base ^ (shot * 0xD1B54A32D192ED03ULL));
    }
    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return next() % n; }

   private:
    uint64_t state_;
};

/// Probability threshold on 64-bit draws: fires iff draw < threshold.
inline uint64_t bernoulli_threshold(double p) {
    if (p <= 0) return 0;
    if (p >= 1) return UINT64_MAX;
    return static_cast<uint64_t>(std::ldexp(p, 64));
}

struct ShotOutcome {
    bool logical_error = false;
    size_t faults = 0;
    BitVector data_x;  // residual before final EC
    BitVector data_z;
    Trace trace;
};

/// Samples one noisy run of the protocol followed by perfect lookup EC. A run
/// without faults must measure all zeros; anything else is a protocol bug.
inline ShotOutcome run_shot(const DetFtProtocol &p, const NoiseModel &noise, ShotRng &rng,
                            const LookupDecoder &decoder) {
    const uint64_t threshold = bernoulli_threshold(noise.p);
    const bool always = noise.p >= 1;
    size_t faults = 0;
    auto fires = [&]() { return always || (threshold && rng.next() < threshold); };
    GateHook hook = [&](size_t, size_t, const Gate &g, PauliFrame &frame) {
        switch (g.type) {
            case GateType::PrepZ:
            case GateType::PrepX:
            case GateType::CondPauli: {
                bool enabled = g.type == GateType::CondPauli ? noise.conditional : noise.single_qubit;
                if (!enabled || !fires()) return;
                ++faults;
                uint64_t k = 1 + rng.below(3);
                if (k & 1) frame.x.flip(g.q0);
                if (k & 2) frame.z.flip(g.q0);
                return;
            }
            case GateType::Cnot: {
                if (!noise.two_qubit || !fires()) return;
                ++faults;
                uint64_t k = 1 + rng.below(15);
                if (k & 1) frame.x.flip(g.q0);
                if (k & 2) frame.z.flip(g.q0);
                if (k & 4) frame.x.flip(g.q1);
                if (k & 8) frame.z.flip(g.q1);
                return;
            }
            case GateType::MeasZ:
            case GateType::MeasX:
                if (!noise.measurement || !fires()) return;
                ++faults;
                frame.cbits.flip(g.cbit);
                return;
        }
    };
    ShotOutcome out;
    out.trace = execute(p, hook);
    out.faults = faults;
    const size_t n = p.code.n;
    out.data_x = out.trace.frame.x.slice(0, n);
    out.data_z = out.trace.frame.z.slice(0, n);
    if (faults == 0 && (!out.trace.frame.cbits.is_zero() || !out.data_x.is_zero() || !out.data_z.is_zero())) {
        throw std::logic_error("noiseless run produced a nonzero measurement or residual");
    }
    out.logical_error = logical_error_after_ec(p.code, decoder, out.data_x);
    return out;
}

/// Two-sided 95% Clopper-Pearson interval for k successes in n trials, from
/// beta quantiles.
inline std::pair<double, double> clopper_pearson(uint64_t k, uint64_t n, double alpha = 0.05) {
    if (n == 0) return {0, 1};
    if (k > n) throw std::invalid_argument("clopper_pearson: k > n");
    double kd = double(k), nd = double(n);
    double lower = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1, alpha / 2);
    double upper = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1, nd - kd, 1 - alpha / 2);
    return {lower, upper};
}

struct SimResult {
    double p = 0;
    uint64_t shots = 0;
    uint64_t errors = 0;
    double ler = 0;
    double ci = 0;  // 95% half-width
    double ci_low = 0;
    double ci_high = 0;
    bool exact_interval = false;
};

/// Fills ler and the 95% interval: normal approximation 1.96 sqrt(ler (1 - ler) / shots),
/// or Clopper-Pearson when fewer than 20 errors were seen.
inline void finish_result(SimResult &r) {
    r.ler = r.shots ? double(r.errors) / double(r.shots) : 0;
    if (r.errors < 20) {
        auto [lo, hi] = clopper_pearson(r.errors, r.shots);
        r.ci_low = lo;
        r.ci_high = hi;
        r.ci = 0.5 * (hi - lo);
        r.exact_interval = true;
    } else {
        r.ci = 1.96 * std::sqrt(r.ler * (1 - r.ler) / double(r.shots));
        r.ci_low = std::max(0.0, r.ler - r.ci);
        r.ci_high = std::min(1.0, r.ler + r.ci);
        r.exact_interval = false;
    }
}

struct SimOptions {
    uint64_t seed = 1;
    uint64_t shots = 100000;                 // maximum number of shots
    std::optional<uint64_t> target_errors;  // stop once reached
    size_t jobs = 1;
    uint64_t block = 4096;  // shots per scheduling block
};

/// Monte Carlo logical error rate. Shots run in blocks spread over `jobs`
/// threads; results are scanned in shot order, so the stopping point and all
/// counts are identical for any job count.
inline SimResult estimate_ler(const DetFtProtocol &p, const NoiseModel &noise, const SimOptions &opts) {
    noise.validate();
    if (opts.shots == 0) throw std::invalid_argument("estimate_ler: shots must be positive");
    auto decoder = build_lookup_decoder(p.code, PauliKind::X);
    SimResult r;
    r.p = noise.p;
    size_t jobs = std::max<size_t>(1, opts.jobs);
    uint64_t block = std::max<uint64_t>(1, opts.block);
    std::vector<uint8_t> hits;
    uint64_t next = 0;
    bool done = false;
    while (!done && next < opts.shots) {
        uint64_t count = std::min<uint64_t>(block * jobs, opts.shots - next);
        hits.assign(count, 0);
        auto work = [&](size_t worker) {
            for (uint64_t i = worker; i < count; i += jobs) {
                ShotRng rng = ShotRng::for_shot(opts.seed, next + i);
                hits[i] = run_shot(p, noise, rng, decoder).logical_error;
            }
        };
        if (jobs == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (size_t w = 0; w < jobs; ++w) pool.emplace_back(work, w);
            for (auto &t : pool) t.join();
        }
        for (uint64_t i = 0; i < count; ++i) {
            ++r.shots;
            r.errors += hits[i];
            if (opts.target_errors && r.errors >= *opts.target_errors) {
                done = true;
                break;
            }
        }
        next += count;
    }
    finish_result(r);
    return r;
}

struct ScalingFit {
    double slope = 0;
    double intercept = 0;  // log(ler) at log(p) = 0
    size_t points = 0;
    bool sufficient = false;
    std::string message;
};

/// Least-squares slope of log(ler) against log(p). Needs at least three points
/// with p > 0 and at least `min_errors` logical errors each.
inline ScalingFit fit_scaling(const std::vector<SimResult> &results, uint64_t min_errors = 10) {
    ScalingFit fit;
    std::vector<std::pair<double, double>> pts;
    for (const auto &r : results) {
        if (r.p > 0 && r.errors >= min_errors && r.ler > 0) pts.push_back({std::log(r.p), std::log(r.ler)});
    }
    fit.points = pts.size();
    if (pts.size() < 3) {
        fit.message = "insufficient statistics: need 3 points with at least " + std::to_string(min_errors) +
                      " logical errors, have " + std::to_string(pts.size());
        return fit;
    }
    double mx = 0, my = 0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= double(pts.size());
    my /= double(pts.size());
    double sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0) {
        fit.message = "insufficient statistics: all points share one p";
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.sufficient = true;
    return fit;
}

}  // namespace detprep
