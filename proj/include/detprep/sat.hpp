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
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace detprep::sat {

/// DIMACS literal: +v or -v for variable v >= 1.
using Lit = int;

inline int var_of(Lit l) { return std::abs(l); }

/// CNF formula builder. Variables are dense and 1-based.
class CnfInstance {
   public:
    int num_vars() const { return num_vars_; }
    size_t num_clauses() const { return clauses_.size(); }
    const std::vector<std::vector<Lit>> &clauses() const { return clauses_; }
    /// True once an empty clause has been added (the formula is trivially unsat).
    bool has_empty_clause() const { return has_empty_clause_; }

    int new_var(const std::string &group = {}) {
        ++num_vars_;
        if (!group.empty()) groups_[group].push_back(num_vars_);
        return num_vars_;
    }
    std::vector<int> new_vars(size_t count, const std::string &group = {}) {
        std::vector<int> out;
        for (size_t i = 0; i < count; ++i) out.push_back(new_var(group));
        return out;
    }
    const std::vector<int> &group(const std::string &name) const {
        static const std::vector<int> none;
        auto it = groups_.find(name);
        return it == groups_.end() ? none : it->second;
    }

    /// A literal fixed to true by a unit clause.
    Lit true_lit() {
        if (!true_var_) {
            true_var_ = new_var("const");
            add_clause({true_var_});
        }
        return true_var_;
    }
    Lit false_lit() { return -true_lit(); }

    void add_clause(std::vector<Lit> clause) {
        for (Lit l : clause) {
            if (l == 0 || var_of(l) > num_vars_) throw std::out_of_range("clause literal out of range");
        }
        if (clause.empty()) has_empty_clause_ = true;
        clauses_.push_back(std::move(clause));
    }

    /// Literal equal to the XOR of `lits` (chained Tseitin definitions).
    Lit xor_of(const std::vector<Lit> &lits) {
        if (lits.empty()) return false_lit();
        Lit acc = lits[0];
        for (size_t i = 1; i < lits.size(); ++i) {
            Lit b = lits[i];
            Lit t = new_var("xor");
            add_clause({-t, acc, b});
            add_clause({-t, -acc, -b});
            add_clause({t, -acc, b});
            add_clause({t, acc, -b});
            acc = t;
        }
        return acc;
    }

    /// Enforces XOR(lits) = constant.
    void add_xor(const std::vector<Lit> &lits, bool constant) {
        if (lits.empty()) {
            if (constant) add_clause({});
            return;
        }
        Lit x = xor_of(lits);
        add_clause({constant ? x : -x});
    }

    /// Literal equal to the AND of `lits`.
    Lit and_of(const std::vector<Lit> &lits) {
        if (lits.empty()) return true_lit();
        if (lits.size() == 1) return lits[0];
        Lit t = new_var("and");
        std::vector<Lit> back{t};
        for (Lit l : lits) {
            add_clause({-t, l});
            back.push_back(-l);
        }
        add_clause(back);
        return t;
    }

    /// At most `k` of `lits` are true (sequential counter).
    void add_at_most(const std::vector<Lit> &lits, size_t k) {
        size_t n = lits.size();
        if (k >= n) return;
        if (k == 0) {
            for (Lit l : lits) add_clause({-l});
            return;
        }
        // s[i][j]: at least j+1 of lits[0..i] are true.
        std::vector<std::vector<Lit>> s(n - 1, std::vector<Lit>(k));
        for (auto &row : s) {
            for (auto &v : row) v = new_var("card");
        }
        add_clause({-lits[0], s[0][0]});
        for (size_t j = 1; j < k; ++j) add_clause({-s[0][j]});
        for (size_t i = 1; i + 1 < n; ++i) {
            add_clause({-lits[i], s[i][0]});
            add_clause({-s[i - 1][0], s[i][0]});
            for (size_t j = 1; j < k; ++j) {
                add_clause({-lits[i], -s[i - 1][j - 1], s[i][j]});
                add_clause({-s[i - 1][j], s[i][j]});
            }
            add_clause({-lits[i], -s[i - 1][k - 1]});
        }
        add_clause({-lits[n - 1], -s[n - 2][k - 1]});
    }

    /// DIMACS CNF text.
    std::string dimacs() const {
        std::ostringstream out;
        out << "p cnf " << num_vars_ << ' ' << clauses_.size() << '\n';
        for (const auto &c : clauses_) {
            for (Lit l : c) out << l << ' ';
            out << "0\n";
        }
        return out.str();
    }

   private:
    int num_vars_ = 0;
    int true_var_ = 0;
    bool has_empty_clause_ = false;
    std::vector<std::vector<Lit>> clauses_;
    std::map<std::string, std::vector<int>> groups_;
};

/// Value of literal `l` under `assignment` (indexed by variable, slot 0 unused).
inline bool lit_value(const std::vector<bool> &assignment, Lit l) {
    bool v = assignment.at(static_cast<size_t>(var_of(l)));
    return l > 0 ? v : !v;
}

/// Independent clause-by-clause check of an assignment.
inline bool satisfies(const CnfInstance &inst, const std::vector<bool> &assignment) {
    if (assignment.size() != static_cast<size_t>(inst.num_vars()) + 1) return false;
    for (const auto &c : inst.clauses()) {
        bool sat = false;
        for (Lit l : c) {
            if (lit_value(assignment, l)) {
                sat = true;
                break;
            }
        }
        if (!sat) return false;
    }
    return true;
}

enum class Status { Sat, Unsat, Timeout };

inline const char *status_name(Status s) {
    switch (s) {
        case Status::Sat: return "sat";
        case Status::Unsat: return "unsat";
        case Status::Timeout: return "timeout";
    }
    return "?";
}

struct SolveOutcome {
    Status status = Status::Unsat;
    std::vector<bool> assignment;  // slot 0 unused; empty unless sat

    bool sat() const { return status == Status::Sat; }
    bool value(Lit l) const { return lit_value(assignment, l); }
};

using Budget = std::optional<std::chrono::steady_clock::time_point>;

inline Budget deadline_after(std::optional<double> seconds) {
    if (!seconds) return std::nullopt;
    return std::chrono::steady_clock::now() +
           std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(*seconds));
}

/// Conflict-driven clause-learning solver: two watched literals, VSIDS with
/// phase saving, first-UIP learning, Luby restarts. Fully deterministic.
class Solver {
   public:
    explicit Solver(const CnfInstance &inst) { load(inst); }

    void add_clause(const std::vector<Lit> &clause) {
        cancel_until(0);
        std::vector<int> lits;
        for (Lit l : clause) {
            ensure_var(var_of(l));
            lits.push_back(to_internal(l));
        }
        add_internal(std::move(lits));
    }

    SolveOutcome solve(const std::vector<Lit> &assumptions = {}, Budget deadline = std::nullopt) {
        SolveOutcome out;
        if (!ok_) return out;
        assumptions_.clear();
        for (Lit l : assumptions) {
            ensure_var(var_of(l));
            assumptions_.push_back(to_internal(l));
        }
        deadline_ = deadline;
        size_t restart = 0;
        while (true) {
            size_t limit = 100 * luby(restart++);
            Status st;
            int r = search(limit, st);
            if (r == 0) continue;  // restart
            cancel_until(0);
            out.status = st;
            if (st == Status::Sat) out.assignment = model_;
            return out;
        }
    }

   private:
    static constexpr int8_t kTrue = 1, kFalse = 0, kUndef = 2;

    struct Clause {
        std::vector<int> lits;
        bool learnt = false;
        bool deleted = false;
        double activity = 0;
    };

    static int to_internal(Lit l) { return 2 * (var_of(l) - 1) + (l < 0 ? 1 : 0); }
    static int var_i(int lit) { return lit >> 1; }

    int8_t value(int lit) const {
        int8_t a = assigns_[var_i(lit)];
        if (a == kUndef) return kUndef;
        return (lit & 1) ? static_cast<int8_t>(1 - a) : a;
    }

    void ensure_var(int v) {
        while (static_cast<int>(assigns_.size()) < v) {
            int idx = static_cast<int>(assigns_.size());
            assigns_.push_back(kUndef);
            level_.push_back(0);
            reason_.push_back(-1);
            activity_.push_back(0);
            polarity_.push_back(1);  // prefer false
            seen_.push_back(0);
            watches_.emplace_back();
            watches_.emplace_back();
            heap_pos_.push_back(-1);
            heap_insert(idx);
        }
    }

    void load(const CnfInstance &inst) {
        ensure_var(inst.num_vars());
        for (const auto &c : inst.clauses()) {
            std::vector<int> lits;
            for (Lit l : c) lits.push_back(to_internal(l));
            add_internal(std::move(lits));
            if (!ok_) return;
        }
    }

    void add_internal(std::vector<int> lits) {
        if (!ok_) return;
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        std::vector<int> kept;
        for (size_t i = 0; i < lits.size(); ++i) {
            if (i + 1 < lits.size() && lits[i + 1] == (lits[i] ^ 1)) return;  // tautology
            int8_t v = value(lits[i]);
            if (v == kTrue && level_[var_i(lits[i])] == 0) return;
            if (v == kFalse && level_[var_i(lits[i])] == 0) continue;
            kept.push_back(lits[i]);
        }
        if (kept.empty()) {
            ok_ = false;
            return;
        }
        if (kept.size() == 1) {
            enqueue(kept[0], -1);
            if (propagate() != -1) ok_ = false;
            return;
        }
        int cr = static_cast<int>(clauses_.size());
        clauses_.push_back(Clause{std::move(kept), false, false, 0});
        attach(cr);
    }

    void attach(int cr) {
        const auto &c = clauses_[cr].lits;
        watches_[c[0]].push_back(cr);
        watches_[c[1]].push_back(cr);
    }

    void enqueue(int lit, int reason) {
        int v = var_i(lit);
        assigns_[v] = (lit & 1) ? kFalse : kTrue;
        level_[v] = decision_level();
        reason_[v] = reason;
        trail_.push_back(lit);
    }

    int decision_level() const { return static_cast<int>(trail_lim_.size()); }

    int propagate() {
        while (qhead_ < trail_.size()) {
            int p = trail_[qhead_++];
            int false_lit = p ^ 1;
            auto &ws = watches_[false_lit];
            size_t i = 0, j = 0;
            while (i < ws.size()) {
                int cr = ws[i++];
                Clause &c = clauses_[cr];
                if (c.deleted) continue;
                auto &lits = c.lits;
                if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
                if (value(lits[0]) == kTrue) {
                    ws[j++] = cr;
                    continue;
                }
                bool moved = false;
                for (size_t k = 2; k < lits.size(); ++k) {
                    if (value(lits[k]) != kFalse) {
                        std::swap(lits[1], lits[k]);
                        watches_[lits[1]].push_back(cr);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[j++] = cr;
                if (value(lits[0]) == kFalse) {
                    while (i < ws.size()) ws[j++] = ws[i++];
                    ws.resize(j);
                    qhead_ = trail_.size();
                    return cr;
                }
                enqueue(lits[0], cr);
            }
            ws.resize(j);
        }
        return -1;
    }

    void cancel_until(int lvl) {
        if (decision_level() <= lvl) return;
        for (size_t c = trail_.size(); c > static_cast<size_t>(trail_lim_[lvl]); --c) {
            int v = var_i(trail_[c - 1]);
            polarity_[v] = static_cast<int8_t>(trail_[c - 1] & 1);
            assigns_[v] = kUndef;
            reason_[v] = -1;
            if (heap_pos_[v] < 0) heap_insert(v);
        }
        trail_.resize(trail_lim_[lvl]);
        trail_lim_.resize(lvl);
        qhead_ = trail_.size();
    }

    void bump_var(int v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (auto &a : activity_) a *= 1e-100;
            var_inc_ *= 1e-100;
        }
        if (heap_pos_[v] >= 0) heap_up(heap_pos_[v]);
    }
    void bump_clause(Clause &c) {
        c.activity += cla_inc_;
        if (c.activity > 1e20) {
            for (auto &cl : clauses_) {
                if (cl.learnt) cl.activity *= 1e-20;
            }
            cla_inc_ *= 1e-20;
        }
    }

    void analyze(int confl, std::vector<int> &learnt, int &bt_level) {
        learnt.assign(1, 0);
        int path = 0;
        int p = -1;
        size_t idx = trail_.size();
        do {
            Clause &c = clauses_[confl];
            if (c.learnt) bump_clause(c);
            for (size_t k = (p == -1 ? 0 : 1); k < c.lits.size(); ++k) {
                int q = c.lits[k];
                int v = var_i(q);
                if (!seen_[v] && level_[v] > 0) {
                    bump_var(v);
                    seen_[v] = 1;
                    if (level_[v] >= decision_level()) {
                        ++path;
                    } else {
                        learnt.push_back(q);
                    }
                }
            }
            while (!seen_[var_i(trail_[--idx])]) {
            }
            p = trail_[idx];
            confl = reason_[var_i(p)];
            seen_[var_i(p)] = 0;
            --path;
        } while (path > 0);
        learnt[0] = p ^ 1;

        // Drop literals implied by other literals of the clause.
        std::vector<int> cleanup(learnt.begin(), learnt.end());
        size_t keep = 1;
        for (size_t k = 1; k < learnt.size(); ++k) {
            int v = var_i(learnt[k]);
            int r = reason_[v];
            bool redundant = r != -1;
            if (redundant) {
                for (int q : clauses_[r].lits) {
                    int u = var_i(q);
                    if (u != v && !seen_[u] && level_[u] > 0) {
                        redundant = false;
                        break;
                    }
                }
            }
            if (!redundant) learnt[keep++] = learnt[k];
        }
        learnt.resize(keep);
        for (int l : cleanup) seen_[var_i(l)] = 0;

        bt_level = 0;
        if (learnt.size() > 1) {
            size_t max_i = 1;
            for (size_t k = 2; k < learnt.size(); ++k) {
                if (level_[var_i(learnt[k])] > level_[var_i(learnt[max_i])]) max_i = k;
            }
            std::swap(learnt[1], learnt[max_i]);
            bt_level = level_[var_i(learnt[1])];
        }
    }

    bool out_of_time() const { return deadline_ && std::chrono::steady_clock::now() > *deadline_; }

    void reduce_db() {
        std::vector<int> learnts;
        for (size_t i = 0; i < clauses_.size(); ++i) {
            const Clause &c = clauses_[i];
            if (c.learnt && !c.deleted && c.lits.size() > 2) learnts.push_back(static_cast<int>(i));
        }
        std::sort(learnts.begin(), learnts.end(), [&](int a, int b) {
            if (clauses_[a].activity != clauses_[b].activity) return clauses_[a].activity < clauses_[b].activity;
            return a < b;
        });
        for (size_t i = 0; i < learnts.size() / 2; ++i) {
            Clause &c = clauses_[learnts[i]];
            int v = var_i(c.lits[0]);
            bool locked = reason_[v] == learnts[i] && value(c.lits[0]) == kTrue;
            if (!locked) c.deleted = true;
        }
        for (auto &ws : watches_) {
            ws.erase(std::remove_if(ws.begin(), ws.end(), [&](int cr) { return clauses_[cr].deleted; }), ws.end());
        }
        max_learnts_ *= 1.1;
    }

    // Returns 0 to request a restart, 1 when finished (status in `st`).
    int search(size_t conflict_limit, Status &st) {
        size_t conflicts = 0;
        std::vector<int> learnt;
        while (true) {
            int confl = propagate();
            if (confl != -1) {
                ++conflicts;
                ++total_conflicts_;
                if (decision_level() == 0) {
                    ok_ = false;
                    st = Status::Unsat;
                    return 1;
                }
                int bt = 0;
                analyze(confl, learnt, bt);
                cancel_until(bt);
                if (learnt.size() == 1) {
                    enqueue(learnt[0], -1);
                } else {
                    int cr = static_cast<int>(clauses_.size());
                    clauses_.push_back(Clause{learnt, true, false, 0});
                    bump_clause(clauses_.back());
                    attach(cr);
                    enqueue(learnt[0], cr);
                    ++num_learnts_;
                }
                var_inc_ /= 0.95;
                cla_inc_ /= 0.999;
                if ((total_conflicts_ & 63) == 0 && out_of_time()) {
                    st = Status::Timeout;
                    return 1;
                }
                continue;
            }
            if (conflicts >= conflict_limit) {
                cancel_until(0);
                return 0;
            }
            if (static_cast<double>(num_learnts_) > max_learnts_ + static_cast<double>(trail_.size())) {
                reduce_db();
                num_learnts_ /= 2;
            }
            int next = -1;
            while (decision_level() < static_cast<int>(assumptions_.size())) {
                int p = assumptions_[decision_level()];
                if (value(p) == kTrue) {
                    trail_lim_.push_back(static_cast<int>(trail_.size()));
                } else if (value(p) == kFalse) {
                    st = Status::Unsat;
                    return 1;
                } else {
                    next = p;
                    break;
                }
            }
            if (next == -1) {
                int v = pick_branch_var();
                if (v < 0) {
                    model_.assign(assigns_.size() + 1, false);
                    for (size_t i = 0; i < assigns_.size(); ++i) model_[i + 1] = assigns_[i] == kTrue;
                    st = Status::Sat;
                    return 1;
                }
                next = 2 * v + polarity_[v];
            }
            if ((++decisions_ & 1023) == 0 && out_of_time()) {
                st = Status::Timeout;
                return 1;
            }
            trail_lim_.push_back(static_cast<int>(trail_.size()));
            enqueue(next, -1);
        }
    }

    static size_t luby(size_t i) {
        size_t size = 1, seq = 0;
        while (size < i + 1) {
            ++seq;
            size = 2 * size + 1;
        }
        size_t x = i;
        while (size - 1 != x) {
            size = (size - 1) >> 1;
            --seq;
            x = x % size;
        }
        return size_t{1} << seq;
    }

    int pick_branch_var() {
        while (!heap_.empty()) {
            int v = heap_pop();
            if (assigns_[v] == kUndef) return v;
        }
        return -1;
    }

    // Max-heap on activity; ties broken by lower variable index.
    bool heap_less(int a, int b) const {
        if (activity_[a] != activity_[b]) return activity_[a] > activity_[b];
        return a < b;
    }
    void heap_insert(int v) {
        heap_pos_[v] = static_cast<int>(heap_.size());
        heap_.push_back(v);
        heap_up(heap_pos_[v]);
    }
    void heap_up(int i) {
        int v = heap_[i];
        while (i > 0) {
            int parent = (i - 1) / 2;
            if (!heap_less(v, heap_[parent])) break;
            heap_[i] = heap_[parent];
            heap_pos_[heap_[i]] = i;
            i = parent;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }
    void heap_down(int i) {
        int v = heap_[i];
        int n = static_cast<int>(heap_.size());
        while (true) {
            int child = 2 * i + 1;
            if (child >= n) break;
            if (child + 1 < n && heap_less(heap_[child + 1], heap_[child])) ++child;
            if (!heap_less(heap_[child], v)) break;
            heap_[i] = heap_[child];
            heap_pos_[heap_[i]] = i;
            i = child;
        }
        heap_[i] = v;
        heap_pos_[v] = i;
    }
    int heap_pop() {
        int top = heap_[0];
        heap_pos_[top] = -1;
        int last = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_[0] = last;
            heap_pos_[last] = 0;
            heap_down(0);
        }
        return top;
    }

    bool ok_ = true;
    std::vector<Clause> clauses_;
    std::vector<std::vector<int>> watches_;
    std::vector<int8_t> assigns_;
    std::vector<int> level_;
    std::vector<int> reason_;
    std::vector<double> activity_;
    std::vector<int8_t> polarity_;
    std::vector<char> seen_;
    std::vector<int> heap_;
    std::vector<int> heap_pos_;
    std::vector<int> trail_;
    std::vector<int> trail_lim_;
    std::vector<int> assumptions_;
    std::vector<bool> model_;
    size_t qhead_ = 0;
    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    double max_learnts_ = 4000;
    size_t num_learnts_ = 0;
    size_t total_conflicts_ = 0;
    size_t decisions_ = 0;
    Budget deadline_;
};

/// Solves `inst`; a sat outcome is re-checked clause by clause before return.
inline SolveOutcome solve(const CnfInstance &inst, const std::vector<Lit> &assumptions = {},
                          Budget deadline = std::nullopt) {
    if (inst.has_empty_clause()) return SolveOutcome{Status::Unsat, {}};
    Solver s(inst);
    SolveOutcome out = s.solve(assumptions, deadline);
    if (out.sat()) {
        out.assignment.resize(static_cast<size_t>(inst.num_vars()) + 1);
        if (!satisfies(inst, out.assignment)) throw std::logic_error("solver returned a non-satisfying assignment");
    }
    return out;
}

struct Enumeration {
    std::vector<std::vector<bool>> projections;  // values of the projection vars, in order
    std::vector<std::vector<bool>> models;       // full assignments
    bool truncated = false;
    bool timed_out = false;
};

/// All satisfying assignments that differ on `projection`, by repeated solving
/// with blocking clauses. Stops after `limit` solutions (flagged as truncated).
inline Enumeration enumerate(const CnfInstance &inst, const std::vector<int> &projection, size_t limit,
                             Budget deadline = std::nullopt) {
    Enumeration out;
    if (inst.has_empty_clause()) return out;
    for (int v : projection) {
        if (v < 1 || v > inst.num_vars()) throw std::out_of_range("projection variable outside instance");
    }
    Solver s(inst);
    while (true) {
        SolveOutcome r = s.solve({}, deadline);
        if (r.status == Status::Timeout) {
            out.timed_out = true;
            out.truncated = true;
            return out;
        }
        if (!r.sat()) return out;
        r.assignment.resize(static_cast<size_t>(inst.num_vars()) + 1);
        if (!satisfies(inst, r.assignment)) throw std::logic_error("solver returned a non-satisfying assignment");
        if (out.projections.size() == limit) {
            out.truncated = true;
            return out;
        }
        std::vector<bool> proj;
        std::vector<Lit> block;
        for (int v : projection) {
            bool val = r.assignment[static_cast<size_t>(v)];
            proj.push_back(val);
            block.push_back(val ? -v : v);
        }
        out.projections.push_back(std::move(proj));
        out.models.push_back(std::move(r.assignment));
        if (block.empty()) return out;
        s.add_clause(block);
    }
}

}  // namespace detprep::sat
