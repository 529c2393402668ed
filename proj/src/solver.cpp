#include "bnncnf/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace bnncnf {

Solver::Solver(const CnfFormula& f) { add_formula(f); }

void Solver::ensure_vars(int n) {
    if (n > num_vars())
        new_vars_to(static_cast<size_t>(n));
}

void Solver::new_vars_to(size_t n) {
    size_t old = assigns_.size();
    assigns_.resize(n, 0);
    reason_.resize(n, -1);
    level_.resize(n, 0);
    activity_.resize(n, 0.0);
    polarity_.resize(n, 1);  // default phase: false
    seen_.resize(n, 0);
    watches_.resize(n * 2);
    heap_pos_.resize(n, -1);
    for (size_t v = old; v < n; ++v)
        heap_insert(static_cast<int>(v));
}

void Solver::add_formula(const CnfFormula& f) {
    ensure_vars(f.num_vars);
    for (const Clause& c : f.clauses)
        if (!add_clause(c))
            return;
}

bool Solver::add_clause(std::vector<Lit> lits) {
    if (!ok_)
        return false;
    assert(decision_level() == 0);
    std::vector<int> ilits;
    ilits.reserve(lits.size());
    for (Lit l : lits) {
        if (l == 0)
            throw std::invalid_argument("add_clause: literal 0");
        ensure_vars(std::abs(l));
        ilits.push_back(toInternal(l));
    }
    std::sort(ilits.begin(), ilits.end());
    ilits.erase(std::unique(ilits.begin(), ilits.end()), ilits.end());
    std::vector<int> kept;
    for (size_t i = 0; i < ilits.size(); ++i) {
        if (i + 1 < ilits.size() && ilits[i + 1] == neg(ilits[i]))
            return true;  // tautology
        uint8_t v = value(ilits[i]);
        if (v == 1 && level_[static_cast<size_t>(var(ilits[i]))] == 0)
            return true;  // satisfied at level 0
        if (v == 2 && level_[static_cast<size_t>(var(ilits[i]))] == 0)
            continue;  // falsified at level 0
        kept.push_back(ilits[i]);
    }
    if (kept.empty()) {
        ok_ = false;
        return false;
    }
    if (kept.size() == 1) {
        if (!enqueue(kept[0], -1) || propagate() != kNoClause)
            ok_ = false;
        return ok_;
    }
    uint32_t cref = static_cast<uint32_t>(clauses_.size());
    clauses_.push_back({std::move(kept), 0.0f, false, false});
    attach(cref);
    return true;
}

void Solver::attach(uint32_t cref) {
    const InternalClause& c = clauses_[cref];
    assert(c.lits.size() >= 2);
    watches_[static_cast<size_t>(c.lits[0])].push_back({cref, c.lits[1]});
    watches_[static_cast<size_t>(c.lits[1])].push_back({cref, c.lits[0]});
}

bool Solver::enqueue(int lit, int32_t reason) {
    uint8_t v = value(lit);
    if (v != 0)
        return v == 1;
    size_t x = static_cast<size_t>(var(lit));
    assigns_[x] = (lit & 1) ? 2 : 1;
    reason_[x] = reason;
    level_[x] = decision_level();
    trail_.push_back(lit);
    return true;
}

uint32_t Solver::propagate() {
    while (qhead_ < trail_.size()) {
        int p = trail_[qhead_++];
        ++propagations_;
        int false_lit = neg(p);
        std::vector<Watcher>& ws = watches_[static_cast<size_t>(false_lit)];
        size_t i = 0, j = 0;
        while (i < ws.size()) {
            Watcher w = ws[i++];
            if (value(w.blocker) == 1) {
                ws[j++] = w;
                continue;
            }
            InternalClause& c = clauses_[w.cref];
            if (c.removed)
                continue;  // lazily dropped
            if (c.lits[0] == false_lit)
                std::swap(c.lits[0], c.lits[1]);
            assert(c.lits[1] == false_lit);
            if (value(c.lits[0]) == 1) {
                ws[j++] = {w.cref, c.lits[0]};
                continue;
            }
            bool moved = false;
            for (size_t k = 2; k < c.lits.size(); ++k) {
                if (value(c.lits[k]) != 2) {
                    std::swap(c.lits[1], c.lits[k]);
                    watches_[static_cast<size_t>(c.lits[1])].push_back({w.cref, c.lits[0]});
                    moved = true;
                    break;
                }
            }
            if (moved)
                continue;
            // Clause is unit or conflicting.
            ws[j++] = w;
            if (value(c.lits[0]) == 2) {
                while (i < ws.size())
                    ws[j++] = ws[i++];
                ws.resize(j);
                qhead_ = trail_.size();
                return w.cref;
            }
            enqueue(c.lits[0], static_cast<int32_t>(w.cref));
        }
        ws.resize(j);
    }
    return kNoClause;
}

void Solver::analyze(uint32_t confl, std::vector<int>& learnt, int& bt_level) {
    learnt.clear();
    learnt.push_back(0);  // placeholder for the asserting literal
    std::vector<int> to_clear;
    int path = 0;
    int p = -1;
    size_t index = trail_.size();
    uint32_t creason = confl;
    do {
        InternalClause& c = clauses_[creason];
        if (c.learnt)
            bump_clause(c);
        for (size_t k = (p == -1 ? 0 : 1); k < c.lits.size(); ++k) {
            int q = c.lits[k];
            size_t vq = static_cast<size_t>(var(q));
            if (!seen_[vq] && level_[vq] > 0) {
                seen_[vq] = 1;
                to_clear.push_back(static_cast<int>(vq));
                bump_var(static_cast<int>(vq));
                if (level_[vq] >= decision_level())
                    ++path;
                else
                    learnt.push_back(q);
            }
        }
        while (!seen_[static_cast<size_t>(var(trail_[index - 1]))])
            --index;
        --index;
        p = trail_[index];
        seen_[static_cast<size_t>(var(p))] = 0;
        --path;
        if (path > 0) {
            assert(reason_[static_cast<size_t>(var(p))] >= 0);
            creason = static_cast<uint32_t>(reason_[static_cast<size_t>(var(p))]);
        }
    } while (path > 0);
    learnt[0] = neg(p);

    // Cheap self-subsumption: drop literals whose reason is fully seen.
    size_t out = 1;
    for (size_t k = 1; k < learnt.size(); ++k) {
        size_t vq = static_cast<size_t>(var(learnt[k]));
        bool redundant = false;
        if (reason_[vq] >= 0) {
            redundant = true;
            const InternalClause& rc = clauses_[static_cast<size_t>(reason_[vq])];
            for (int q : rc.lits) {
                size_t vr = static_cast<size_t>(var(q));
                if (vr == vq)
                    continue;
                if (!seen_[vr] && level_[vr] > 0) {
                    redundant = false;
                    break;
                }
            }
        }
        if (!redundant)
            learnt[out++] = learnt[k];
    }
    learnt.resize(out);

    if (learnt.size() == 1) {
        bt_level = 0;
    } else {
        size_t max_i = 1;
        for (size_t k = 2; k < learnt.size(); ++k)
            if (level_[static_cast<size_t>(var(learnt[k]))] >
                level_[static_cast<size_t>(var(learnt[max_i]))])
                max_i = k;
        std::swap(learnt[1], learnt[max_i]);
        bt_level = level_[static_cast<size_t>(var(learnt[1]))];
    }
    for (int v : to_clear)
        seen_[static_cast<size_t>(v)] = 0;
}

void Solver::backtrack(int target) {
    if (decision_level() <= target)
        return;
    size_t lim = static_cast<size_t>(trail_lim_[static_cast<size_t>(target)]);
    for (size_t i = trail_.size(); i-- > lim;) {
        int lit = trail_[i];
        size_t v = static_cast<size_t>(var(lit));
        polarity_[v] = static_cast<uint8_t>(lit & 1);
        assigns_[v] = 0;
        reason_[v] = -1;
        if (heap_pos_[v] < 0)
            heap_insert(static_cast<int>(v));
    }
    trail_.resize(lim);
    trail_lim_.resize(static_cast<size_t>(target));
    qhead_ = trail_.size();
}

bool Solver::heap_less(int a, int b) const {
    // "better" ordering: higher activity first, then lower index.
    return activity_[static_cast<size_t>(a)] > activity_[static_cast<size_t>(b)] ||
           (activity_[static_cast<size_t>(a)] == activity_[static_cast<size_t>(b)] && a < b);
}

void Solver::heap_insert(int v) {
    heap_pos_[static_cast<size_t>(v)] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_up(heap_.size() - 1);
}

void Solver::heap_up(size_t pos) {
    int v = heap_[pos];
    while (pos > 0) {
        size_t parent = (pos - 1) / 2;
        if (!heap_less(v, heap_[parent]))
            break;
        heap_[pos] = heap_[parent];
        heap_pos_[static_cast<size_t>(heap_[pos])] = static_cast<int>(pos);
        pos = parent;
    }
    heap_[pos] = v;
    heap_pos_[static_cast<size_t>(v)] = static_cast<int>(pos);
}

void Solver::heap_down(size_t pos) {
    int v = heap_[pos];
    for (;;) {
        size_t child = pos * 2 + 1;
        if (child >= heap_.size())
            break;
        if (child + 1 < heap_.size() && heap_less(heap_[child + 1], heap_[child]))
            ++child;
        if (!heap_less(heap_[child], v))
            break;
        heap_[pos] = heap_[child];
        heap_pos_[static_cast<size_t>(heap_[pos])] = static_cast<int>(pos);
        pos = child;
    }
    heap_[pos] = v;
    heap_pos_[static_cast<size_t>(v)] = static_cast<int>(pos);
}

int Solver::heap_pop() {
    int v = heap_[0];
    heap_pos_[static_cast<size_t>(v)] = -1;
    int last = heap_.back();
    heap_.pop_back();
    if (!heap_.empty()) {
        heap_[0] = last;
        heap_pos_[static_cast<size_t>(last)] = 0;
        heap_down(0);
    }
    return v;
}

void Solver::rebuild_heap() {
    heap_.clear();
    for (int v = 0; v < num_vars(); ++v) {
        heap_pos_[static_cast<size_t>(v)] = -1;
        if (assigns_[static_cast<size_t>(v)] == 0)
            heap_insert(v);
    }
}

int Solver::pick_branch() {
    while (!heap_.empty()) {
        int v = heap_pop();
        if (assigns_[static_cast<size_t>(v)] == 0)
            return v;
    }
    return -1;
}

void Solver::bump_var(int v) {
    activity_[static_cast<size_t>(v)] += var_inc_;
    if (activity_[static_cast<size_t>(v)] > 1e100) {
        for (double& a : activity_)
            a *= 1e-100;
        var_inc_ *= 1e-100;
    }
    if (heap_pos_[static_cast<size_t>(v)] >= 0)
        heap_up(static_cast<size_t>(heap_pos_[static_cast<size_t>(v)]));
}

void Solver::bump_clause(InternalClause& c) {
    c.activity += cla_inc_;
    if (c.activity > 1e20f) {
        for (uint32_t cref : learnts_)
            clauses_[cref].activity *= 1e-20f;
        cla_inc_ *= 1e-20f;
    }
}

void Solver::decay_activities() {
    var_inc_ /= 0.95;
    cla_inc_ /= 0.999f;
}

void Solver::reduce_db() {
    std::vector<uint32_t> order = learnts_;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        return clauses_[a].activity < clauses_[b].activity;
    });
    size_t target = order.size() / 2;
    size_t removed = 0;
    for (uint32_t cref : order) {
        if (removed >= target)
            break;
        InternalClause& c = clauses_[cref];
        if (c.lits.size() <= 2)
            continue;
        size_t v0 = static_cast<size_t>(var(c.lits[0]));
        bool is_reason = assigns_[v0] != 0 && reason_[v0] == static_cast<int32_t>(cref);
        if (is_reason)
            continue;
        c.removed = true;  // watchers dropped lazily in propagate
        c.lits.clear();
        c.lits.shrink_to_fit();
        ++removed;
    }
    learnts_.erase(std::remove_if(learnts_.begin(), learnts_.end(),
                                  [&](uint32_t cref) { return clauses_[cref].removed; }),
                   learnts_.end());
}

void Solver::randomize(uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (size_t v = 0; v < assigns_.size(); ++v) {
        polarity_[v] = static_cast<uint8_t>(rng() & 1);
        activity_[v] = static_cast<double>(rng() % 1000003) * 1e-9;
    }
    var_inc_ = 1.0;
    rebuild_heap();
}

namespace {

uint64_t luby(uint64_t i) {
    // Luby sequence, 0-indexed: 1 1 2 1 1 2 4 ...
    uint64_t size = 1, seq = 0;
    while (size < i + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != i) {
        size = (size - 1) / 2;
        --seq;
        i %= size;
    }
    return 1ull << seq;
}

}  // namespace

SolveOutcome Solver::solve(const std::vector<Lit>& assumptions) {
    SolveOutcome out;
    uint64_t c0 = conflicts_, d0 = decisions_, p0 = propagations_;
    auto finish = [&](SolveOutcome::Status st) {
        backtrack(0);
        out.status = st;
        out.conflicts = conflicts_ - c0;
        out.decisions = decisions_ - d0;
        out.propagations = propagations_ - p0;
        return out;
    };

    if (!ok_)
        return finish(SolveOutcome::Status::Unsat);
    std::vector<int> assumps;
    assumps.reserve(assumptions.size());
    for (Lit l : assumptions) {
        if (l == 0 || std::abs(l) > num_vars())
            throw std::invalid_argument("solve: bad assumption literal");
        assumps.push_back(toInternal(l));
    }

    backtrack(0);
    if (propagate() != kNoClause) {
        ok_ = false;
        return finish(SolveOutcome::Status::Unsat);
    }

    const uint64_t restart_base = 64;
    uint64_t restart_idx = 0;
    uint64_t budget = restart_base * luby(restart_idx);
    uint64_t segment = 0;
    std::vector<int> learnt;

    for (;;) {
        uint32_t confl = propagate();
        if (confl != kNoClause) {
            ++conflicts_;
            ++segment;
            if (decision_level() == 0) {
                ok_ = false;
                return finish(SolveOutcome::Status::Unsat);
            }
            int bt;
            analyze(confl, learnt, bt);
            backtrack(bt);
            if (learnt.size() == 1) {
                enqueue(learnt[0], -1);
            } else {
                uint32_t cref = static_cast<uint32_t>(clauses_.size());
                clauses_.push_back({learnt, cla_inc_, true, false});
                attach(cref);
                learnts_.push_back(cref);
                enqueue(learnt[0], static_cast<int32_t>(cref));
            }
            decay_activities();
            if (learnts_.size() > reduce_threshold_) {
                reduce_db();
                reduce_threshold_ = reduce_threshold_ + reduce_threshold_ / 3;
            }
            if (conflict_limit_ != 0 && conflicts_ - c0 >= conflict_limit_)
                return finish(SolveOutcome::Status::Limit);
            if (segment >= budget) {
                ++restart_idx;
                budget = restart_base * luby(restart_idx);
                segment = 0;
                backtrack(0);
            }
        } else {
            bool placed = false;
            while (decision_level() < static_cast<int>(assumps.size())) {
                int p = assumps[static_cast<size_t>(decision_level())];
                uint8_t v = value(p);
                if (v == 1) {
                    trail_lim_.push_back(static_cast<int>(trail_.size()));
                } else if (v == 2) {
                    return finish(SolveOutcome::Status::Unsat);
                } else {
                    trail_lim_.push_back(static_cast<int>(trail_.size()));
                    enqueue(p, -1);
                    placed = true;
                    break;
                }
            }
            if (placed)
                continue;
            int next = pick_branch();
            if (next < 0) {
                out.model.assign(static_cast<size_t>(num_vars()) + 1, 0);
                for (int v = 0; v < num_vars(); ++v)
                    out.model[static_cast<size_t>(v) + 1] =
                        assigns_[static_cast<size_t>(v)] == 1 ? 1 : 0;
                SolveOutcome res = finish(SolveOutcome::Status::Sat);
                res.model = std::move(out.model);
                return res;
            }
            ++decisions_;
            trail_lim_.push_back(static_cast<int>(trail_.size()));
            enqueue(next * 2 + polarity_[static_cast<size_t>(next)], -1);
        }
    }
}

SolveOutcome solve_formula(const CnfFormula& f, const std::vector<Lit>& assumptions) {
    Solver s(f);
    return s.solve(assumptions);
}

SolveOutcome solve_randomized(const CnfFormula& f, const std::vector<Lit>& assumptions,
                              uint64_t seed) {
    Solver s(f);
    s.randomize(seed);
    return s.solve(assumptions);
}

}  // namespace bnncnf
