#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "bnncnf/cnf.hpp"

namespace bnncnf {

struct SolveOutcome {
    enum class Status { Sat, Unsat, Limit };
    Status status = Status::Unsat;
    // model[v] in {0,1} for v in 1..num_vars; present iff Sat.
    std::vector<uint8_t> model;
    uint64_t conflicts = 0;
    uint64_t decisions = 0;
    uint64_t propagations = 0;

    bool sat() const { return status == Status::Sat; }
};

// CDCL solver: two-watched-literal propagation, first-UIP learning,
// non-chronological backjumping, VSIDS decisions, Luby restarts, phase
// saving. Deterministic for a fixed formula/assumptions/seed. Single
// instance = single thread; run independent instances for parallelism.
class Solver {
  public:
    Solver() = default;
    explicit Solver(const CnfFormula& f);

    void ensure_vars(int n);
    int num_vars() const { return static_cast<int>(assigns_.size()); }

    // Deduplicates literals, drops tautologies, simplifies against the
    // level-0 assignment. Returns false once the instance is known Unsat.
    bool add_clause(std::vector<Lit> lits);
    void add_formula(const CnfFormula& f);

    // Re-seeds decision polarities and activity jitter so the next solve
    // explores a different region of the model space. Stand-in for a
    // uniform-like sampler: diverse, not provably uniform.
    void randomize(uint64_t seed);

    // 0 disables the limit. When hit, solve returns Limit (never Unsat).
    void set_conflict_limit(uint64_t max_conflicts) { conflict_limit_ = max_conflicts; }

    SolveOutcome solve(const std::vector<Lit>& assumptions = {});

  private:
    struct InternalClause {
        std::vector<int> lits;  // internal encoding: 2v (+) / 2v+1 (-)
        float activity = 0.0f;
        bool learnt = false;
        bool removed = false;
    };
    struct Watcher {
        uint32_t cref;
        int blocker;
    };

    static int toInternal(Lit l) { return (std::abs(l) - 1) * 2 + (l < 0 ? 1 : 0); }
    static int neg(int lit) { return lit ^ 1; }
    static int var(int lit) { return lit >> 1; }

    // lbool values: 0 undef, 1 true, 2 false (of the positive literal)
    uint8_t value(int lit) const {
        uint8_t a = assigns_[static_cast<size_t>(var(lit))];
        if (a == 0)
            return 0;
        return (lit & 1) ? (a == 1 ? 2 : 1) : a;
    }

    void new_vars_to(size_t n);
    void attach(uint32_t cref);
    bool enqueue(int lit, int32_t reason);
    uint32_t propagate();  // returns conflicting cref or kNoClause
    void analyze(uint32_t confl, std::vector<int>& learnt, int& bt_level);
    void backtrack(int level);
    int decision_level() const { return static_cast<int>(trail_lim_.size()); }
    int pick_branch();
    void bump_var(int v);
    void bump_clause(InternalClause& c);
    void decay_activities();
    void reduce_db();
    void heap_insert(int v);
    int heap_pop();
    void heap_up(size_t pos);
    void heap_down(size_t pos);
    bool heap_less(int a, int b) const;
    void rebuild_heap();

    static constexpr uint32_t kNoClause = 0xFFFFFFFFu;

    std::deque<InternalClause> clauses_;
    std::vector<uint32_t> learnts_;
    std::vector<std::vector<Watcher>> watches_;  // per internal literal
    std::vector<uint8_t> assigns_;               // per var: 0 undef / 1 true / 2 false
    std::vector<int> trail_;
    std::vector<int> trail_lim_;
    std::vector<int32_t> reason_;  // cref or -1
    std::vector<int> level_;
    std::vector<double> activity_;
    std::vector<uint8_t> polarity_;  // saved phase, 1 = sign bit (false)
    std::vector<uint8_t> seen_;
    std::vector<int> heap_;
    std::vector<int> heap_pos_;  // -1 if absent
    size_t qhead_ = 0;
    double var_inc_ = 1.0;
    float cla_inc_ = 1.0f;
    bool ok_ = true;
    uint64_t conflict_limit_ = 0;
    uint64_t conflicts_ = 0, decisions_ = 0, propagations_ = 0;
    uint64_t reduce_threshold_ = 4000;
};

SolveOutcome solve_formula(const CnfFormula& f, const std::vector<Lit>& assumptions = {});
SolveOutcome solve_randomized(const CnfFormula& f, const std::vector<Lit>& assumptions,
                              uint64_t seed);

}  // namespace bnncnf
