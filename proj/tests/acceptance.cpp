// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Usage: acceptance <data-dir>
//
// Criteria:
//   1 encoder/solver oracle equivalence on >= 20 random models (exhaustive)
//   2 main experiment: 100-20-10 on 10x10, accuracy band, 100 verified
//     diverse inversions for label 2
//   3 UNSAT experiment: unreachable label on a 25-20-10 / 5x5 model,
//     cross-validated by the 2^25 brute-force oracle
//   4 formula-size magnitude anchors
//   5 solver vs brute force on >= 500 random CNFs + PHP(4,3)
//   6 sequential counter truth tables, n <= 8
//   7 byte-level determinism of train/encode/solve/invert

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "bnncnf/dataset.hpp"
#include "bnncnf/encode.hpp"
#include "bnncnf/model.hpp"
#include "bnncnf/sample.hpp"
#include "bnncnf/solver.hpp"
#include "bnncnf/train.hpp"
#include "bnncnf/verify.hpp"

using namespace bnncnf;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- criterion 1 ------------------------------------------------------

void criterion1() {
    auto t0 = std::chrono::steady_clock::now();
    // 20 architectures, widths 4..16, 1-3 inner blocks; random_model already
    // sweeps alpha signs (incl. exact zero) and near-integer biases
    const std::vector<std::vector<int>> archs = {
        {4, 3, 2},          {5, 4, 3},         {6, 5, 3},      {7, 4, 4, 3},
        {8, 6, 4},          {4, 4, 4, 4, 2},   {9, 5, 3},      {10, 6, 4},
        {5, 3, 3, 2},       {6, 6, 2},         {11, 5, 3},     {12, 6, 4},
        {8, 8, 8, 4},       {13, 5, 3},        {14, 6, 3},     {7, 7, 2},
        {15, 5, 3},         {16, 6, 4},        {16, 10, 10},   {12, 10, 8, 5},
    };
    uint64_t checked = 0, mismatches = 0;
    std::string first_bad;
    for (size_t i = 0; i < archs.size(); ++i) {
        BnnModel m = random_model(archs[i], 1000 + i);
        auto [f, vm] = encode_bnn(m);
        EquivalenceReport inf = check_inference_equivalence(m, f, vm, true);
        EquivalenceReport inv = check_inversion(m, f, vm);
        checked += inf.total_checked;
        mismatches += inf.mismatches.size() + inv.mismatches.size();
        if (first_bad.empty() && (!inf.pass() || !inv.pass()))
            first_bad = " first failure at arch index " + std::to_string(i);
    }
    double secs = seconds_since(t0);
    bool pass = mismatches == 0 && secs < 600.0;
    report(1, pass,
           std::to_string(archs.size()) + " models, " + std::to_string(checked) +
               " exhaustive inference checks + full preimage enumeration per label, " +
               std::to_string(mismatches) + " mismatches, " + std::to_string(secs) + "s" +
               first_bad);
}

// ---- criteria 2 and 4 --------------------------------------------------

BnnModel g_model_100;  // reused by criterion 4
BnnModel g_model_25;

void criterion2(const std::string& data_dir) {
    Dataset train_set = binarize_dataset(
        load_idx(data_dir + "/train-images-idx3-ubyte", data_dir + "/train-labels-idx1-ubyte"), 10,
        10);
    Dataset test_set = binarize_dataset(
        load_idx(data_dir + "/t10k-images-idx3-ubyte", data_dir + "/t10k-labels-idx1-ubyte"), 10,
        10);

    TrainConfig cfg;  // 25 epochs by default
    cfg.seed = 1;
    g_model_100 = train(train_set, {100, 20, 10}, cfg);
    double acc = evaluate(g_model_100, test_set);
    bool acc_ok = acc >= 0.65 && acc <= 0.85;  // tolerance band pinned here

    auto [f, vm] = encode_bnn(g_model_100, 10, 10);
    InversionQuery q;
    q.target_label = 2;
    q.num_samples = 100;
    q.seed = 1;
    InversionReport r = invert(g_model_100, f, vm, q);
    int verified = 0;
    for (uint8_t v : r.verified)
        verified += v;
    bool pass = acc_ok && r.status == InversionStatus::Satisfiable &&
                r.inputs.size() == 100 && verified == 100 && r.distinct_count >= 90;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "test accuracy %.4f (band [0.65, 0.85]), label-2 samples %zu, verified %d/100, "
                  "distinct %d (>= 90), mean pairwise Hamming %.1f",
                  acc, r.inputs.size(), verified, r.distinct_count, r.mean_pairwise_hamming);
    report(2, pass, buf);
}

void criterion3(const std::string& data_dir) {
    Dataset train_set = binarize_dataset(
        load_idx(data_dir + "/train-images-idx3-ubyte", data_dir + "/train-labels-idx1-ubyte"), 5,
        5);

    // look for an unreachable label on underfit trained models first, then
    // fall back to a search over random weights; the criterion is the
    // UNSAT <=> empty-preimage equivalence, not where the model came from
    auto find_unsat = [](const BnnModel& m, int& label) {
        auto [f, vm] = encode_bnn(m, 5, 5);
        for (int cls = 0; cls < m.num_classes(); ++cls) {
            Solver s(f);
            if (!s.add_clause({vm.output_var(cls)}) || !s.solve().sat()) {
                label = cls;
                return true;
            }
        }
        return false;
    };

    BnnModel chosen;
    int label = -1;
    bool found = false;
    std::string origin;
    for (uint64_t seed = 1; seed <= 6 && !found; ++seed) {
        TrainConfig cfg;
        cfg.epochs = 2;  // deliberately underfit
        cfg.seed = seed;
        BnnModel m = train(train_set, {25, 20, 10}, cfg);
        if (find_unsat(m, label)) {
            chosen = m;
            found = true;
            origin = "underfit training, seed " + std::to_string(seed);
        }
    }
    for (uint64_t seed = 1; seed <= 50 && !found; ++seed) {
        BnnModel m = random_model({25, 20, 10}, seed);
        if (find_unsat(m, label)) {
            chosen = m;
            found = true;
            origin = "weight search, seed " + std::to_string(seed);
        }
    }
    if (!found) {
        report(3, false, "no 25-20-10 model with an unreachable label found");
        return;
    }
    g_model_25 = chosen;

    // the inversion query itself must certify UnsatLabel
    auto [f, vm] = encode_bnn(chosen, 5, 5);
    InversionQuery q;
    q.target_label = label;
    q.num_samples = 1;
    InversionReport r = invert(chosen, f, vm, q);

    // cross-validate with the 2^25 sweep: empty preimage for the unsat
    // label, and UNSAT <=> empty agreement on every label
    auto counts = brute_force_label_counts(chosen);
    bool oracle_empty = counts[static_cast<size_t>(label)] == 0;
    bool all_agree = true;
    for (int cls = 0; cls < 10; ++cls) {
        Solver s(f);
        bool sat = s.add_clause({vm.output_var(cls)}) && s.solve().sat();
        if (sat != (counts[static_cast<size_t>(cls)] > 0))
            all_agree = false;
    }
    bool pass = r.status == InversionStatus::UnsatLabel && oracle_empty && all_agree;
    report(3, pass,
           "label " + std::to_string(label) + " UnsatLabel (" + origin +
               "), brute-force preimage size " +
               std::to_string(counts[static_cast<size_t>(label)]) +
               ", UNSAT<=>empty agreement on all 10 labels: " + (all_agree ? "yes" : "no"));
}

void criterion4() {
    if (g_model_100.arch.empty() || g_model_25.arch.empty()) {
        report(4, false, "prerequisite models from criteria 2/3 unavailable");
        return;
    }
    auto [f1, vm1] = encode_bnn(g_model_100);
    auto [f2, vm2] = encode_bnn(g_model_25);
    auto in_band = [](int v, int lo, int hi) { return v >= lo && v <= hi; };
    bool pass = in_band(vm1.num_vars, 10000, 1000000) && in_band(vm1.num_clauses, 10000, 1000000) &&
                in_band(vm2.num_vars, 1000, 100000) && in_band(vm2.num_clauses, 1000, 100000);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "[100,20,10]: %d vars, %d clauses (band 10^4..10^6); [25,20,10]: %d vars, "
                  "%d clauses (band 10^3..10^5)",
                  vm1.num_vars, vm1.num_clauses, vm2.num_vars, vm2.num_clauses);
    report(4, pass, buf);
}

// ---- criterion 5 -------------------------------------------------------

bool brute_force_sat(const CnfFormula& f) {
    std::vector<uint8_t> asg(static_cast<size_t>(f.num_vars) + 1, 0);
    for (uint64_t m = 0; m < (1ull << f.num_vars); ++m) {
        for (int v = 1; v <= f.num_vars; ++v)
            asg[static_cast<size_t>(v)] = (m >> (v - 1)) & 1;
        if (satisfies(f, asg))
            return true;
    }
    return false;
}

void criterion5() {
    std::mt19937_64 rng(12345);
    int agree = 0, total = 0, model_checks = 0;
    bool models_ok = true;
    const double densities[] = {2.0, 3.0, 4.26, 5.0, 6.5};
    for (int i = 0; i < 500; ++i) {
        // mixed sizes: mostly cheap, a tail up to the full 20 variables
        int n = 3 + static_cast<int>(rng() % 12);
        if (i % 10 == 0)
            n = 15 + static_cast<int>(rng() % 6);
        int m = std::max(1, static_cast<int>(n * densities[i % 5]));
        CnfFormula f;
        f.num_vars = n;
        for (int j = 0; j < m; ++j) {
            Clause c;
            int len = 1 + static_cast<int>(rng() % 4);
            for (int l = 0; l < len; ++l) {
                int v = 1 + static_cast<int>(rng() % n);
                c.push_back(rng() & 1 ? v : -v);
            }
            f.add(std::move(c));
        }
        SolveOutcome out = solve_formula(f);
        bool bf = brute_force_sat(f);
        ++total;
        if (out.sat() == bf)
            ++agree;
        if (out.sat()) {
            ++model_checks;
            if (!satisfies(f, out.model))
                models_ok = false;
        }
    }

    // PHP(4,3)
    CnfFormula php;
    auto v = [&](int p, int h) { return p * 3 + h + 1; };
    php.num_vars = 12;
    for (int p = 0; p < 4; ++p)
        php.add({v(p, 0), v(p, 1), v(p, 2)});
    for (int h = 0; h < 3; ++h)
        for (int p1 = 0; p1 < 4; ++p1)
            for (int p2 = p1 + 1; p2 < 4; ++p2)
                php.add({-v(p1, h), -v(p2, h)});
    bool php_ok = !solve_formula(php).sat() && !brute_force_sat(php);

    bool pass = agree == total && models_ok && php_ok;
    report(5, pass,
           std::to_string(agree) + "/" + std::to_string(total) +
               " status agreements with brute force, " + std::to_string(model_checks) +
               " Sat models vetted by the independent evaluator, PHP(4,3) " +
               (php_ok ? "Unsat" : "WRONG"));
}

// ---- criterion 6 -------------------------------------------------------

void criterion6() {
    uint64_t checked = 0, wrong = 0;
    for (int n = 1; n <= 8; ++n) {
        for (int k = 0; k <= n + 1; ++k) {
            CnfFormula f;
            CardConstraint cc;
            for (int i = 0; i < n; ++i)
                cc.lits.push_back(f.new_var());
            Lit r = f.new_var();
            cc.bound = k;
            cc.reify = r;
            seq_counter(cc, f);
            Solver s(f);
            for (unsigned m = 0; m < (1u << (n + 1)); ++m) {
                std::vector<Lit> assume;
                for (int i = 0; i < n; ++i)
                    assume.push_back((m >> i) & 1 ? cc.lits[static_cast<size_t>(i)]
                                                  : -cc.lits[static_cast<size_t>(i)]);
                bool r_val = (m >> n) & 1;
                assume.push_back(r_val ? r : -r);
                int count = 0;
                for (int i = 0; i < n; ++i)
                    count += (m >> i) & 1;
                bool want = r_val == (count >= k);
                ++checked;
                if (s.solve(assume).sat() != want)
                    ++wrong;
            }
        }
    }
    report(6, wrong == 0,
           "reified at-least-k truth tables for n <= 8, 0 <= k <= n+1: " +
               std::to_string(checked) + " rows checked, " + std::to_string(wrong) + " wrong");
}

// ---- criterion 7 -------------------------------------------------------

void criterion7(const std::string& data_dir) {
    Dataset train_set = binarize_dataset(
        load_idx(data_dir + "/train-images-idx3-ubyte", data_dir + "/train-labels-idx1-ubyte"), 5,
        5);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 99;
    BnnModel m1 = train(train_set, {25, 10, 10}, cfg);
    BnnModel m2 = train(train_set, {25, 10, 10}, cfg);
    bool train_ok = model_to_json(m1) == model_to_json(m2);

    auto [f1, vm1] = encode_bnn(m1, 5, 5);
    auto [f2, vm2] = encode_bnn(m2, 5, 5);
    bool encode_ok = emit_dimacs(f1) == emit_dimacs(f2) && emit_manifest(vm1) == emit_manifest(vm2);

    SolveOutcome s1 = solve_randomized(f1, {}, 7);
    SolveOutcome s2 = solve_randomized(f2, {}, 7);
    bool solve_ok = s1.status == s2.status && s1.model == s2.model &&
                    s1.conflicts == s2.conflicts && s1.decisions == s2.decisions;

    InversionQuery q;
    q.target_label = 0;
    q.num_samples = 5;
    q.seed = 11;
    InversionReport r1 = invert(m1, f1, vm1, q);
    InversionReport r2 = invert(m2, f2, vm2, q);
    bool invert_ok = report_to_json(r1, 0) == report_to_json(r2, 0);

    bool pass = train_ok && encode_ok && solve_ok && invert_ok;
    report(7, pass,
           std::string("two runs byte-identical: train=") + (train_ok ? "yes" : "NO") +
               " encode=" + (encode_ok ? "yes" : "NO") + " solve=" + (solve_ok ? "yes" : "NO") +
               " invert=" + (invert_ok ? "yes" : "NO"));
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <data-dir>\n");
        return 2;
    }
    const std::string data_dir = argv[1];
    try {
        criterion1();
        criterion2(data_dir);
        criterion3(data_dir);
        criterion4();
        criterion5();
        criterion6();
        criterion7(data_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance suite aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%s\n", g_failures == 0 ? "all criteria passed" : "FAILURES PRESENT");
    return g_failures == 0 ? 0 : 1;
}
