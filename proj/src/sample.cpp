#include "bnncnf/sample.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace bnncnf {

namespace {

// splitmix64, used to derive per-sample solver seeds.
uint64_t mix_seed(uint64_t seed, uint64_t i) {
    uint64_t z = seed + (i + 1) * 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

int read_label(const std::vector<uint8_t>& model, const VariableMap& vm) {
    int label = -1;
    for (int c = 0; c < vm.outputs.count; ++c) {
        if (model[static_cast<size_t>(vm.output_var(c))]) {
            if (label >= 0)
                throw std::runtime_error("internal error: multiple output indicators set");
            label = c;
        }
    }
    if (label < 0)
        throw std::runtime_error("internal error: no output indicator set");
    return label;
}

Clause input_blocking_clause(const BVec& x, const VariableMap& vm) {
    Clause c;
    c.reserve(x.size());
    for (size_t p = 0; p < x.size(); ++p) {
        int v = vm.input_var(static_cast<int>(p));
        c.push_back(x[p] > 0 ? -v : v);
    }
    return c;
}

}  // namespace

BVec extract_input(const std::vector<uint8_t>& model, const VariableMap& vm) {
    BVec x(static_cast<size_t>(vm.inputs.count));
    for (int p = 0; p < vm.inputs.count; ++p)
        x[static_cast<size_t>(p)] = model[static_cast<size_t>(vm.input_var(p))] ? 1 : -1;
    return x;
}

bool InversionReport::all_verified() const {
    return std::all_of(verified.begin(), verified.end(), [](uint8_t v) { return v != 0; });
}

InferenceEngine::InferenceEngine(const CnfFormula& f, const VariableMap& vm)
    : solver_(f), vm_(vm) {}

int InferenceEngine::infer(const BVec& x) {
    if (static_cast<int>(x.size()) != vm_.inputs.count)
        throw std::invalid_argument("infer: input width mismatch");
    std::vector<Lit> assumptions;
    assumptions.reserve(x.size());
    for (size_t p = 0; p < x.size(); ++p) {
        int v = vm_.input_var(static_cast<int>(p));
        assumptions.push_back(x[p] > 0 ? v : -v);
    }
    SolveOutcome out = solver_.solve(assumptions);
    if (!out.sat())
        throw std::runtime_error(
            "internal error: inference query unsatisfiable (encoder bug for this input)");
    return read_label(out.model, vm_);
}

int infer_sat(const CnfFormula& f, const VariableMap& vm, const BVec& x) {
    InferenceEngine engine(f, vm);
    return engine.infer(x);
}

InversionReport invert(const BnnModel& m, const CnfFormula& f, const VariableMap& vm,
                       const InversionQuery& q) {
    if (q.target_label < 0 || q.target_label >= vm.outputs.count)
        throw std::invalid_argument("invert: target label out of range");
    if (q.num_samples < 1)
        throw std::invalid_argument("invert: num_samples must be >= 1");

    InversionReport report;
    Solver solver(f);
    solver.add_clause({vm.output_var(q.target_label)});
    for (int i = 0; i < q.num_samples; ++i) {
        solver.randomize(mix_seed(q.seed, static_cast<uint64_t>(i)));
        SolveOutcome out = solver.solve();
        if (!out.sat()) {
            if (report.inputs.empty())
                report.status = InversionStatus::UnsatLabel;
            else
                report.exhausted = true;
            break;
        }
        BVec x = extract_input(out.model, vm);
        report.verified.push_back(forward_folded(m, x).label == q.target_label ? 1 : 0);
        if (q.distinct)
            solver.add_clause(input_blocking_clause(x, vm));
        report.inputs.push_back(std::move(x));
    }
    auto [distinct, hamming] = diversity_stats(report.inputs);
    report.distinct_count = distinct;
    report.mean_pairwise_hamming = hamming;
    return report;
}

PreimageResult enumerate_preimage(const CnfFormula& f, const VariableMap& vm, int label, int cap) {
    if (cap < 1)
        throw std::invalid_argument("enumerate_preimage: cap must be >= 1");
    if (label < 0 || label >= vm.outputs.count)
        throw std::invalid_argument("enumerate_preimage: label out of range");
    PreimageResult res;
    Solver solver(f);
    solver.add_clause({vm.output_var(label)});
    for (;;) {
        SolveOutcome out = solver.solve();
        if (!out.sat())
            break;
        BVec x = extract_input(out.model, vm);
        if (static_cast<int>(res.inputs.size()) == cap) {
            res.truncated = true;  // one more model exists beyond the cap
            break;
        }
        solver.add_clause(input_blocking_clause(x, vm));
        res.inputs.push_back(std::move(x));
    }
    return res;
}

std::pair<int, double> diversity_stats(const std::vector<BVec>& inputs) {
    if (inputs.empty())
        return {0, 0.0};
    for (const BVec& x : inputs)
        if (x.size() != inputs.front().size())
            throw std::invalid_argument("diversity_stats: mixed input lengths");
    std::set<BVec> distinct(inputs.begin(), inputs.end());
    if (inputs.size() < 2)
        return {static_cast<int>(distinct.size()), 0.0};
    double total = 0.0;
    size_t pairs = 0;
    for (size_t i = 0; i < inputs.size(); ++i) {
        for (size_t j = i + 1; j < inputs.size(); ++j) {
            int d = 0;
            for (size_t p = 0; p < inputs[i].size(); ++p)
                d += inputs[i][p] != inputs[j][p];
            total += d;
            ++pairs;
        }
    }
    return {static_cast<int>(distinct.size()), total / static_cast<double>(pairs)};
}

std::string report_to_json(const InversionReport& r, int target_label) {
    nlohmann::json j;
    j["status"] = r.status == InversionStatus::UnsatLabel ? "unsat_label" : "satisfiable";
    j["target_label"] = target_label;
    j["num_samples"] = r.inputs.size();
    j["distinct_count"] = r.distinct_count;
    j["mean_pairwise_hamming"] = r.mean_pairwise_hamming;
    j["exhausted"] = r.exhausted;
    j["all_verified"] = r.all_verified();
    j["verified"] = r.verified;
    j["inputs"] = nlohmann::json::array();
    for (const BVec& x : r.inputs) {
        nlohmann::json row = nlohmann::json::array();
        for (int8_t e : x)
            row.push_back(static_cast<int>(e));
        j["inputs"].push_back(std::move(row));
    }
    return j.dump(2) + "\n";
}

}  // namespace bnncnf
