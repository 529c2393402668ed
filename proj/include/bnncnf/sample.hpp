#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnncnf/encode.hpp"
#include "bnncnf/model.hpp"
#include "bnncnf/solver.hpp"

namespace bnncnf {

struct InversionQuery {
    int target_label = 0;
    int num_samples = 1;
    uint64_t seed = 1;
    bool distinct = false;  // block duplicates on the input projection
};

enum class InversionStatus { Satisfiable, UnsatLabel };

struct InversionReport {
    InversionStatus status = InversionStatus::Satisfiable;
    std::vector<BVec> inputs;
    std::vector<uint8_t> verified;  // forward_folded label == target
    int distinct_count = 0;
    double mean_pairwise_hamming = 0.0;
    // distinct mode ran out of fresh inputs before num_samples.
    bool exhausted = false;

    bool all_verified() const;
};

// Reusable inference-by-SAT: fixes every input variable via assumptions and
// reads back the unique true output indicator. Solver state (learned
// clauses) carries over between queries.
class InferenceEngine {
  public:
    InferenceEngine(const CnfFormula& f, const VariableMap& vm);
    int infer(const BVec& x);

  private:
    Solver solver_;
    VariableMap vm_;
};

// One-shot variant of InferenceEngine::infer. Throws std::runtime_error if
// the query is Unsat or the indicators are inconsistent (encoder bug).
int infer_sat(const CnfFormula& f, const VariableMap& vm, const BVec& x);

// Asserts the target output indicator and draws satisfying assignments with
// per-sample re-randomized CDCL. UnsatLabel (no inputs at all) is a
// certificate, not an error.
InversionReport invert(const BnnModel& m, const CnfFormula& f, const VariableMap& vm,
                       const InversionQuery& q);

struct PreimageResult {
    std::vector<BVec> inputs;
    bool truncated = false;  // cap reached with more inputs remaining
};

// All-models enumeration projected onto the inputs via blocking clauses on
// input variables only. Deterministic order.
PreimageResult enumerate_preimage(const CnfFormula& f, const VariableMap& vm, int label, int cap);

// (distinct count, mean Hamming distance over unordered pairs; 0 if < 2).
std::pair<int, double> diversity_stats(const std::vector<BVec>& inputs);

std::string report_to_json(const InversionReport& r, int target_label);

BVec extract_input(const std::vector<uint8_t>& model, const VariableMap& vm);

}  // namespace bnncnf
