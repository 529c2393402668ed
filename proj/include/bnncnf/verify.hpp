#pragma once

#include <cstdint>
#include <vector>

#include "bnncnf/encode.hpp"
#include "bnncnf/model.hpp"

namespace bnncnf {

struct Mismatch {
    BVec input;
    int expected = 0;
    int got = 0;
};

struct EquivalenceReport {
    uint64_t total_checked = 0;
    std::vector<Mismatch> mismatches;

    bool pass() const { return mismatches.empty(); }
};

// Bit-packed folded evaluator for exhaustive sweeps; requires every layer
// width <= 64. Input bit p set <=> pixel p is +1.
class PackedBnn {
  public:
    explicit PackedBnn(const BnnModel& m);
    int label(uint64_t x_mask) const;
    int input_width() const { return width_; }

  private:
    struct PackedLayer {
        int in_width = 0;
        std::vector<uint64_t> plus_mask;  // per neuron: bits where weight = +1
    };
    int width_ = 0;
    std::vector<PackedLayer> inner_;
    std::vector<NeuronThreshold> thresholds_;  // flattened per inner layer
    std::vector<int> layer_offsets_;
    PackedLayer out_;
    std::vector<std::vector<int>> cmp_thresholds_;  // [i][j]: rounded (b_j - b_i)
    int classes_ = 0;
};

BVec mask_to_bvec(uint64_t mask, int width);
uint64_t bvec_to_mask(const BVec& x);

// Exhaustive forward_folded sweep; refuses widths > 25 (2^25 budget).
std::vector<uint64_t> brute_force_preimage_masks(const BnnModel& m, int label);
std::vector<BVec> brute_force_preimage(const BnnModel& m, int label);
std::vector<uint64_t> brute_force_label_counts(const BnnModel& m);

// Compares CNF inference against forward_folded. Exhaustive mode sweeps all
// 2^width inputs (width <= 16); otherwise num_random seeded random inputs.
EquivalenceReport check_inference_equivalence(const BnnModel& m, const CnfFormula& f,
                                              const VariableMap& vm, bool exhaustive,
                                              int num_random = 0, uint64_t seed = 0);

// For every label: enumerate_preimage must equal brute_force_preimage as a
// set, and Unsat-on-first-call must coincide with an empty oracle preimage.
// Mismatch entries use expected/got = oracle/enumerated set sizes, with a
// witness input where one side has an element the other lacks.
EquivalenceReport check_inversion(const BnnModel& m, const CnfFormula& f, const VariableMap& vm);

// Random models for harnesses: alpha spans negative/zero/positive, biases
// land near integer boundaries.
BnnModel random_model(const std::vector<int>& arch, uint64_t seed);

}  // namespace bnncnf
