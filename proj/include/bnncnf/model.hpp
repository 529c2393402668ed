#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bnncnf {

// Bipolar vector: every entry is -1 or +1.
using BVec = std::vector<int8_t>;

struct BatchNormParams {
    std::vector<double> mu;     // per-neuron mean
    std::vector<double> sigma;  // per-neuron standard deviation, >= 0
    std::vector<double> alpha;  // scale
    std::vector<double> gamma;  // shift
    double epsilon = 1e-5;
};

struct InnerBlock {
    std::vector<std::vector<int8_t>> weights;  // out x in, entries +-1
    std::vector<double> bias;
    BatchNormParams bn;

    size_t in_dim() const { return weights.empty() ? 0 : weights[0].size(); }
    size_t out_dim() const { return weights.size(); }
};

struct OutputBlock {
    std::vector<std::vector<int8_t>> weights;  // classes x in
    std::vector<double> bias;
    int classes = 0;

    size_t in_dim() const { return weights.empty() ? 0 : weights[0].size(); }
};

struct BnnModel {
    std::vector<int> arch;  // layer widths, e.g. {100, 20, 10}
    std::vector<InnerBlock> inner_blocks;
    OutputBlock output_block;

    int input_width() const { return arch.front(); }
    int num_classes() const { return arch.back(); }

    // Throws std::invalid_argument when any structural invariant is broken:
    // non-bipolar weights, dimension mismatches, negative sigma.
    void validate() const;
};

enum class ThresholdKind { AtLeast, AtMost, ConstPlus, ConstMinus };

// A neuron folded to a single integer predicate on the weight/input dot
// product: AtLeast/AtMost carry threshold C, the Const kinds ignore it.
struct NeuronThreshold {
    ThresholdKind kind = ThresholdKind::ConstPlus;
    int threshold = 0;
};

// +1 iff z >= 0, else -1. Throws on non-finite input.
int8_t sign_step(double z);

// Folds linear + batch-norm + sign into one integer threshold on s = <a, x>.
NeuronThreshold fold_neuron(std::span<const int8_t> weights_row, double bias, double mu,
                            double sigma, double alpha, double gamma, double epsilon);
NeuronThreshold fold_neuron(const InnerBlock& block, size_t neuron);

// Evaluates a folded predicate on an integer dot product.
bool threshold_holds(const NeuronThreshold& t, int dot);

// Integer threshold for the rounded logit comparison l_i >= l_j. With s_i
// the integer dot product of output row i, the comparison holds iff
// (s_i - s_j) / 2 >= comparator_threshold(b_i, b_j). The difference
// s_i - s_j is always even since both rows have the same width.
int comparator_threshold(double bias_i, double bias_j);

// The comparison l_i >= l_j under the rounded rule above.
bool logit_ge(int s_i, int s_j, double bias_i, double bias_j);

// Winning class for integer output dot products s under the canonical rule:
// class i wins iff l_i > l_j for all j < i and l_i >= l_j for all j > i.
int folded_argmax(const OutputBlock& out, const std::vector<int>& s);

struct ReferenceResult {
    int label = 0;
    std::vector<double> logits;
};

// Real-valued pass: affine, batch-norm, sign per inner block, then argmax
// of the output logits with ties broken toward the lowest index.
ReferenceResult forward_reference(const BnnModel& m, const BVec& x);

struct FoldedResult {
    int label = 0;
    std::vector<BVec> hidden;  // one bipolar vector per inner block
};

// Canonical integer pass the CNF encoding reproduces bit-exactly: folded
// neuron predicates for hidden layers, rounded comparators for the output.
FoldedResult forward_folded(const BnnModel& m, const BVec& x);

int dot(std::span<const int8_t> weights_row, const BVec& x);

std::string model_to_json(const BnnModel& m);
BnnModel model_from_json(const std::string& text);
BnnModel load_model(const std::string& path);
void save_model(const BnnModel& m, const std::string& path);

}  // namespace bnncnf
