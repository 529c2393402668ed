#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnncnf/cnf.hpp"
#include "bnncnf/model.hpp"

namespace bnncnf {

enum class Sense { AtLeast, AtMost };

// At-least-`bound` over `lits`, optionally reified: reify <=> constraint.
// Always normalized to the at-least sense; 0 <= bound <= lits.size() + 1
// (bound 0 is vacuous, bound n+1 is a contradiction).
struct CardConstraint {
    std::vector<Lit> lits;
    int bound = 0;
    std::optional<Lit> reify;
};

struct VarRange {
    int first = 0;
    int count = 0;

    int last() const { return first + count - 1; }
    bool contains(int v) const { return v >= first && v < first + count; }
};

struct VariableMap {
    int num_vars = 0;
    int num_clauses = 0;
    VarRange inputs;                // 1 .. n_in
    VarRange outputs;               // n_in+1 .. n_in+c, index = class
    std::vector<VarRange> hidden;   // one range per inner block
    VarRange comparators;           // b_ij variables, ordered pairs i != j
    VarRange aux;                   // sequential-counter registers
    int image_width = 0;
    int image_height = 0;
    std::string cnf_hash;  // fnv1a64 over the emitted DIMACS bytes

    int input_var(int p) const { return inputs.first + p; }
    int output_var(int cls) const { return outputs.first + cls; }
};

// Rewrites <a, x> >= C (or <= C for AtMost) over bipolar x as an at-least
// cardinality constraint over input literals: position p contributes
// input_lits[p] when a_p = +1 and its negation otherwise, and
// <a, x> = 2 * (#satisfied literals) - n.
CardConstraint dot_to_card(std::span<const int8_t> weights_row, std::span<const Lit> input_lits,
                           int threshold, Sense sense);

// Lowers a cardinality constraint to clauses with a sequential (unary)
// counter, allocating register variables in `f`. Returns the number of
// auxiliary variables introduced. Reified constraints get both implication
// directions; asserted ones only the direction needed for soundness.
int seq_counter(const CardConstraint& c, CnfFormula& f);

// One reified cardinality constraint per neuron: hidden_vars[i] <=> folded
// threshold of neuron i. Constant neurons become unit clauses.
void encode_inner_block(const InnerBlock& block, std::span<const Lit> input_lits,
                        std::span<const Lit> hidden_vars, CnfFormula& f);

// Comparator variables b_ij <=> rounded l_i >= l_j, output indicators
// o_i <=> (AND_{j<i} !b_ji) AND (AND_{j>i} b_ij), plus exactly-one over
// the indicators (redundant but kept for solver performance).
void encode_output_block(const OutputBlock& block, std::span<const Lit> input_lits,
                         std::span<const Lit> output_vars, std::span<const Lit> comparator_vars,
                         CnfFormula& f);

// Full pipeline. Variable layout: inputs 1..n_in, output indicators next,
// then hidden per block, comparators, counter registers. For every complete
// input assignment the formula is satisfiable and all models agree on the
// output indicators. image_width/height are recorded in the map for
// rendering; pass 0 to infer a square shape from the input width.
std::pair<CnfFormula, VariableMap> encode_bnn(const BnnModel& m, int image_width = 0,
                                              int image_height = 0);

std::string emit_manifest(const VariableMap& vm);
VariableMap parse_manifest(const std::string& text);
VariableMap load_manifest(const std::string& path);

}  // namespace bnncnf
