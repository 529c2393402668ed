#include "bnncnf/verify.hpp"

#include <bit>
#include <random>
#include <set>
#include <stdexcept>

#include "bnncnf/sample.hpp"

namespace bnncnf {

PackedBnn::PackedBnn(const BnnModel& m) {
    m.validate();
    for (int w : m.arch)
        if (w > 64)
            throw std::invalid_argument("PackedBnn: layer width exceeds 64");
    width_ = m.input_width();
    classes_ = m.num_classes();
    for (const InnerBlock& b : m.inner_blocks) {
        PackedLayer l;
        l.in_width = static_cast<int>(b.in_dim());
        layer_offsets_.push_back(static_cast<int>(thresholds_.size()));
        for (size_t i = 0; i < b.out_dim(); ++i) {
            uint64_t mask = 0;
            for (size_t p = 0; p < b.in_dim(); ++p)
                if (b.weights[i][p] > 0)
                    mask |= uint64_t{1} << p;
            l.plus_mask.push_back(mask);
            thresholds_.push_back(fold_neuron(b, i));
        }
        inner_.push_back(std::move(l));
    }
    const OutputBlock& o = m.output_block;
    out_.in_width = static_cast<int>(o.in_dim());
    for (int i = 0; i < classes_; ++i) {
        uint64_t mask = 0;
        for (size_t p = 0; p < o.in_dim(); ++p)
            if (o.weights[i][p] > 0)
                mask |= uint64_t{1} << p;
        out_.plus_mask.push_back(mask);
    }
    cmp_thresholds_.assign(static_cast<size_t>(classes_), std::vector<int>(classes_, 0));
    for (int i = 0; i < classes_; ++i)
        for (int j = 0; j < classes_; ++j)
            if (i != j)
                cmp_thresholds_[i][j] = comparator_threshold(o.bias[i], o.bias[j]);
}

int PackedBnn::label(uint64_t x) const {
    for (size_t k = 0; k < inner_.size(); ++k) {
        const PackedLayer& l = inner_[k];
        const uint64_t width_mask =
            l.in_width == 64 ? ~uint64_t{0} : (uint64_t{1} << l.in_width) - 1;
        uint64_t next = 0;
        for (size_t i = 0; i < l.plus_mask.size(); ++i) {
            int agree = std::popcount(~(l.plus_mask[i] ^ x) & width_mask);
            int s = 2 * agree - l.in_width;
            if (threshold_holds(thresholds_[static_cast<size_t>(layer_offsets_[k]) + i], s))
                next |= uint64_t{1} << i;
        }
        x = next;
    }
    const uint64_t width_mask =
        out_.in_width == 64 ? ~uint64_t{0} : (uint64_t{1} << out_.in_width) - 1;
    std::vector<int> s(static_cast<size_t>(classes_));
    for (int i = 0; i < classes_; ++i) {
        int agree = std::popcount(~(out_.plus_mask[static_cast<size_t>(i)] ^ x) & width_mask);
        s[static_cast<size_t>(i)] = 2 * agree - out_.in_width;
    }
    // Lowest-index maximum under the rounded comparator preorder.
    int best = 0;
    for (int i = 1; i < classes_; ++i) {
        bool best_ge_i = (s[static_cast<size_t>(best)] - s[static_cast<size_t>(i)]) / 2 >=
                         cmp_thresholds_[static_cast<size_t>(best)][static_cast<size_t>(i)];
        if (!best_ge_i)
            best = i;
    }
    return best;
}

BVec mask_to_bvec(uint64_t mask, int width) {
    BVec x(static_cast<size_t>(width));
    for (int p = 0; p < width; ++p)
        x[static_cast<size_t>(p)] = (mask >> p) & 1 ? 1 : -1;
    return x;
}

uint64_t bvec_to_mask(const BVec& x) {
    uint64_t mask = 0;
    for (size_t p = 0; p < x.size(); ++p)
        if (x[p] > 0)
            mask |= uint64_t{1} << p;
    return mask;
}

namespace {

void check_enumeration_budget(const BnnModel& m) {
    if (m.input_width() > 25)
        throw std::invalid_argument("brute force refused: input width " +
                                    std::to_string(m.input_width()) + " exceeds the 2^25 budget");
}

}  // namespace

std::vector<uint64_t> brute_force_preimage_masks(const BnnModel& m, int label) {
    check_enumeration_budget(m);
    if (label < 0 || label >= m.num_classes())
        throw std::invalid_argument("brute force: label out of range");
    PackedBnn net(m);
    std::vector<uint64_t> result;
    const uint64_t total = uint64_t{1} << m.input_width();
    for (uint64_t x = 0; x < total; ++x)
        if (net.label(x) == label)
            result.push_back(x);
    return result;
}

std::vector<BVec> brute_force_preimage(const BnnModel& m, int label) {
    std::vector<BVec> out;
    for (uint64_t mask : brute_force_preimage_masks(m, label))
        out.push_back(mask_to_bvec(mask, m.input_width()));
    return out;
}

std::vector<uint64_t> brute_force_label_counts(const BnnModel& m) {
    check_enumeration_budget(m);
    PackedBnn net(m);
    std::vector<uint64_t> counts(static_cast<size_t>(m.num_classes()), 0);
    const uint64_t total = uint64_t{1} << m.input_width();
    for (uint64_t x = 0; x < total; ++x)
        ++counts[static_cast<size_t>(net.label(x))];
    return counts;
}

EquivalenceReport check_inference_equivalence(const BnnModel& m, const CnfFormula& f,
                                              const VariableMap& vm, bool exhaustive,
                                              int num_random, uint64_t seed) {
    EquivalenceReport report;
    InferenceEngine engine(f, vm);
    if (exhaustive) {
        if (m.input_width() > 16)
            throw std::invalid_argument("exhaustive equivalence limited to width <= 16");
        const uint64_t total = uint64_t{1} << m.input_width();
        for (uint64_t mask = 0; mask < total; ++mask) {
            BVec x = mask_to_bvec(mask, m.input_width());
            int expected = forward_folded(m, x).label;
            int got = engine.infer(x);
            ++report.total_checked;
            if (expected != got)
                report.mismatches.push_back({std::move(x), expected, got});
        }
    } else {
        std::mt19937_64 rng(seed);
        for (int i = 0; i < num_random; ++i) {
            BVec x(static_cast<size_t>(m.input_width()));
            for (auto& e : x)
                e = (rng() & 1) ? 1 : -1;
            int expected = forward_folded(m, x).label;
            int got = engine.infer(x);
            ++report.total_checked;
            if (expected != got)
                report.mismatches.push_back({std::move(x), expected, got});
        }
    }
    return report;
}

EquivalenceReport check_inversion(const BnnModel& m, const CnfFormula& f, const VariableMap& vm) {
    if (m.input_width() > 16)
        throw std::invalid_argument("check_inversion limited to width <= 16");
    EquivalenceReport report;
    const int cap = 1 << m.input_width();
    for (int label = 0; label < m.num_classes(); ++label) {
        std::vector<uint64_t> oracle = brute_force_preimage_masks(m, label);
        PreimageResult enumerated = enumerate_preimage(f, vm, label, cap);
        ++report.total_checked;
        std::set<uint64_t> oracle_set(oracle.begin(), oracle.end());
        std::set<uint64_t> enum_set;
        for (const BVec& x : enumerated.inputs)
            enum_set.insert(bvec_to_mask(x));
        if (oracle_set == enum_set && !enumerated.truncated)
            continue;
        uint64_t witness = 0;
        for (uint64_t w : oracle_set)
            if (!enum_set.count(w)) {
                witness = w;
                break;
            }
        for (uint64_t w : enum_set)
            if (!oracle_set.count(w)) {
                witness = w;
                break;
            }
        report.mismatches.push_back({mask_to_bvec(witness, m.input_width()),
                                     static_cast<int>(oracle_set.size()),
                                     static_cast<int>(enum_set.size())});
    }
    return report;
}

BnnModel random_model(const std::vector<int>& arch, uint64_t seed) {
    if (arch.size() < 2)
        throw std::invalid_argument("random_model: arch needs at least two layers");
    std::mt19937_64 rng(seed);
    auto sign = [&]() -> int8_t { return (rng() & 1) ? 1 : -1; };
    std::uniform_real_distribution<double> uni(-3.0, 3.0);
    // Biases that frequently land on or within a hair of integer boundaries,
    // to stress the rounding rules.
    auto boundary_bias = [&]() {
        double base = uni(rng);
        switch (rng() % 4) {
        case 0: return base;
        case 1: return std::floor(base);  // exact integer
        case 2: return std::floor(base) + 1e-12;
        default: return std::floor(base) - 1e-12;
        }
    };
    BnnModel m;
    m.arch = arch;
    const int n_inner = static_cast<int>(arch.size()) - 2;
    for (int k = 0; k < n_inner; ++k) {
        InnerBlock b;
        int in = arch[static_cast<size_t>(k)], out = arch[static_cast<size_t>(k) + 1];
        b.weights.resize(static_cast<size_t>(out));
        for (auto& row : b.weights) {
            row.resize(static_cast<size_t>(in));
            for (auto& e : row)
                e = sign();
        }
        for (int i = 0; i < out; ++i) {
            b.bias.push_back(boundary_bias());
            b.bn.mu.push_back(uni(rng) / 2.0);
            b.bn.sigma.push_back(rng() % 8 == 0 ? 0.0 : std::abs(uni(rng)) / 2.0);
            // alpha spans negative, exactly zero, and positive.
            double a;
            switch (rng() % 6) {
            case 0: a = 0.0; break;
            case 1:
            case 2: a = -std::abs(uni(rng)) - 0.1; break;
            default: a = std::abs(uni(rng)) + 0.1; break;
            }
            b.bn.alpha.push_back(a);
            b.bn.gamma.push_back(boundary_bias());
        }
        m.inner_blocks.push_back(std::move(b));
    }
    const int in = arch[arch.size() - 2], classes = arch.back();
    m.output_block.classes = classes;
    m.output_block.weights.resize(static_cast<size_t>(classes));
    for (auto& row : m.output_block.weights) {
        row.resize(static_cast<size_t>(in));
        for (auto& e : row)
            e = sign();
    }
    for (int i = 0; i < classes; ++i)
        m.output_block.bias.push_back(boundary_bias());
    m.validate();
    return m;
}

}  // namespace bnncnf
