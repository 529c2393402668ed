#include "bnncnf/model.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bnncnf {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond)
        throw std::invalid_argument(msg);
}

void check_sign_matrix(const std::vector<std::vector<int8_t>>& w, size_t rows, size_t cols,
                       const std::string& where) {
    require(w.size() == rows, where + ": wrong row count");
    for (const auto& row : w) {
        require(row.size() == cols, where + ": ragged or mis-sized row");
        for (int8_t e : row)
            require(e == 1 || e == -1, where + ": weight entry not in {-1,+1}");
    }
}

}  // namespace

void BnnModel::validate() const {
    require(arch.size() >= 2, "arch needs at least input and output widths");
    for (int w : arch)
        require(w >= 1, "arch widths must be positive");
    require(inner_blocks.size() == arch.size() - 2, "inner block count does not match arch");
    for (size_t k = 0; k < inner_blocks.size(); ++k) {
        const InnerBlock& b = inner_blocks[k];
        size_t in = static_cast<size_t>(arch[k]);
        size_t out = static_cast<size_t>(arch[k + 1]);
        check_sign_matrix(b.weights, out, in, "inner block " + std::to_string(k));
        require(b.bias.size() == out, "inner block bias size mismatch");
        require(b.bn.mu.size() == out && b.bn.sigma.size() == out && b.bn.alpha.size() == out &&
                    b.bn.gamma.size() == out,
                "batch-norm vector size mismatch");
        for (double s : b.bn.sigma)
            require(s >= 0.0, "batch-norm sigma must be >= 0");
        require(b.bn.epsilon > 0.0, "batch-norm epsilon must be > 0");
    }
    const OutputBlock& o = output_block;
    size_t in = static_cast<size_t>(arch[arch.size() - 2]);
    size_t c = static_cast<size_t>(arch.back());
    require(o.classes == static_cast<int>(c), "output classes disagree with arch");
    check_sign_matrix(o.weights, c, in, "output block");
    require(o.bias.size() == c, "output bias size mismatch");
}

int8_t sign_step(double z) {
    if (!std::isfinite(z))
        throw std::invalid_argument("sign_step: non-finite input");
    return z >= 0.0 ? int8_t{1} : int8_t{-1};
}

NeuronThreshold fold_neuron(std::span<const int8_t> weights_row, double bias, double mu,
                            double sigma, double alpha, double gamma, double epsilon) {
    require(sigma >= 0.0, "fold_neuron: sigma must be >= 0");
    require(epsilon > 0.0, "fold_neuron: epsilon must be > 0");
    if (alpha == 0.0)
        return {gamma >= 0.0 ? ThresholdKind::ConstPlus : ThresholdKind::ConstMinus, 0};
    // sign(alpha*(s + bias - mu)/(sigma+eps) + gamma) over integer s = <a,x>.
    double r = mu - gamma * (sigma + epsilon) / alpha;
    double t = r - bias;
    long long n = static_cast<long long>(weights_row.size());
    long long c;
    if (alpha > 0.0)
        c = static_cast<long long>(std::ceil(t));
    else
        c = static_cast<long long>(std::floor(t));
    if (c < -n - 1)
        c = -n - 1;
    if (c > n + 1)
        c = n + 1;
    return {alpha > 0.0 ? ThresholdKind::AtLeast : ThresholdKind::AtMost, static_cast<int>(c)};
}

NeuronThreshold fold_neuron(const InnerBlock& block, size_t i) {
    return fold_neuron(block.weights[i], block.bias[i], block.bn.mu[i], block.bn.sigma[i],
                       block.bn.alpha[i], block.bn.gamma[i], block.bn.epsilon);
}

bool threshold_holds(const NeuronThreshold& t, int s) {
    switch (t.kind) {
    case ThresholdKind::AtLeast: return s >= t.threshold;
    case ThresholdKind::AtMost: return s <= t.threshold;
    case ThresholdKind::ConstPlus: return true;
    case ThresholdKind::ConstMinus: return false;
    }
    return false;
}

int comparator_threshold(double bias_i, double bias_j) {
    return static_cast<int>(std::ceil((bias_j - bias_i) / 2.0));
}

bool logit_ge(int s_i, int s_j, double bias_i, double bias_j) {
    assert((s_i - s_j) % 2 == 0);
    return (s_i - s_j) / 2 >= comparator_threshold(bias_i, bias_j);
}

int dot(std::span<const int8_t> row, const BVec& x) {
    assert(row.size() == x.size());
    int s = 0;
    for (size_t p = 0; p < row.size(); ++p)
        s += static_cast<int>(row[p]) * static_cast<int>(x[p]);
    return s;
}

int folded_argmax(const OutputBlock& out, const std::vector<int>& s) {
    const int c = out.classes;
    if (c == 1)
        return 0;
    for (int i = 0; i < c; ++i) {
        bool wins = true;
        for (int j = 0; j < i && wins; ++j)
            wins = !logit_ge(s[j], s[i], out.bias[j], out.bias[i]);  // l_i > l_j
        for (int j = i + 1; j < c && wins; ++j)
            wins = logit_ge(s[i], s[j], out.bias[i], out.bias[j]);
        if (wins)
            return i;
    }
    // The rounded comparator relation is a total preorder, so a lowest-index
    // maximal class always exists.
    assert(false && "no argmax winner");
    return 0;
}

ReferenceResult forward_reference(const BnnModel& m, const BVec& x) {
    if (static_cast<int>(x.size()) != m.input_width())
        throw std::invalid_argument("forward_reference: input width mismatch");
    BVec cur = x;
    for (const InnerBlock& b : m.inner_blocks) {
        BVec next(b.out_dim());
        for (size_t i = 0; i < b.out_dim(); ++i) {
            double y = dot(b.weights[i], cur) + b.bias[i];
            double z = (y - b.bn.mu[i]) / (b.bn.sigma[i] + b.bn.epsilon) * b.bn.alpha[i] +
                       b.bn.gamma[i];
            next[i] = sign_step(z);
        }
        cur = std::move(next);
    }
    const OutputBlock& o = m.output_block;
    ReferenceResult res;
    res.logits.resize(o.classes);
    for (int i = 0; i < o.classes; ++i)
        res.logits[i] = dot(o.weights[i], cur) + o.bias[i];
    res.label = 0;
    for (int i = 1; i < o.classes; ++i)
        if (res.logits[i] > res.logits[res.label])
            res.label = i;
    return res;
}

FoldedResult forward_folded(const BnnModel& m, const BVec& x) {
    if (static_cast<int>(x.size()) != m.input_width())
        throw std::invalid_argument("forward_folded: input width mismatch");
    FoldedResult res;
    BVec cur = x;
    for (const InnerBlock& b : m.inner_blocks) {
        BVec next(b.out_dim());
        for (size_t i = 0; i < b.out_dim(); ++i)
            next[i] = threshold_holds(fold_neuron(b, i), dot(b.weights[i], cur)) ? 1 : -1;
        res.hidden.push_back(next);
        cur = std::move(next);
    }
    const OutputBlock& o = m.output_block;
    std::vector<int> s(o.classes);
    for (int i = 0; i < o.classes; ++i)
        s[i] = dot(o.weights[i], cur);
    res.label = folded_argmax(o, s);
    return res;
}

namespace {

using nlohmann::json;

json matrix_to_json(const std::vector<std::vector<int8_t>>& w) {
    json rows = json::array();
    for (const auto& r : w) {
        json row = json::array();
        for (int8_t e : r)
            row.push_back(static_cast<int>(e));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<int8_t>> matrix_from_json(const json& j) {
    std::vector<std::vector<int8_t>> w;
    for (const auto& row : j) {
        std::vector<int8_t> r;
        for (const auto& e : row)
            r.push_back(static_cast<int8_t>(e.get<int>()));
        w.push_back(std::move(r));
    }
    return w;
}

}  // namespace

std::string model_to_json(const BnnModel& m) {
    json j;
    j["arch"] = m.arch;
    j["inner_blocks"] = json::array();
    for (const InnerBlock& b : m.inner_blocks) {
        json jb;
        jb["weights"] = matrix_to_json(b.weights);
        jb["bias"] = b.bias;
        jb["bn"] = {{"mu", b.bn.mu},       {"sigma", b.bn.sigma}, {"alpha", b.bn.alpha},
                    {"gamma", b.bn.gamma}, {"epsilon", b.bn.epsilon}};
        j["inner_blocks"].push_back(std::move(jb));
    }
    j["output_block"] = {{"weights", matrix_to_json(m.output_block.weights)},
                         {"bias", m.output_block.bias},
                         {"classes", m.output_block.classes}};
    return j.dump(2) + "\n";
}

BnnModel model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed model file: ") + e.what());
    }
    BnnModel m;
    try {
        m.arch = j.at("arch").get<std::vector<int>>();
        for (const auto& jb : j.at("inner_blocks")) {
            InnerBlock b;
            b.weights = matrix_from_json(jb.at("weights"));
            b.bias = jb.at("bias").get<std::vector<double>>();
            const auto& bn = jb.at("bn");
            b.bn.mu = bn.at("mu").get<std::vector<double>>();
            b.bn.sigma = bn.at("sigma").get<std::vector<double>>();
            b.bn.alpha = bn.at("alpha").get<std::vector<double>>();
            b.bn.gamma = bn.at("gamma").get<std::vector<double>>();
            b.bn.epsilon = bn.at("epsilon").get<double>();
            m.inner_blocks.push_back(std::move(b));
        }
        const auto& jo = j.at("output_block");
        m.output_block.weights = matrix_from_json(jo.at("weights"));
        m.output_block.bias = jo.at("bias").get<std::vector<double>>();
        m.output_block.classes = jo.at("classes").get<int>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed model file: ") + e.what());
    }
    m.validate();
    return m;
}

BnnModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open model file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

void save_model(const BnnModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write model file " + path);
    out << model_to_json(m);
}

}  // namespace bnncnf
