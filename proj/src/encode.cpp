#include "bnncnf/encode.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bnncnf {

namespace {

int floor_div2(int a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }
int ceil_div2(int a) { return a >= 0 ? (a + 1) / 2 : -((-a) / 2); }

}  // namespace

CardConstraint dot_to_card(std::span<const int8_t> row, std::span<const Lit> input_lits,
                           int threshold, Sense sense) {
    if (row.size() != input_lits.size())
        throw std::invalid_argument("dot_to_card: row/literal length mismatch");
    const int n = static_cast<int>(row.size());
#ifndef NDEBUG
    {
        std::set<int> vars;
        for (Lit l : input_lits)
            assert(vars.insert(std::abs(l)).second && "duplicate variable in cardinality");
    }
#endif
    CardConstraint cc;
    cc.lits.reserve(row.size());
    int bound;
    if (sense == Sense::AtLeast) {
        // <a,x> >= C  <=>  #satisfied >= ceil((C+n)/2)
        for (size_t p = 0; p < row.size(); ++p)
            cc.lits.push_back(row[p] > 0 ? input_lits[p] : -input_lits[p]);
        bound = ceil_div2(threshold + n);
    } else {
        // <a,x> <= C  <=>  #unsatisfied >= n - floor((C+n)/2)
        for (size_t p = 0; p < row.size(); ++p)
            cc.lits.push_back(row[p] > 0 ? -input_lits[p] : input_lits[p]);
        bound = n - floor_div2(threshold + n);
    }
    cc.bound = std::clamp(bound, 0, n + 1);
    return cc;
}

namespace {

enum class TV { True, False, Var };

struct CellRef {
    TV tv = TV::False;
    Lit lit = 0;
};

// Emits clauses for y <=> a | (b & c); `full` adds both directions,
// otherwise only y => a | (b & c).
void define_or_and(Lit y, CellRef a, CellRef b, Lit c, bool full, CnfFormula& f) {
    assert(a.tv != TV::True && b.tv != TV::False);
    if (full) {
        if (a.tv == TV::Var)
            f.add({-a.lit, y});
        if (b.tv == TV::Var)
            f.add({-b.lit, -c, y});
        else
            f.add({-c, y});
    }
    if (b.tv == TV::Var) {
        if (a.tv == TV::Var)
            f.add({-y, a.lit, b.lit});
        else
            f.add({-y, b.lit});
    }
    if (a.tv == TV::Var)
        f.add({-y, a.lit, c});
    else
        f.add({-y, c});
}

}  // namespace

int seq_counter(const CardConstraint& c, CnfFormula& f) {
    const int n = static_cast<int>(c.lits.size());
    const int k = c.bound;
    if (c.reify) {
        Lit r = *c.reify;
        if (k <= 0) {
            f.add({r});
            return 0;
        }
        if (k > n) {
            f.add({-r});
            return 0;
        }
    } else {
        if (k <= 0)
            return 0;
        if (k > n) {
            f.add({});  // contradiction
            return 0;
        }
    }

    // Register s[i][j] <=> at least j of the first i literals are true,
    // for j in [max(1, k-(n-i)), min(i, k)]. The top-right register is the
    // reification literal when present.
    auto jlo = [&](int i) { return std::max(1, k - (n - i)); };
    auto jhi = [&](int i) { return std::min(i, k); };
    std::vector<std::vector<Lit>> reg(static_cast<size_t>(n) + 1);
    int aux = 0;
    for (int i = 1; i <= n; ++i) {
        reg[static_cast<size_t>(i)].resize(static_cast<size_t>(jhi(i) - jlo(i) + 1));
        for (int j = jlo(i); j <= jhi(i); ++j) {
            if (i == n && j == k && c.reify) {
                reg[static_cast<size_t>(i)][static_cast<size_t>(j - jlo(i))] = *c.reify;
            } else {
                reg[static_cast<size_t>(i)][static_cast<size_t>(j - jlo(i))] = f.new_var();
                ++aux;
            }
        }
    }
    auto cell = [&](int i, int j) -> CellRef {
        if (j <= 0)
            return {TV::True, 0};
        if (j > i)
            return {TV::False, 0};
        assert(i >= 1 && j >= jlo(i) && j <= jhi(i));
        return {TV::Var, reg[static_cast<size_t>(i)][static_cast<size_t>(j - jlo(i))]};
    };

    const bool full = c.reify.has_value();
    for (int i = 1; i <= n; ++i) {
        for (int j = jlo(i); j <= jhi(i); ++j) {
            Lit y = cell(i, j).lit;
            // s[i][j] <=> s[i-1][j] | (s[i-1][j-1] & lit_i)
            define_or_and(y, cell(i - 1, j), cell(i - 1, j - 1), c.lits[static_cast<size_t>(i - 1)],
                          full, f);
        }
    }
    if (!c.reify)
        f.add({cell(n, k).lit});
    return aux;
}

void encode_inner_block(const InnerBlock& block, std::span<const Lit> input_lits,
                        std::span<const Lit> hidden_vars, CnfFormula& f) {
    if (block.in_dim() != input_lits.size() || block.out_dim() != hidden_vars.size())
        throw std::invalid_argument("encode_inner_block: dimension mismatch");
    for (size_t i = 0; i < block.out_dim(); ++i) {
        Lit v = hidden_vars[i];
        NeuronThreshold t = fold_neuron(block, i);
        switch (t.kind) {
        case ThresholdKind::ConstPlus:
            f.add({v});
            break;
        case ThresholdKind::ConstMinus:
            f.add({-v});
            break;
        case ThresholdKind::AtLeast:
        case ThresholdKind::AtMost: {
            CardConstraint cc =
                dot_to_card(block.weights[i], input_lits, t.threshold,
                            t.kind == ThresholdKind::AtLeast ? Sense::AtLeast : Sense::AtMost);
            cc.reify = v;
            seq_counter(cc, f);
            break;
        }
        }
    }
}

namespace {

// Index of b_ij among the c*(c-1) ordered-pair comparator variables.
int pair_index(int i, int j, int c) {
    assert(i != j);
    return i * (c - 1) + (j < i ? j : j - 1);
}

}  // namespace

void encode_output_block(const OutputBlock& block, std::span<const Lit> input_lits,
                         std::span<const Lit> output_vars, std::span<const Lit> comparator_vars,
                         CnfFormula& f) {
    const int c = block.classes;
    if (block.in_dim() != input_lits.size() || static_cast<int>(output_vars.size()) != c)
        throw std::invalid_argument("encode_output_block: dimension mismatch");
    if (c == 1) {
        f.add({output_vars[0]});  // argmax over one class is a tautology
        return;
    }
    if (static_cast<int>(comparator_vars.size()) != c * (c - 1))
        throw std::invalid_argument("encode_output_block: comparator count mismatch");

    const size_t n = block.in_dim();
    for (int i = 0; i < c; ++i) {
        for (int j = 0; j < c; ++j) {
            if (i == j)
                continue;
            Lit b = comparator_vars[pair_index(i, j, c)];
            // b_ij <=> <a_i - a_j, x> >= [b_j - b_i]; the difference row has
            // entries in {-2,0,+2}, so only differing positions matter and
            // the threshold halves.
            std::vector<int8_t> sub_row;
            std::vector<Lit> sub_lits;
            for (size_t p = 0; p < n; ++p) {
                if (block.weights[i][p] != block.weights[j][p]) {
                    sub_row.push_back(block.weights[i][p]);
                    sub_lits.push_back(input_lits[p]);
                }
            }
            int t = comparator_threshold(block.bias[i], block.bias[j]);
            if (sub_row.empty()) {
                f.add({0 >= t ? b : -b});
                continue;
            }
            CardConstraint cc = dot_to_card(sub_row, sub_lits, t, Sense::AtLeast);
            cc.reify = b;
            seq_counter(cc, f);
        }
    }

    // o_i <=> (AND_{j<i} !b_ji) & (AND_{j>i} b_ij): strict win against
    // earlier classes, non-strict against later ones.
    for (int i = 0; i < c; ++i) {
        Clause back{output_vars[i]};
        for (int j = 0; j < c; ++j) {
            if (j == i)
                continue;
            if (j < i) {
                Lit bji = comparator_vars[pair_index(j, i, c)];
                f.add({-output_vars[i], -bji});
                back.push_back(bji);
            } else {
                Lit bij = comparator_vars[pair_index(i, j, c)];
                f.add({-output_vars[i], bij});
                back.push_back(-bij);
            }
        }
        f.add(std::move(back));
    }

    // Exactly-one over the indicators; implied by the comparator semantics
    // but asserted for the solver.
    Clause any(output_vars.begin(), output_vars.end());
    f.add(std::move(any));
    for (int i = 0; i < c; ++i)
        for (int j = i + 1; j < c; ++j)
            f.add({-output_vars[i], -output_vars[j]});
}

std::pair<CnfFormula, VariableMap> encode_bnn(const BnnModel& m, int image_width,
                                              int image_height) {
    m.validate();
    const int n_in = m.input_width();
    const int c = m.num_classes();

    CnfFormula f;
    VariableMap vm;
    vm.inputs = {1, n_in};
    vm.outputs = {n_in + 1, c};
    f.num_vars = n_in + c;
    for (const InnerBlock& b : m.inner_blocks) {
        VarRange r{f.num_vars + 1, static_cast<int>(b.out_dim())};
        f.num_vars += r.count;
        vm.hidden.push_back(r);
    }
    const int n_cmp = c > 1 ? c * (c - 1) : 0;
    vm.comparators = {f.num_vars + 1, n_cmp};
    f.num_vars += n_cmp;
    const int aux_first = f.num_vars + 1;

    std::vector<Lit> cur(static_cast<size_t>(n_in));
    for (int p = 0; p < n_in; ++p)
        cur[static_cast<size_t>(p)] = vm.input_var(p);
    for (size_t k = 0; k < m.inner_blocks.size(); ++k) {
        std::vector<Lit> hv(static_cast<size_t>(vm.hidden[k].count));
        for (int i = 0; i < vm.hidden[k].count; ++i)
            hv[static_cast<size_t>(i)] = vm.hidden[k].first + i;
        encode_inner_block(m.inner_blocks[k], cur, hv, f);
        cur = std::move(hv);
    }
    std::vector<Lit> ov(static_cast<size_t>(c));
    for (int i = 0; i < c; ++i)
        ov[static_cast<size_t>(i)] = vm.output_var(i);
    std::vector<Lit> cv(static_cast<size_t>(n_cmp));
    for (int i = 0; i < n_cmp; ++i)
        cv[static_cast<size_t>(i)] = vm.comparators.first + i;
    encode_output_block(m.output_block, cur, ov, cv, f);

    vm.aux = {aux_first, f.num_vars - aux_first + 1};
    vm.num_vars = f.num_vars;
    vm.num_clauses = static_cast<int>(f.clauses.size());
    if (image_width > 0 && image_height > 0) {
        vm.image_width = image_width;
        vm.image_height = image_height;
    } else {
        int w = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_in))));
        if (w * w == n_in) {
            vm.image_width = vm.image_height = w;
        } else {
            vm.image_width = n_in;
            vm.image_height = 1;
        }
    }
    vm.cnf_hash = fnv1a64_hex(emit_dimacs(f));
    return {std::move(f), std::move(vm)};
}

namespace {

using nlohmann::json;

json range_to_json(const VarRange& r) { return json{{"first", r.first}, {"count", r.count}}; }

VarRange range_from_json(const json& j) {
    return {j.at("first").get<int>(), j.at("count").get<int>()};
}

}  // namespace

std::string emit_manifest(const VariableMap& vm) {
    json j;
    j["num_vars"] = vm.num_vars;
    j["num_clauses"] = vm.num_clauses;
    j["image_width"] = vm.image_width;
    j["image_height"] = vm.image_height;
    j["inputs"] = range_to_json(vm.inputs);
    j["outputs"] = range_to_json(vm.outputs);
    j["hidden"] = json::array();
    for (const VarRange& r : vm.hidden)
        j["hidden"].push_back(range_to_json(r));
    j["comparators"] = range_to_json(vm.comparators);
    j["aux"] = range_to_json(vm.aux);
    j["cnf_hash"] = vm.cnf_hash;
    return j.dump(2) + "\n";
}

VariableMap parse_manifest(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed manifest: ") + e.what());
    }
    VariableMap vm;
    try {
        vm.num_vars = j.at("num_vars").get<int>();
        vm.num_clauses = j.at("num_clauses").get<int>();
        vm.image_width = j.at("image_width").get<int>();
        vm.image_height = j.at("image_height").get<int>();
        vm.inputs = range_from_json(j.at("inputs"));
        vm.outputs = range_from_json(j.at("outputs"));
        for (const auto& r : j.at("hidden"))
            vm.hidden.push_back(range_from_json(r));
        vm.comparators = range_from_json(j.at("comparators"));
        vm.aux = range_from_json(j.at("aux"));
        vm.cnf_hash = j.at("cnf_hash").get<std::string>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed manifest: ") + e.what());
    }
    return vm;
}

VariableMap load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open manifest " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str());
}

}  // namespace bnncnf
