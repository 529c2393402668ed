// Command-line driver for the BNN-to-CNF pipeline.
//
// Exit codes:
//   0   success (Sat where applicable)
//   1   runtime error (bad files, mismatched hash, internal failure)
//   20  UnsatLabel certificate from `invert` / Unsat from `solve`
//   10  Sat from `solve`
//   other nonzero: usage errors reported by the option parser

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bnncnf/dataset.hpp"
#include "bnncnf/encode.hpp"
#include "bnncnf/model.hpp"
#include "bnncnf/pgm.hpp"
#include "bnncnf/sample.hpp"
#include "bnncnf/solver.hpp"
#include "bnncnf/train.hpp"
#include "bnncnf/verify.hpp"

namespace fs = std::filesystem;
using namespace bnncnf;

namespace {

constexpr int kExitError = 1;
constexpr int kExitSat = 10;
constexpr int kExitUnsat = 20;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
}

std::vector<int> parse_arch(const std::string& s) {
    std::vector<int> arch;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        arch.push_back(std::stoi(tok));
    if (arch.size() < 2)
        throw CLI::ValidationError("--arch", "need at least two comma-separated widths");
    return arch;
}

// Loads a CNF + manifest pair, checking the manifest's hash of the DIMACS
// bytes so stale pairs are rejected.
std::pair<CnfFormula, VariableMap> load_cnf_and_manifest(const std::string& cnf_path,
                                                         const std::string& manifest_path) {
    std::string dimacs = read_file(cnf_path);
    VariableMap vm = load_manifest(manifest_path);
    if (fnv1a64_hex(dimacs) != vm.cnf_hash)
        throw std::runtime_error("manifest/cnf mismatch: " + manifest_path + " was not produced " +
                                 "from " + cnf_path);
    return {parse_dimacs(dimacs), vm};
}

BVec load_input_vector(const std::string& path, int expected_len) {
    std::string head = read_file(path);
    if (head.rfind("P5", 0) == 0) {
        int w, h;
        BVec x = load_pgm(path, w, h);
        if (static_cast<int>(x.size()) != expected_len)
            throw std::runtime_error("input image has " + std::to_string(x.size()) +
                                     " pixels, formula expects " + std::to_string(expected_len));
        return x;
    }
    BVec x;
    std::istringstream in(head);
    int v;
    while (in >> v) {
        if (v != 1 && v != -1)
            throw std::runtime_error("input vector entries must be +1 or -1");
        x.push_back(static_cast<int8_t>(v));
    }
    if (static_cast<int>(x.size()) != expected_len)
        throw std::runtime_error("input vector has " + std::to_string(x.size()) +
                                 " entries, formula expects " + std::to_string(expected_len));
    return x;
}

void infer_dims(int n_in, int& w, int& h) {
    if (w > 0 && h > 0)
        return;
    int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_in))));
    if (r * r == n_in) {
        w = h = r;
    } else {
        w = n_in;
        h = 1;
    }
}

int cmd_train(const std::string& data_dir, const std::string& arch_str, int epochs, int batch,
              double lr, double temperature, uint64_t seed, const std::string& out_path, int w,
              int h) {
    std::vector<int> arch = parse_arch(arch_str);
    infer_dims(arch.front(), w, h);
    if (w * h != arch.front())
        throw std::runtime_error("--width/--height do not match arch input width");

    RawDataset train_raw = load_idx(data_dir + "/train-images-idx3-ubyte",
                                    data_dir + "/train-labels-idx1-ubyte");
    RawDataset test_raw =
        load_idx(data_dir + "/t10k-images-idx3-ubyte", data_dir + "/t10k-labels-idx1-ubyte");
    Dataset train_set = binarize_dataset(train_raw, h, w);
    Dataset test_set = binarize_dataset(test_raw, h, w);

    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.learning_rate = lr;
    cfg.temperature = temperature;
    cfg.seed = seed;
    BnnModel model = train(train_set, arch, cfg);
    double train_acc = evaluate(model, train_set);
    double test_acc = evaluate(model, test_set);
    save_model(model, out_path);
    std::printf("train_accuracy=%.4f\n", train_acc);
    std::printf("test_accuracy=%.4f\n", test_acc);
    std::printf("model=%s\n", out_path.c_str());
    return 0;
}

int cmd_encode(const std::string& model_path, const std::string& cnf_path,
               const std::string& manifest_path, int w, int h) {
    BnnModel model = load_model(model_path);
    auto [formula, vm] = encode_bnn(model, w, h);
    write_file(cnf_path, emit_dimacs(formula));
    write_file(manifest_path, emit_manifest(vm));
    std::printf("variables=%d\n", vm.num_vars);
    std::printf("clauses=%d\n", vm.num_clauses);
    return 0;
}

int cmd_infer(const std::string& cnf_path, const std::string& manifest_path,
              const std::string& input_path) {
    auto [formula, vm] = load_cnf_and_manifest(cnf_path, manifest_path);
    BVec x = load_input_vector(input_path, vm.inputs.count);
    int label = infer_sat(formula, vm, x);
    std::printf("label=%d\n", label);
    return 0;
}

int cmd_invert(const std::string& cnf_path, const std::string& manifest_path,
               const std::string& model_path, int label, int samples, uint64_t seed, bool distinct,
               const std::string& out_dir) {
    auto [formula, vm] = load_cnf_and_manifest(cnf_path, manifest_path);
    BnnModel model = load_model(model_path);
    if (label < 0 || label >= vm.outputs.count)
        throw std::runtime_error("label out of range");

    InversionQuery q;
    q.target_label = label;
    q.num_samples = samples;
    q.seed = seed;
    q.distinct = distinct;
    InversionReport report = invert(model, formula, vm, q);

    fs::create_directories(out_dir);
    write_file(out_dir + "/report.json", report_to_json(report, label));
    for (size_t i = 0; i < report.inputs.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "/sample_%03zu.pgm", i);
        render_pgm(report.inputs[i], vm.image_width, vm.image_height, out_dir + name);
    }
    if (report.status == InversionStatus::UnsatLabel) {
        std::printf("status=unsat_label\n");
        return kExitUnsat;
    }
    std::printf("status=satisfiable\n");
    std::printf("samples=%zu\n", report.inputs.size());
    std::printf("distinct=%d\n", report.distinct_count);
    std::printf("mean_pairwise_hamming=%.3f\n", report.mean_pairwise_hamming);
    std::printf("all_verified=%s\n", report.all_verified() ? "true" : "false");
    return report.all_verified() ? 0 : kExitError;
}

int cmd_enumerate(const std::string& cnf_path, const std::string& manifest_path, int label,
                  int cap, const std::string& out_path) {
    auto [formula, vm] = load_cnf_and_manifest(cnf_path, manifest_path);
    PreimageResult res = enumerate_preimage(formula, vm, label, cap);
    std::printf("count=%zu\n", res.inputs.size());
    std::printf("truncated=%s\n", res.truncated ? "true" : "false");
    if (!out_path.empty()) {
        std::ostringstream ss;
        for (const BVec& x : res.inputs) {
            for (size_t p = 0; p < x.size(); ++p)
                ss << (p ? " " : "") << static_cast<int>(x[p]);
            ss << "\n";
        }
        write_file(out_path, ss.str());
    }
    return 0;
}

int cmd_verify(const std::string& model_path, const std::string& cnf_path,
               const std::string& manifest_path, const std::string& mode, int samples,
               uint64_t seed) {
    auto [formula, vm] = load_cnf_and_manifest(cnf_path, manifest_path);
    BnnModel model = load_model(model_path);
    bool exhaustive = mode == "exhaustive";
    EquivalenceReport inf =
        check_inference_equivalence(model, formula, vm, exhaustive, samples, seed);
    std::printf("inference_checked=%llu mismatches=%zu\n",
                static_cast<unsigned long long>(inf.total_checked), inf.mismatches.size());
    bool ok = inf.pass();
    if (exhaustive) {
        EquivalenceReport inv = check_inversion(model, formula, vm);
        std::printf("inversion_labels_checked=%llu mismatches=%zu\n",
                    static_cast<unsigned long long>(inv.total_checked), inv.mismatches.size());
        ok = ok && inv.pass();
    }
    std::printf("verdict=%s\n", ok ? "pass" : "fail");
    return ok ? 0 : kExitError;
}

int cmd_solve(const std::string& cnf_path, uint64_t seed, bool randomized) {
    CnfFormula f = parse_dimacs_file(cnf_path);
    Solver s(f);
    if (randomized)
        s.randomize(seed);
    SolveOutcome out = s.solve();
    std::printf("c conflicts=%llu decisions=%llu propagations=%llu\n",
                static_cast<unsigned long long>(out.conflicts),
                static_cast<unsigned long long>(out.decisions),
                static_cast<unsigned long long>(out.propagations));
    if (!out.sat()) {
        std::printf("s UNSATISFIABLE\n");
        return kExitUnsat;
    }
    std::printf("s SATISFIABLE\n");
    std::string line = "v";
    for (int v = 1; v <= f.num_vars; ++v) {
        line += " " + std::to_string(out.model[static_cast<size_t>(v)] ? v : -v);
        if (line.size() > 3800) {
            std::printf("%s\n", line.c_str());
            line = "v";
        }
    }
    line += " 0";
    std::printf("%s\n", line.c_str());
    return kExitSat;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train binarised neural networks, compile them to CNF, and run "
                 "inference/inversion queries with an embedded SAT solver"};
    app.require_subcommand(1);

    // train
    auto* t = app.add_subcommand("train", "train a BNN on IDX data and write a model file");
    std::string data_dir, arch = "100,20,10", model_out = "model.json";
    int epochs = 25, batch = 32, width = 0, height = 0;
    double lr = 0.01, temperature = 4.0;
    uint64_t seed = 1;
    t->add_option("--data-dir", data_dir, "directory with MNIST IDX files")->required();
    t->add_option("--arch", arch, "comma-separated layer widths");
    t->add_option("--epochs", epochs);
    t->add_option("--batch-size", batch);
    t->add_option("--lr", lr, "learning rate");
    t->add_option("--temperature", temperature, "softmax temperature on output logits");
    t->add_option("--seed", seed);
    t->add_option("--width", width, "input image width (default: sqrt of arch[0])");
    t->add_option("--height", height);
    t->add_option("--out", model_out, "output model file")->required();

    // encode
    auto* e = app.add_subcommand("encode", "compile a model into DIMACS CNF + manifest");
    std::string model_path, cnf_path, manifest_path;
    e->add_option("--model", model_path)->required();
    e->add_option("--out-cnf", cnf_path)->required();
    e->add_option("--out-manifest", manifest_path)->required();
    e->add_option("--width", width);
    e->add_option("--height", height);

    // infer
    auto* i = app.add_subcommand("infer", "run an inference query on the CNF encoding");
    std::string input_path;
    i->add_option("--cnf", cnf_path)->required();
    i->add_option("--manifest", manifest_path)->required();
    i->add_option("--input", input_path, "PGM image or text file of +-1 entries")->required();

    // invert
    auto* iv = app.add_subcommand("invert", "sample inputs for a target label (or certify "
                                            "the label unreachable, exit code 20)");
    int label = 0, samples = 100, cap = 1000;
    bool distinct = false;
    std::string out_dir = "inverted";
    iv->add_option("--cnf", cnf_path)->required();
    iv->add_option("--manifest", manifest_path)->required();
    iv->add_option("--model", model_path)->required();
    iv->add_option("--label", label)->required();
    iv->add_option("--samples", samples);
    iv->add_option("--seed", seed);
    iv->add_flag("--distinct", distinct, "block duplicate inputs");
    iv->add_option("--out-dir", out_dir, "directory for PGM samples and report.json");

    // enumerate
    auto* en = app.add_subcommand("enumerate", "enumerate all distinct inputs for a label");
    std::string enum_out;
    en->add_option("--cnf", cnf_path)->required();
    en->add_option("--manifest", manifest_path)->required();
    en->add_option("--label", label)->required();
    en->add_option("--cap", cap);
    en->add_option("--out", enum_out, "optional text file, one input per line");

    // verify
    auto* ve = app.add_subcommand("verify", "check CNF inference against the folded forward pass");
    std::string mode = "exhaustive";
    ve->add_option("--model", model_path)->required();
    ve->add_option("--cnf", cnf_path)->required();
    ve->add_option("--manifest", manifest_path)->required();
    ve->add_option("--mode", mode)->check(CLI::IsMember({"exhaustive", "random"}));
    ve->add_option("--samples", samples, "random-mode sample count");
    ve->add_option("--seed", seed);

    // solve
    auto* so = app.add_subcommand("solve", "solve a DIMACS file (s/v output protocol)");
    bool randomized = false;
    so->add_option("--cnf", cnf_path)->required();
    so->add_option("--seed", seed);
    so->add_flag("--randomized", randomized, "randomize decision heuristics");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed())
            return cmd_train(data_dir, arch, epochs, batch, lr, temperature, seed, model_out,
                             width, height);
        if (e->parsed())
            return cmd_encode(model_path, cnf_path, manifest_path, width, height);
        if (i->parsed())
            return cmd_infer(cnf_path, manifest_path, input_path);
        if (iv->parsed())
            return cmd_invert(cnf_path, manifest_path, model_path, label, samples, seed, distinct,
                              out_dir);
        if (en->parsed())
            return cmd_enumerate(cnf_path, manifest_path, label, cap, enum_out);
        if (ve->parsed())
            return cmd_verify(model_path, cnf_path, manifest_path, mode, samples, seed);
        if (so->parsed())
            return cmd_solve(cnf_path, seed, randomized);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return kExitError;
    }
    return kExitError;
}
