#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "bnncnf/model.hpp"
#include "bnncnf/verify.hpp"

using namespace bnncnf;
namespace fs = std::filesystem;

namespace {

#ifndef BNNCNF_BIN
#error "BNNCNF_BIN must point at the CLI binary"
#endif
#ifndef BNNCNF_DATA_DIR
#error "BNNCNF_DATA_DIR must point at the IDX data directory"
#endif

const std::string kBin = BNNCNF_BIN;
const std::string kData = BNNCNF_DATA_DIR;
const std::string kWork = "/tmp/bnncnf_cli_test";

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = kBin + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0)
        out.append(buf, n);
    int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("CLI pipeline end to end") {
    fs::create_directories(kWork);
    const std::string model = kWork + "/m.json";
    const std::string cnf = kWork + "/m.cnf";
    const std::string manifest = kWork + "/m.manifest.json";

    // train a quick underfit 5x5 model
    RunResult t = run("train --data-dir " + kData +
                      " --arch 25,10 --epochs 2 --seed 1 --out " + model);
    CHECK(t.exit_code == 0);
    CHECK(t.out.find("train_accuracy=") != std::string::npos);
    CHECK(t.out.find("test_accuracy=") != std::string::npos);
    REQUIRE(fs::exists(model));

    RunResult e = run("encode --model " + model + " --out-cnf " + cnf + " --out-manifest " +
                      manifest);
    CHECK(e.exit_code == 0);
    CHECK(e.out.find("variables=") != std::string::npos);
    CHECK(e.out.find("clauses=") != std::string::npos);
    REQUIRE(fs::exists(cnf));
    REQUIRE(fs::exists(manifest));

    // infer from a text vector
    const std::string vec = kWork + "/x.txt";
    {
        std::ofstream out(vec);
        for (int i = 0; i < 25; ++i)
            out << (i % 3 == 0 ? "1" : "-1") << " ";
    }
    RunResult inf = run("infer --cnf " + cnf + " --manifest " + manifest + " --input " + vec);
    CHECK(inf.exit_code == 0);
    REQUIRE(inf.out.find("label=") != std::string::npos);
    int label = std::stoi(inf.out.substr(inf.out.find("label=") + 6));

    // that label is reachable, so inversion must succeed
    const std::string inv_dir = kWork + "/inv";
    RunResult inv = run("invert --cnf " + cnf + " --manifest " + manifest + " --model " + model +
                        " --label " + std::to_string(label) + " --samples 3 --seed 2 --out-dir " +
                        inv_dir);
    CHECK(inv.exit_code == 0);
    CHECK(inv.out.find("status=satisfiable") != std::string::npos);
    CHECK(inv.out.find("all_verified=true") != std::string::npos);
    REQUIRE(fs::exists(inv_dir + "/report.json"));
    REQUIRE(fs::exists(inv_dir + "/sample_000.pgm"));

    // round-trip: a rendered witness infers back to the target label
    RunResult back = run("infer --cnf " + cnf + " --manifest " + manifest + " --input " +
                         inv_dir + "/sample_000.pgm");
    CHECK(back.exit_code == 0);
    CHECK(back.out.find("label=" + std::to_string(label)) != std::string::npos);

    RunResult en = run("enumerate --cnf " + cnf + " --manifest " + manifest + " --label " +
                       std::to_string(label) + " --cap 2");
    CHECK(en.exit_code == 0);
    CHECK(en.out.find("count=") != std::string::npos);
    CHECK(en.out.find("truncated=") != std::string::npos);

    // stale manifest is rejected via the hash check
    const std::string tampered = kWork + "/tampered.cnf";
    std::ofstream(tampered) << slurp(cnf) << "c extra\n";
    RunResult bad = run("infer --cnf " + tampered + " --manifest " + manifest + " --input " + vec);
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("mismatch") != std::string::npos);
}

TEST_CASE("CLI verify --mode exhaustive on a toy model") {
    fs::create_directories(kWork);
    BnnModel m = random_model({6, 4, 3}, 33);
    const std::string model = kWork + "/toy.json";
    save_model(m, model);
    const std::string cnf = kWork + "/toy.cnf";
    const std::string manifest = kWork + "/toy.manifest.json";
    REQUIRE(run("encode --model " + model + " --out-cnf " + cnf + " --out-manifest " + manifest)
                .exit_code == 0);

    RunResult v = run("verify --model " + model + " --cnf " + cnf + " --manifest " + manifest +
                      " --mode exhaustive");
    CHECK(v.exit_code == 0);
    CHECK(v.out.find("verdict=pass") != std::string::npos);

    RunResult vr = run("verify --model " + model + " --cnf " + cnf + " --manifest " + manifest +
                       " --mode random --samples 40 --seed 7");
    CHECK(vr.exit_code == 0);
    CHECK(vr.out.find("verdict=pass") != std::string::npos);
}

TEST_CASE("CLI invert yields the UnsatLabel exit code on an unreachable label") {
    fs::create_directories(kWork);
    // constant-output model: label 1 is unreachable
    BnnModel m;
    m.arch = {4, 2};
    m.output_block.weights = {{1, 1, 1, 1}, {1, 1, 1, 1}};
    m.output_block.bias = {10.0, 0.0};
    m.output_block.classes = 2;
    const std::string model = kWork + "/const.json";
    save_model(m, model);
    const std::string cnf = kWork + "/const.cnf";
    const std::string manifest = kWork + "/const.manifest.json";
    REQUIRE(run("encode --model " + model + " --out-cnf " + cnf + " --out-manifest " + manifest)
                .exit_code == 0);

    RunResult inv = run("invert --cnf " + cnf + " --manifest " + manifest + " --model " + model +
                        " --label 1 --samples 5 --out-dir " + kWork + "/const_inv");
    CHECK(inv.exit_code == 20);
    CHECK(inv.out.find("status=unsat_label") != std::string::npos);

    RunResult oob = run("invert --cnf " + cnf + " --manifest " + manifest + " --model " + model +
                        " --label 9 --samples 1 --out-dir " + kWork + "/oob");
    CHECK(oob.exit_code == 1);
    CHECK(oob.out.find("label out of range") != std::string::npos);
}

TEST_CASE("CLI solve exit codes and s/v protocol") {
    fs::create_directories(kWork);
    const std::string sat_cnf = kWork + "/sat.cnf";
    std::ofstream(sat_cnf) << "p cnf 2 1\n1 -2 0\n";
    RunResult s = run("solve --cnf " + sat_cnf);
    CHECK(s.exit_code == 10);
    CHECK(s.out.find("s SATISFIABLE") != std::string::npos);
    CHECK(s.out.find("\nv ") != std::string::npos);

    const std::string unsat_cnf = kWork + "/unsat.cnf";
    std::ofstream(unsat_cnf) << "p cnf 1 2\n1 0\n-1 0\n";
    RunResult u = run("solve --cnf " + unsat_cnf);
    CHECK(u.exit_code == 20);
    CHECK(u.out.find("s UNSATISFIABLE") != std::string::npos);

    RunResult r1 = run("solve --cnf " + sat_cnf + " --randomized --seed 5");
    RunResult r2 = run("solve --cnf " + sat_cnf + " --randomized --seed 5");
    CHECK(r1.exit_code == 10);
    CHECK(r1.out == r2.out);
}

TEST_CASE("CLI usage errors exit nonzero") {
    CHECK(run("train --data-dir " + kData + " --arch 100 --out /tmp/x.json").exit_code != 0);
    CHECK(run("nonsense").exit_code != 0);
    CHECK(run("train --out /tmp/x.json").exit_code != 0);  // missing --data-dir
    CHECK(run("infer --cnf /nonexistent.cnf --manifest /nonexistent.json --input /dev/null")
              .exit_code == 1);
}
