#include "bnncnf/external_solver.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace bnncnf {

SolveOutcome external_solve(const std::string& dimacs_path, const std::string& solver_command) {
    std::string cmd = solver_command + " '" + dimacs_path + "' 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        throw std::runtime_error("external_solve: cannot run " + solver_command);
    std::string output;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0)
        output.append(buf, n);
    int rc = pclose(pipe);

    SolveOutcome out;
    bool verdict = false;
    std::vector<Lit> model_lits;
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("s ", 0) == 0) {
            if (line.find("UNSATISFIABLE") != std::string::npos) {
                out.status = SolveOutcome::Status::Unsat;
                verdict = true;
            } else if (line.find("SATISFIABLE") != std::string::npos) {
                out.status = SolveOutcome::Status::Sat;
                verdict = true;
            } else if (line.find("UNKNOWN") != std::string::npos) {
                out.status = SolveOutcome::Status::Limit;
                verdict = true;
            } else {
                throw std::runtime_error("external_solve: unrecognized verdict line: " + line);
            }
        } else if (line.rfind("v ", 0) == 0 || line == "v") {
            std::istringstream vs(line.substr(1));
            Lit l;
            while (vs >> l)
                if (l != 0)
                    model_lits.push_back(l);
        }
    }
    if (!verdict) {
        std::string why = rc != 0 ? "solver exited with status " + std::to_string(rc) : "";
        throw std::runtime_error("external_solve: no verdict in solver output. " + why);
    }
    if (out.status == SolveOutcome::Status::Sat) {
        int max_var = 0;
        for (Lit l : model_lits)
            max_var = std::max(max_var, std::abs(l));
        out.model.assign(static_cast<size_t>(max_var) + 1, 0);
        for (Lit l : model_lits)
            out.model[static_cast<size_t>(std::abs(l))] = l > 0 ? 1 : 0;
    }
    return out;
}

}  // namespace bnncnf
