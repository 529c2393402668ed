#pragma once

#include <string>

#include "bnncnf/solver.hpp"

namespace bnncnf {

// Runs `solver_command <dimacs_path>` and parses the standard SAT-solver
// stdout protocol: an "s SATISFIABLE"/"s UNSATISFIABLE" verdict line and,
// for Sat, "v" lines listing the model terminated by 0. Throws
// std::runtime_error on malformed output or a missing verdict.
SolveOutcome external_solve(const std::string& dimacs_path, const std::string& solver_command);

}  // namespace bnncnf
