#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bnncnf {

// Literals follow the DIMACS convention: variables are positive integers,
// a negative value denotes negation, 0 is reserved as clause terminator.
using Lit = int;
using Clause = std::vector<Lit>;

struct CnfFormula {
    int num_vars = 0;
    std::vector<Clause> clauses;

    int new_var() { return ++num_vars; }

    // Appends a clause. Every literal must reference an allocated variable.
    void add(Clause c);
};

std::string emit_dimacs(const CnfFormula& f);
CnfFormula parse_dimacs(const std::string& text);
CnfFormula parse_dimacs_file(const std::string& path);

// Evaluates a complete assignment against every clause. assignment[v] is
// the truth value of variable v (index 0 unused). Kept independent of the
// solver so it can vet solver models.
bool satisfies(const CnfFormula& f, const std::vector<uint8_t>& assignment);

uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace bnncnf
