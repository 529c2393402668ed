#include "bnncnf/cnf.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bnncnf {

void CnfFormula::add(Clause c) {
    for (Lit l : c) {
        if (l == 0)
            throw std::invalid_argument("clause contains literal 0");
        int v = l > 0 ? l : -l;
        if (v > num_vars)
            throw std::invalid_argument("clause references unallocated variable " +
                                        std::to_string(v));
    }
    clauses.push_back(std::move(c));
}

std::string emit_dimacs(const CnfFormula& f) {
    std::string out;
    out.reserve(32 + f.clauses.size() * 16);
    out += "p cnf " + std::to_string(f.num_vars) + " " + std::to_string(f.clauses.size()) + "\n";
    char buf[16];
    for (const Clause& c : f.clauses) {
        for (Lit l : c) {
            int n = std::snprintf(buf, sizeof buf, "%d ", l);
            out.append(buf, static_cast<size_t>(n));
        }
        out += "0\n";
    }
    return out;
}

CnfFormula parse_dimacs(const std::string& text) {
    std::istringstream in(text);
    CnfFormula f;
    bool header_seen = false;
    long declared_clauses = -1;
    std::string tok;
    Clause cur;
    while (in >> tok) {
        if (tok == "c") {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (tok == "p") {
            std::string kind;
            in >> kind >> f.num_vars >> declared_clauses;
            if (!in || kind != "cnf")
                throw std::runtime_error("malformed DIMACS header");
            header_seen = true;
            continue;
        }
        if (!header_seen)
            throw std::runtime_error("DIMACS clause before header");
        int l;
        try {
            l = std::stoi(tok);
        } catch (const std::exception&) {
            throw std::runtime_error("bad DIMACS token: " + tok);
        }
        if (l == 0) {
            f.add(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(l);
        }
    }
    if (!cur.empty())
        throw std::runtime_error("DIMACS: unterminated final clause");
    if (!header_seen)
        throw std::runtime_error("DIMACS: missing header");
    if (declared_clauses >= 0 && declared_clauses != static_cast<long>(f.clauses.size()))
        throw std::runtime_error("DIMACS: clause count mismatch");
    return f;
}

CnfFormula parse_dimacs_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_dimacs(ss.str());
}

bool satisfies(const CnfFormula& f, const std::vector<uint8_t>& assignment) {
    if (static_cast<int>(assignment.size()) < f.num_vars + 1)
        return false;
    for (const Clause& c : f.clauses) {
        bool sat = false;
        for (Lit l : c) {
            int v = l > 0 ? l : -l;
            if (assignment[static_cast<size_t>(v)] == (l > 0 ? 1 : 0)) {
                sat = true;
                break;
            }
        }
        if (!sat)
            return false;
    }
    return true;
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string("fnv1a64:") + buf;
}

}  // namespace bnncnf
