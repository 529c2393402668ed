#pragma once

#include <string>

#include "bnncnf/model.hpp"

namespace bnncnf {

// Binary PGM (P5): +1 -> 255, -1 -> 0. Byte-deterministic.
void render_pgm(const BVec& x, int width, int height, const std::string& path);

// Inverse of render_pgm: pixel >= 128 -> +1. Returns dimensions via out
// parameters.
BVec load_pgm(const std::string& path, int& width, int& height);

}  // namespace bnncnf
