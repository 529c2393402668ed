#include "bnncnf/pgm.hpp"

#include <fstream>
#include <stdexcept>

namespace bnncnf {

void render_pgm(const BVec& x, int width, int height, const std::string& path) {
    if (static_cast<int>(x.size()) != width * height)
        throw std::invalid_argument("render_pgm: width*height != vector length");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << "P5\n" << width << " " << height << "\n255\n";
    for (int8_t e : x)
        out.put(e > 0 ? static_cast<char>(0xFF) : static_cast<char>(0x00));
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

BVec load_pgm(const std::string& path, int& width, int& height) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::string magic;
    int maxval;
    in >> magic >> width >> height >> maxval;
    if (!in || magic != "P5" || width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
        throw std::runtime_error("not a P5 PGM: " + path);
    in.get();  // single whitespace after maxval
    BVec x(static_cast<size_t>(width) * height);
    for (auto& e : x) {
        int c = in.get();
        if (c == EOF)
            throw std::runtime_error("truncated PGM: " + path);
        e = c >= 128 ? 1 : -1;
    }
    return x;
}

}  // namespace bnncnf
