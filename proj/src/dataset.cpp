#include "bnncnf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace bnncnf {

namespace {

uint32_t read_be32(std::istream& in, const std::string& path, long offset) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw std::runtime_error(path + ": truncated at offset " + std::to_string(offset));
    return (uint32_t{b[0]} << 24) | (uint32_t{b[1]} << 16) | (uint32_t{b[2]} << 8) | uint32_t{b[3]};
}

}  // namespace

RawDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs)
        throw std::runtime_error("cannot open " + images_path);
    std::ifstream lbls(labels_path, std::ios::binary);
    if (!lbls)
        throw std::runtime_error("cannot open " + labels_path);

    uint32_t magic = read_be32(imgs, images_path, 0);
    if (magic != 0x00000803u)
        throw std::runtime_error(images_path + ": bad IDX image magic at offset 0");
    uint32_t n_img = read_be32(imgs, images_path, 4);
    uint32_t rows = read_be32(imgs, images_path, 8);
    uint32_t cols = read_be32(imgs, images_path, 12);

    uint32_t lmagic = read_be32(lbls, labels_path, 0);
    if (lmagic != 0x00000801u)
        throw std::runtime_error(labels_path + ": bad IDX label magic at offset 0");
    uint32_t n_lbl = read_be32(lbls, labels_path, 4);
    if (n_img != n_lbl)
        throw std::runtime_error("IDX count mismatch: " + std::to_string(n_img) + " images vs " +
                                 std::to_string(n_lbl) + " labels");

    RawDataset d;
    d.rows = static_cast<int>(rows);
    d.cols = static_cast<int>(cols);
    d.images.reserve(n_img);
    d.labels.resize(n_lbl);

    const size_t npix = static_cast<size_t>(rows) * cols;
    std::vector<unsigned char> buf(npix);
    for (uint32_t i = 0; i < n_img; ++i) {
        imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(npix));
        if (!imgs)
            throw std::runtime_error(images_path + ": truncated at offset " +
                                     std::to_string(16 + static_cast<long>(i) * npix));
        std::vector<float> img(npix);
        for (size_t p = 0; p < npix; ++p)
            img[p] = static_cast<float>(buf[p]) / 255.0f;
        d.images.push_back(std::move(img));
    }
    lbls.read(reinterpret_cast<char*>(d.labels.data()), static_cast<std::streamsize>(n_lbl));
    if (!lbls)
        throw std::runtime_error(labels_path + ": truncated at offset 8");
    return d;
}

BVec downscale_binarize(const std::vector<float>& image, int src_h, int src_w, int dst_h,
                        int dst_w) {
    if (dst_h > src_h || dst_w > src_w)
        throw std::invalid_argument("downscale target larger than source");
    if (static_cast<int>(image.size()) != src_h * src_w)
        throw std::invalid_argument("downscale: image size mismatch");
    BVec out(static_cast<size_t>(dst_h) * dst_w);
    for (int ty = 0; ty < dst_h; ++ty) {
        double y0 = static_cast<double>(ty) * src_h / dst_h;
        double y1 = static_cast<double>(ty + 1) * src_h / dst_h;
        for (int tx = 0; tx < dst_w; ++tx) {
            double x0 = static_cast<double>(tx) * src_w / dst_w;
            double x1 = static_cast<double>(tx + 1) * src_w / dst_w;
            double sum = 0.0, area = 0.0;
            for (int sy = static_cast<int>(std::floor(y0)); sy < static_cast<int>(std::ceil(y1));
                 ++sy) {
                double wy = std::min(y1, sy + 1.0) - std::max(y0, static_cast<double>(sy));
                for (int sx = static_cast<int>(std::floor(x0));
                     sx < static_cast<int>(std::ceil(x1)); ++sx) {
                    double wx = std::min(x1, sx + 1.0) - std::max(x0, static_cast<double>(sx));
                    sum += image[static_cast<size_t>(sy) * src_w + sx] * wy * wx;
                    area += wy * wx;
                }
            }
            out[static_cast<size_t>(ty) * dst_w + tx] = (sum / area >= 0.5) ? 1 : -1;
        }
    }
    return out;
}

Dataset binarize_dataset(const RawDataset& raw, int dst_h, int dst_w) {
    Dataset d;
    d.height = dst_h;
    d.width = dst_w;
    d.images.reserve(raw.size());
    d.labels.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        d.images.push_back(downscale_binarize(raw.images[i], raw.rows, raw.cols, dst_h, dst_w));
        d.labels.push_back(raw.labels[i]);
    }
    return d;
}

}  // namespace bnncnf
