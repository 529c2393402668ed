#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bnncnf/model.hpp"

namespace bnncnf {

// Grayscale images as loaded from IDX files, pixel values in [0,1].
struct RawDataset {
    std::vector<std::vector<float>> images;
    std::vector<uint8_t> labels;
    int rows = 0;
    int cols = 0;

    size_t size() const { return images.size(); }
};

// Bipolar images ready for training/encoding.
struct Dataset {
    std::vector<BVec> images;
    std::vector<int> labels;
    int width = 0;
    int height = 0;

    size_t size() const { return images.size(); }
};

// Reads the big-endian IDX pair (magic 0x00000803 images / 0x00000801
// labels). Throws std::runtime_error naming the bad offset on format
// violations or count mismatch.
RawDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Area-average pooling to (dst_h, dst_w), then threshold: +1 iff the block
// mean is >= 0.5. Fractional edge blocks are weighted by overlap.
BVec downscale_binarize(const std::vector<float>& image, int src_h, int src_w, int dst_h,
                        int dst_w);

Dataset binarize_dataset(const RawDataset& raw, int dst_h, int dst_w);

}  // namespace bnncnf
