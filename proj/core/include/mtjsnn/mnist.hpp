#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mtjsnn {

// 28x28 grayscale digits, intensities scaled to [0,1].
struct Dataset {
    std::size_t count = 0;
    std::vector<float> pixels;          // count * 784, row-major
    std::vector<std::uint8_t> labels;   // count entries, 0..9

    const float* image(std::size_t i) const { return pixels.data() + i * 784; }
};

// Reads the IDX pair (big-endian magics 0x803 images / 0x801 labels).
// Throws on bad magic, truncated payload, label out of range, or count
// mismatch between the two files.
Dataset load_mnist(const std::string& images_path, const std::string& labels_path);

}  // namespace mtjsnn
