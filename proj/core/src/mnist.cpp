#include "mtjsnn/mnist.hpp"

#include <fstream>
#include <stdexcept>

namespace mtjsnn {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("load_mnist: truncated header in " + path);
    }
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_mnist: cannot open " + path);
    return in;
}

}  // namespace

Dataset load_mnist(const std::string& images_path, const std::string& labels_path) {
    auto img = open_binary(images_path);
    if (read_be32(img, images_path) != 0x00000803u) {
        throw std::runtime_error("load_mnist: bad image magic in " + images_path);
    }
    const std::uint32_t n_images = read_be32(img, images_path);
    const std::uint32_t rows = read_be32(img, images_path);
    const std::uint32_t cols = read_be32(img, images_path);
    if (rows != 28 || cols != 28) {
        throw std::runtime_error("load_mnist: expected 28x28 images in " + images_path);
    }

    auto lab = open_binary(labels_path);
    if (read_be32(lab, labels_path) != 0x00000801u) {
        throw std::runtime_error("load_mnist: bad label magic in " + labels_path);
    }
    const std::uint32_t n_labels = read_be32(lab, labels_path);
    if (n_labels != n_images) {
        throw std::runtime_error("load_mnist: image/label count mismatch (" +
                                 std::to_string(n_images) + " vs " + std::to_string(n_labels) + ")");
    }

    Dataset ds;
    ds.count = n_images;
    ds.pixels.resize(std::size_t(n_images) * 784);
    ds.labels.resize(n_images);

    std::vector<unsigned char> raw(std::size_t(n_images) * 784);
    if (!img.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
        throw std::runtime_error("load_mnist: truncated image payload in " + images_path);
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        ds.pixels[i] = static_cast<float>(raw[i]) * (1.0f / 255.0f);
    }

    if (!lab.read(reinterpret_cast<char*>(ds.labels.data()), n_labels)) {
        throw std::runtime_error("load_mnist: truncated label payload in " + labels_path);
    }
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
        if (ds.labels[i] > 9) {
            throw std::runtime_error("load_mnist: label out of range at index " + std::to_string(i));
        }
    }
    return ds;
}

}  // namespace mtjsnn
