#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "smoothcert/rng.hpp"
#include "smoothcert/serialize.hpp"
#include "smoothcert/tensor.hpp"

namespace smoothcert {

/// Labeled inputs in [-1,1]. side > 0 when inputs are square rasters.
struct LabeledDataset {
    std::vector<Tensor> inputs;
    std::vector<int> labels;
    int num_classes = 0;
    std::size_t side = 0;

    std::size_t size() const { return inputs.size(); }
    std::size_t dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
};

namespace detail {

/// Class template rasters: foreground +0.8 on a -0.8 background. One fixed
/// pattern per class index (bars, disc, cross, diagonals, frame, corners).
inline Tensor class_template(int cls, std::size_t side) {
    Tensor t({side * side});
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = -0.8;
    auto set = [&](std::size_t r, std::size_t c) { t[r * side + c] = 0.8; };
    std::size_t mid = side / 2;
    switch (cls) {
        case 0:  // vertical bar
            for (std::size_t r = 0; r < side; ++r) { set(r, mid - 1); set(r, mid); }
            break;
        case 1:  // horizontal bar
            for (std::size_t c = 0; c < side; ++c) { set(mid - 1, c); set(mid, c); }
            break;
        case 2: {  // filled disc
            double cc = (double(side) - 1.0) / 2.0, rad = double(side) / 3.0;
            for (std::size_t r = 0; r < side; ++r)
                for (std::size_t c = 0; c < side; ++c)
                    if ((r - cc) * (r - cc) + (c - cc) * (c - cc) <= rad * rad) set(r, c);
            break;
        }
        case 3:  // one-wide cross
            for (std::size_t r = 0; r < side; ++r) set(r, mid);
            for (std::size_t c = 0; c < side; ++c) set(mid, c);
            break;
        case 4:  // main diagonal band
            for (std::size_t r = 0; r < side; ++r)
                for (std::size_t c = 0; c < side; ++c)
                    if (r == c || r + 1 == c || c + 1 == r) set(r, c);
            break;
        case 5:  // anti-diagonal band
            for (std::size_t r = 0; r < side; ++r)
                for (std::size_t c = 0; c < side; ++c) {
                    std::size_t s = r + c;
                    if (s + 1 >= side && s <= side) set(r, c);
                }
            break;
        case 6:  // border frame
            for (std::size_t i = 0; i < side; ++i) { set(0, i); set(side - 1, i); set(i, 0); set(i, side - 1); }
            break;
        case 7:  // corner blocks
            for (std::size_t r = 0; r < side / 3; ++r)
                for (std::size_t c = 0; c < side / 3; ++c) {
                    set(r, c);
                    set(r, side - 1 - c);
                    set(side - 1 - r, c);
                    set(side - 1 - r, side - 1 - c);
                }
            break;
        default:
            throw ShapeError("class_template: class index out of range");
    }
    return t;
}

}  // namespace detail

/// Deterministic synthetic rasters: per-class template plus Gaussian pixel
/// jitter, clamped to [-1,1].
inline LabeledDataset gen_synthetic(std::size_t n_per_class, int num_classes, std::size_t side,
                                    std::uint64_t seed, double jitter_std = 0.1) {
    if (num_classes < 2 || num_classes > 8) throw ShapeError("gen_synthetic: num_classes must be 2..8");
    if (side < 8 || side > 16) throw ShapeError("gen_synthetic: side must be 8..16");
    LabeledDataset ds;
    ds.num_classes = num_classes;
    ds.side = side;
    Rng rng{seed, /*context=*/0xDA7A, 0};
    std::size_t item = 0;
    for (int c = 0; c < num_classes; ++c) {
        Tensor tmpl = detail::class_template(c, side);
        for (std::size_t i = 0; i < n_per_class; ++i, ++item) {
            Tensor x = tmpl;
            Rng item_rng = rng.with_index(item);
            for (std::size_t j = 0; j < x.size(); ++j) {
                x[j] = std::clamp(x[j] + jitter_std * item_rng.normal(j), -1.0, 1.0);
            }
            ds.inputs.push_back(std::move(x));
            ds.labels.push_back(c);
        }
    }
    return ds;
}

namespace detail {

inline std::uint32_t read_be_u32(std::istream& is, const char* field) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw FormatError(std::string("IDX: truncated file reading ") + field);
    }
    return std::uint32_t(b[0]) << 24 | std::uint32_t(b[1]) << 16 | std::uint32_t(b[2]) << 8 |
           std::uint32_t(b[3]);
}

}  // namespace detail

/// IDX (MNIST) loader. Pixels map from [0,255] to [-1,1] via x/127.5 - 1.
inline LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path,
                               std::size_t max_items) {
    std::ifstream imgs(images_path, std::ios::binary);
    if (!imgs) throw FormatError("cannot open: " + images_path);
    std::ifstream labs(labels_path, std::ios::binary);
    if (!labs) throw FormatError("cannot open: " + labels_path);

    if (detail::read_be_u32(imgs, "image magic") != 0x00000803u) {
        throw FormatError(images_path + ": bad image magic (want 0x00000803)");
    }
    std::uint32_t n_imgs = detail::read_be_u32(imgs, "image count");
    std::uint32_t rows = detail::read_be_u32(imgs, "row count");
    std::uint32_t cols = detail::read_be_u32(imgs, "column count");

    if (detail::read_be_u32(labs, "label magic") != 0x00000801u) {
        throw FormatError(labels_path + ": bad label magic (want 0x00000801)");
    }
    std::uint32_t n_labs = detail::read_be_u32(labs, "label count");
    if (n_imgs != n_labs) {
        throw FormatError("IDX: image count " + std::to_string(n_imgs) + " != label count " +
                          std::to_string(n_labs));
    }

    std::size_t n = std::min<std::size_t>(n_imgs, max_items);
    std::size_t d = std::size_t(rows) * cols;
    LabeledDataset ds;
    ds.side = rows == cols ? rows : 0;
    std::vector<unsigned char> buf(d);
    int max_label = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!imgs.read(reinterpret_cast<char*>(buf.data()), std::streamsize(d))) {
            throw FormatError(images_path + ": truncated file reading pixel data");
        }
        Tensor x({d});
        for (std::size_t j = 0; j < d; ++j) x[j] = double(buf[j]) / 127.5 - 1.0;
        unsigned char lab;
        if (!labs.read(reinterpret_cast<char*>(&lab), 1)) {
            throw FormatError(labels_path + ": truncated file reading labels");
        }
        ds.inputs.push_back(std::move(x));
        ds.labels.push_back(lab);
        max_label = std::max(max_label, int(lab));
    }
    ds.num_classes = max_label + 1;
    return ds;
}

/// "SCD1" split file: u32 count, u32 dim, u32 classes, f64 inputs, u16 labels.
inline void save_split(const LabeledDataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    detail::write_magic(os, "SCD1");
    detail::write_u32(os, static_cast<std::uint32_t>(ds.size()));
    detail::write_u32(os, static_cast<std::uint32_t>(ds.dim()));
    detail::write_u32(os, static_cast<std::uint32_t>(ds.num_classes));
    for (const auto& x : ds.inputs) {
        for (double v : x.data()) detail::write_f64(os, v);
    }
    for (int lab : ds.labels) detail::write_u16(os, static_cast<std::uint16_t>(lab));
    if (!os) throw FormatError("write failed: " + path);
}

inline LabeledDataset load_split(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    detail::check_magic(is, "SCD1", path);
    std::uint32_t count = detail::read_u32(is, "count");
    std::uint32_t dim = detail::read_u32(is, "dim");
    std::uint32_t classes = detail::read_u32(is, "classes");
    LabeledDataset ds;
    ds.num_classes = int(classes);
    std::size_t root = 0;
    while (root * root < dim) ++root;
    ds.side = root * root == dim ? root : 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        Tensor x({dim});
        for (std::uint32_t j = 0; j < dim; ++j) x[j] = detail::read_f64(is, "inputs");
        ds.inputs.push_back(std::move(x));
    }
    for (std::uint32_t i = 0; i < count; ++i) {
        ds.labels.push_back(int(detail::read_u16(is, "labels")));
    }
    return ds;
}

}  // namespace smoothcert
