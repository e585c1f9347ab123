#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "smoothcert/error.hpp"
#include "smoothcert/net.hpp"

namespace smoothcert {
namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

inline void write_u8(std::ostream& os, std::uint8_t v) {
    os.write(reinterpret_cast<const char*>(&v), 1);
}

inline void write_f64(std::ostream& os, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint32_t read_u32(std::istream& is, const char* field) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError(std::string("truncated file reading ") + field);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

inline std::uint16_t read_u16(std::istream& is, const char* field) {
    unsigned char b[2];
    if (!is.read(reinterpret_cast<char*>(b), 2)) throw FormatError(std::string("truncated file reading ") + field);
    return std::uint16_t(b[0]) | std::uint16_t(b[1]) << 8;
}

inline std::uint8_t read_u8(std::istream& is, const char* field) {
    unsigned char b;
    if (!is.read(reinterpret_cast<char*>(&b), 1)) throw FormatError(std::string("truncated file reading ") + field);
    return b;
}

inline double read_f64(std::istream& is, const char* field) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw FormatError(std::string("truncated file reading ") + field);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void write_magic(std::ostream& os, const char magic[5]) { os.write(magic, 4); }

inline void check_magic(std::istream& is, const char magic[5], const std::string& path) {
    char got[4];
    if (!is.read(got, 4) || std::memcmp(got, magic, 4) != 0) {
        throw FormatError(path + ": bad magic, expected " + magic);
    }
}

}  // namespace detail

/// "SCN1" net weight format: u32 layer count, then per layer
/// u32 rows, u32 cols, u8 activation tag, f64 weights, f64 bias.
/// All integers and doubles little-endian.
inline void save_net(const FeedForwardNet& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    detail::write_magic(os, "SCN1");
    detail::write_u32(os, static_cast<std::uint32_t>(net.num_layers()));
    for (const auto& layer : net.layers()) {
        detail::write_u32(os, static_cast<std::uint32_t>(layer.out_dim()));
        detail::write_u32(os, static_cast<std::uint32_t>(layer.in_dim()));
        detail::write_u8(os, static_cast<std::uint8_t>(layer.act));
        for (double v : layer.weight.data()) detail::write_f64(os, v);
        for (double v : layer.bias.data()) detail::write_f64(os, v);
    }
    if (!os) throw FormatError("write failed: " + path);
}

/// conditioning_dim is not part of the format; the caller states it
/// (0 for classifiers, 2 for denoisers with the timestep embedding).
inline FeedForwardNet load_net(const std::string& path, std::size_t conditioning_dim = 0) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open: " + path);
    detail::check_magic(is, "SCN1", path);
    std::uint32_t n_layers = detail::read_u32(is, "layer count");
    if (n_layers == 0) throw FormatError(path + ": zero layers");
    std::vector<Layer> layers;
    for (std::uint32_t i = 0; i < n_layers; ++i) {
        std::uint32_t rows = detail::read_u32(is, "rows");
        std::uint32_t cols = detail::read_u32(is, "cols");
        std::uint8_t tag = detail::read_u8(is, "activation tag");
        if (tag > 1) throw FormatError(path + ": unknown activation tag");
        Layer layer{Tensor({rows, cols}), Tensor({rows}), static_cast<Activation>(tag)};
        for (std::size_t j = 0; j < layer.weight.size(); ++j) {
            layer.weight[j] = detail::read_f64(is, "weights");
        }
        for (std::size_t j = 0; j < layer.bias.size(); ++j) {
            layer.bias[j] = detail::read_f64(is, "bias");
        }
        layers.push_back(std::move(layer));
    }
    std::size_t first_in = layers.front().in_dim();
    if (conditioning_dim >= first_in) throw FormatError(path + ": conditioning_dim too large");
    return FeedForwardNet(first_in - conditioning_dim, conditioning_dim, std::move(layers));
}

}  // namespace smoothcert
