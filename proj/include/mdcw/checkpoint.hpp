#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mdcw/nn.hpp"

namespace mdcw {

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

constexpr char ckpt_magic[8] = {'M', 'D', 'C', 'W', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t ckpt_version = 1;

inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw CheckpointError("truncated checkpoint");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw CheckpointError("truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline std::string get_str(std::istream& in) {
    std::uint32_t n = get_u32(in);
    if (n > (1u << 20)) throw CheckpointError("unreasonable name length");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw CheckpointError("truncated checkpoint");
    return s;
}

} // namespace detail

// Versioned named-tensor container: sections of ParamSets, each tensor as
// (name, rows, cols, row-major little-endian f64 payload).
inline void save_checkpoint(const std::string& path,
                            const std::vector<std::pair<std::string, const nn::ParamSet*>>& sections) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path);
    out.write(detail::ckpt_magic, 8);
    detail::put_u32(out, detail::ckpt_version);
    detail::put_u32(out, static_cast<std::uint32_t>(sections.size()));
    for (const auto& [name, ps] : sections) {
        detail::put_str(out, name);
        detail::put_u32(out, static_cast<std::uint32_t>(ps->entries().size()));
        for (const auto& [tname, m] : ps->entries()) {
            detail::put_str(out, tname);
            detail::put_u64(out, static_cast<std::uint64_t>(m.rows()));
            detail::put_u64(out, static_cast<std::uint64_t>(m.cols()));
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) detail::put_f64(out, m(r, c));
        }
    }
    if (!out) throw CheckpointError("write failure: " + path);
}

inline std::vector<std::pair<std::string, nn::ParamSet>> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, detail::ckpt_magic, 8) != 0)
        throw CheckpointError("not a checkpoint file: " + path);
    if (std::uint32_t ver = detail::get_u32(in); ver != detail::ckpt_version)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(ver));
    std::vector<std::pair<std::string, nn::ParamSet>> sections;
    const std::uint32_t nsec = detail::get_u32(in);
    for (std::uint32_t s = 0; s < nsec; ++s) {
        std::string sname = detail::get_str(in);
        nn::ParamSet ps;
        const std::uint32_t ntensor = detail::get_u32(in);
        for (std::uint32_t t = 0; t < ntensor; ++t) {
            std::string tname = detail::get_str(in);
            const auto rows = static_cast<Eigen::Index>(detail::get_u64(in));
            const auto cols = static_cast<Eigen::Index>(detail::get_u64(in));
            if (rows < 0 || cols < 0 || rows * cols > (1ll << 28))
                throw CheckpointError("unreasonable tensor shape in " + tname);
            nn::Mat& m = ps.add(tname, rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = detail::get_f64(in);
        }
        sections.emplace_back(std::move(sname), std::move(ps));
    }
    return sections;
}

} // namespace mdcw
