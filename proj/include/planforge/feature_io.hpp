#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "planforge/error.hpp"
#include "planforge/metrics.hpp"

namespace planforge::features {

// Binary matrix file, all fields little-endian:
//   bytes 0-3   magic "PLNF"
//   bytes 4-7   u32 rows
//   bytes 8-11  u32 cols
//   bytes 12-15 u32 reserved, 0
//   then rows * cols f32 values, row-major.
//
// Binary layer file:
//   bytes 0-3   magic "PLNL"
//   bytes 4-7   u32 layer count L
//   bytes 8-15  u32 reserved x2, 0
//   L index entries of 16 bytes: u32 channels, u32 height, u32 width, f32 weight
//   then each layer's channels * height * width f32 values, channel-major.

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_f32(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
}

class Reader {
public:
    explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float f;
        std::memcpy(&f, &bits, 4);
        return f;
    }
    std::string take(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw Error("FormatError", "file truncated");
    }
    std::string bytes_;
    std::size_t pos_ = 0;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("IoError", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("IoError", "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace detail

inline std::string encode_matrix(const Eigen::MatrixXd& m) {
    std::string out = "PLNF";
    detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
    detail::put_u32(out, 0);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) detail::put_f32(out, static_cast<float>(m(r, c)));
    return out;
}

inline Eigen::MatrixXd decode_matrix(std::string bytes) {
    detail::Reader rd(std::move(bytes));
    if (rd.take(4) != "PLNF") throw Error("FormatError", "bad magic, expected PLNF");
    const std::uint32_t rows = rd.u32(), cols = rd.u32();
    rd.u32();
    if (rd.remaining() != static_cast<std::size_t>(rows) * cols * 4)
        throw Error("FormatError", "payload size does not match header");
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = rd.f32();
    return m;
}

// One row per sample, comma-separated; blank lines and lines starting with
// '#' are skipped.
inline Eigen::MatrixXd parse_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0, offset = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
        std::vector<double> row;
        std::size_t p = 0;
        while (p <= line.size()) {
            std::size_t q = line.find(',', p);
            if (q == std::string::npos) q = line.size();
            const std::string cell = line.substr(p, q - p);
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || cell.find_first_not_of(" \t", used) != std::string::npos)
                throw ParseError(line_start + p, "number", lineno, p + 1);
            row.push_back(v);
            p = q + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(line_start, "row with " + std::to_string(rows.front().size()) + " values",
                             lineno, 1);
        rows.push_back(std::move(row));
    }
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    return m;
}

inline std::string format_csv(const Eigen::MatrixXd& m) {
    std::ostringstream out;
    out.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
        out << '\n';
    }
    return out.str();
}

// Picks the format from the content: PLNF magic means binary, anything else CSV.
inline Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
    std::string bytes = detail::slurp(path);
    if (bytes.size() >= 4 && bytes.compare(0, 4, "PLNF") == 0) return decode_matrix(std::move(bytes));
    return parse_csv(bytes);
}

inline void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
    detail::spit(path, path.extension() == ".csv" ? format_csv(m) : encode_matrix(m));
}

inline std::string encode_layers(const metrics::LayerFeatures& layers) {
    std::string out = "PLNL";
    detail::put_u32(out, static_cast<std::uint32_t>(layers.size()));
    detail::put_u32(out, 0);
    detail::put_u32(out, 0);
    for (const auto& l : layers) {
        detail::put_u32(out, static_cast<std::uint32_t>(l.channels));
        detail::put_u32(out, static_cast<std::uint32_t>(l.height));
        detail::put_u32(out, static_cast<std::uint32_t>(l.width));
        detail::put_f32(out, static_cast<float>(l.weight));
    }
    for (const auto& l : layers)
        for (double v : l.data) detail::put_f32(out, static_cast<float>(v));
    return out;
}

inline metrics::LayerFeatures decode_layers(std::string bytes) {
    detail::Reader rd(std::move(bytes));
    if (rd.take(4) != "PLNL") throw Error("FormatError", "bad magic, expected PLNL");
    const std::uint32_t count = rd.u32();
    rd.u32();
    rd.u32();
    metrics::LayerFeatures layers(count);
    for (auto& l : layers) {
        l.channels = static_cast<int>(rd.u32());
        l.height = static_cast<int>(rd.u32());
        l.width = static_cast<int>(rd.u32());
        l.weight = rd.f32();
    }
    for (auto& l : layers) {
        const std::size_t n = static_cast<std::size_t>(l.channels) * l.height * l.width;
        if (rd.remaining() < n * 4) throw Error("FormatError", "file truncated");
        l.data.resize(n);
        for (auto& v : l.data) v = rd.f32();
    }
    if (!rd.done()) throw Error("FormatError", "trailing bytes after layer data");
    return layers;
}

inline metrics::LayerFeatures load_layers(const std::filesystem::path& path) {
    return decode_layers(detail::slurp(path));
}

inline void save_layers(const std::filesystem::path& path, const metrics::LayerFeatures& layers) {
    detail::spit(path, encode_layers(layers));
}

}  // namespace planforge::features
