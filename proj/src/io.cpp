#include "spgi/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace spgi {

namespace bin {

namespace {
template <typename T>
void put_le(std::vector<unsigned char>& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
    }
}
}  // namespace

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) { put_le(out, v); }
void put_u32(std::vector<unsigned char>& out, std::uint32_t v) { put_le(out, v); }
void put_u64(std::vector<unsigned char>& out, std::uint64_t v) { put_le(out, v); }

void put_f32(std::vector<unsigned char>& out, float v) {
    put_le(out, std::bit_cast<std::uint32_t>(v));
}

void put_f64(std::vector<unsigned char>& out, double v) {
    put_le(out, std::bit_cast<std::uint64_t>(v));
}

void Reader::need(std::size_t n) {
    if (size_ - pos_ < n) {
        throw FormatError(context_ + ": truncated file, need " + std::to_string(n) +
                          " bytes at offset " + std::to_string(pos_) + ", have " +
                          std::to_string(size_ - pos_));
    }
}

std::uint16_t Reader::u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_]) |
                      static_cast<std::uint16_t>(data_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
}

std::uint32_t Reader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
}

std::uint64_t Reader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | data_[pos_ + i];
    pos_ += 8;
    return v;
}

float Reader::f32() { return std::bit_cast<float>(u32()); }
double Reader::f64() { return std::bit_cast<double>(u64()); }

void Reader::bytes(unsigned char* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, data_ + pos_, n);
    pos_ += n;
}

}  // namespace bin

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for reading: " + path.string());
    in.seekg(0, std::ios::end);
    const std::streamoff len = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(len));
    if (len > 0) in.read(reinterpret_cast<char*>(bytes.data()), len);
    if (!in) throw std::runtime_error("failed reading file: " + path.string());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing file: " + path.string());
}

void save_pgm16(const Image& img, const std::filesystem::path& path) {
    if (img.data.empty()) throw std::invalid_argument("save_pgm16: empty image");
    const double lo = image_min(img);
    const double hi = image_max(img);
    const double span = hi - lo;
    std::string header =
        "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + img.data.size() * 2);
    for (double v : img.data) {
        double t = span > 0.0 ? (v - lo) / span : 0.0;
        const auto q = static_cast<std::uint16_t>(std::lround(t * 65535.0));
        bytes.push_back(static_cast<unsigned char>(q >> 8));  // big-endian sample
        bytes.push_back(static_cast<unsigned char>(q & 0xFF));
    }
    write_file_bytes(path, bytes);
}

void save_gfim(const Image& img, const std::filesystem::path& path) {
    std::vector<unsigned char> bytes;
    bytes.insert(bytes.end(), {'G', 'F', 'I', 'M'});
    bin::put_u32(bytes, static_cast<std::uint32_t>(img.height));
    bin::put_u32(bytes, static_cast<std::uint32_t>(img.width));
    for (double v : img.data) bin::put_f32(bytes, static_cast<float>(v));
    write_file_bytes(path, bytes);
}

Image load_gfim(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    bin::Reader r(bytes.data(), bytes.size(), "GFIM " + path.string());
    char magic[4];
    r.bytes(reinterpret_cast<unsigned char*>(magic), 4);
    if (std::string(magic, 4) != "GFIM") {
        throw FormatError("GFIM " + path.string() + ": bad magic \"" + std::string(magic, 4) +
                          "\"");
    }
    const std::uint32_t h = r.u32();
    const std::uint32_t w = r.u32();
    if (h == 0 || w == 0 || static_cast<std::uint64_t>(h) * w > (1ULL << 32)) {
        throw FormatError("GFIM " + path.string() + ": bad dimensions " + std::to_string(h) +
                          "x" + std::to_string(w));
    }
    Image img(static_cast<int>(h), static_cast<int>(w));
    for (double& v : img.data) v = r.f32();
    return img;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace spgi
