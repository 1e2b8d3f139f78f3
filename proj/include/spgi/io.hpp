#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "spgi/image.hpp"

namespace spgi {

/// Malformed or truncated binary container.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

namespace bin {

void put_u16(std::vector<unsigned char>& out, std::uint16_t v);
void put_u32(std::vector<unsigned char>& out, std::uint32_t v);
void put_u64(std::vector<unsigned char>& out, std::uint64_t v);
void put_f32(std::vector<unsigned char>& out, float v);
void put_f64(std::vector<unsigned char>& out, double v);

/// Little-endian reader over a byte buffer; throws FormatError past the end.
class Reader {
public:
    Reader(const unsigned char* data, std::size_t size, std::string context)
        : data_(data), size_(size), context_(std::move(context)) {}

    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    void bytes(unsigned char* dst, std::size_t n);
    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::size_t n);
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
    std::string context_;
};

}  // namespace bin

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

/// 16-bit big-endian binary PGM with per-image linear min-max normalization.
void save_pgm16(const Image& img, const std::filesystem::path& path);

/// Lossless single-image container: "GFIM", u32 H, u32 W, f32 row-major data.
void save_gfim(const Image& img, const std::filesystem::path& path);
Image load_gfim(const std::filesystem::path& path);

/// Format a double so that it reparses to the identical value.
std::string format_double(double v);

}  // namespace spgi
