#include "spgi/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "spgi/io.hpp"
#include "spgi/rng.hpp"

namespace spgi {

namespace {

/// Separable Gaussian smoothing with periodic wrap, kernel radius 3 sigma.
/// Wrap keeps the field statistics stationary right up to the border.
void gaussian_smooth_wrap(std::vector<double>& field, int height, int width, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius < 1) return;
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int j = -radius; j <= radius; ++j) {
        kernel[j + radius] = std::exp(-0.5 * (j * j) / (sigma * sigma));
        norm += kernel[j + radius];
    }
    for (double& k : kernel) k /= norm;

    std::vector<double> tmp(field.size());
    // rows
    for (int y = 0; y < height; ++y) {
        const double* src = field.data() + static_cast<std::size_t>(y) * width;
        double* dst = tmp.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int j = -radius; j <= radius; ++j) {
                int xx = x + j;
                xx %= width;
                if (xx < 0) xx += width;
                acc += kernel[j + radius] * src[xx];
            }
            dst[x] = acc;
        }
    }
    // columns
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) {
            double acc = 0.0;
            for (int j = -radius; j <= radius; ++j) {
                int yy = y + j;
                yy %= height;
                if (yy < 0) yy += height;
                acc += kernel[j + radius] * tmp[static_cast<std::size_t>(yy) * width + x];
            }
            field[static_cast<std::size_t>(y) * width + x] = acc;
        }
    }
}

constexpr std::uint64_t kMaxStackPixels = 1ULL << 40;

}  // namespace

Image PatternStack::pattern_image(int r) const {
    Image img(height, width);
    const auto p = pattern(r);
    std::copy(p.begin(), p.end(), img.data.begin());
    return img;
}

DiffuserMap generate_diffuser(std::uint64_t seed, int height, int width,
                              double feature_size_px) {
    if (height <= 0 || width <= 0) {
        throw std::invalid_argument("generate_diffuser: zero-area master dimensions");
    }
    if (feature_size_px < 1.0) {
        throw std::invalid_argument("generate_diffuser: feature size must be >= 1 px");
    }
    if (feature_size_px > std::min(height, width)) {
        throw std::invalid_argument("generate_diffuser: feature size exceeds master dimensions");
    }

    DiffuserMap map;
    map.height = height;
    map.width = width;
    map.feature_size_px = feature_size_px;
    map.seed = seed;
    map.data.resize(static_cast<std::size_t>(height) * width);
    for (std::size_t i = 0; i < map.data.size(); ++i) {
        map.data[i] = rng_stream(seed, {rng_tag::diffuser, i}).next_unit();
    }

    if (feature_size_px > 1.0) {
        const double sigma = feature_size_px / 2.3548200450309493;  // FWHM -> sigma
        gaussian_smooth_wrap(map.data, height, width, sigma);
    }

    const auto [lo_it, hi_it] = std::minmax_element(map.data.begin(), map.data.end());
    const double lo = *lo_it, hi = *hi_it;
    const double span = hi - lo;
    if (span > 0.0) {
        for (double& v : map.data) v = (v - lo) / span;
    }
    return map;
}

PatternStack cut_patterns(const DiffuserMap& map, const Grid& window,
                          const std::vector<ScanOffset>& offsets) {
    if (window.height <= 0 || window.width <= 0) {
        throw std::invalid_argument("cut_patterns: zero-area window");
    }
    for (std::size_t r = 0; r < offsets.size(); ++r) {
        const auto [dx, dy] = offsets[r];
        if (dx < 0 || dy < 0 || dx + window.width > map.width ||
            dy + window.height > map.height) {
            throw std::out_of_range("cut_patterns: offset " + std::to_string(r) + " = (" +
                                    std::to_string(dx) + "," + std::to_string(dy) +
                                    ") puts the window outside the master field");
        }
    }
    PatternStack stack;
    stack.height = window.height;
    stack.width = window.width;
    stack.pixel_pitch_um = window.pixel_pitch_um;
    stack.data.resize(offsets.size() * window.pixel_count());
    for (std::size_t r = 0; r < offsets.size(); ++r) {
        const auto [dx, dy] = offsets[r];
        double* dst = stack.data.data() + r * window.pixel_count();
        for (int y = 0; y < window.height; ++y) {
            const double* src =
                map.data.data() + static_cast<std::size_t>(dy + y) * map.width + dx;
            std::copy(src, src + window.width, dst + static_cast<std::size_t>(y) * window.width);
        }
    }
    return stack;
}

std::vector<ScanOffset> jittered_scan_offsets(int count, const Grid& window,
                                              int master_height, int master_width,
                                              int spacing, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("jittered_scan_offsets: count must be >= 1");
    if (spacing < 1) throw std::invalid_argument("jittered_scan_offsets: spacing must be >= 1");
    const int cells = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    const int need_w = cells * spacing + window.width;
    const int need_h = cells * spacing + window.height;
    if (master_width < need_w || master_height < need_h) {
        throw std::invalid_argument("jittered_scan_offsets: master " +
                                    std::to_string(master_height) + "x" +
                                    std::to_string(master_width) + " too small, need " +
                                    std::to_string(need_h) + "x" + std::to_string(need_w));
    }
    std::vector<ScanOffset> offsets;
    offsets.reserve(count);
    for (int i = 0; i < count; ++i) {
        const int cy = i / cells;
        const int cx = i % cells;
        Rng rng = rng_stream(seed, {rng_tag::scan, static_cast<std::uint64_t>(i)});
        const int jx = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(spacing));
        const int jy = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(spacing));
        offsets.emplace_back(cx * spacing + jx, cy * spacing + jy);
    }
    return offsets;
}

std::vector<ScanOffset> raster_scan_offsets(int count, const Grid& window,
                                            int master_height, int master_width) {
    if (count < 1) throw std::invalid_argument("raster_scan_offsets: count must be >= 1");
    const int nx = master_width / window.width;
    const int ny = master_height / window.height;
    if (static_cast<long long>(nx) * ny < count) {
        throw std::invalid_argument("raster_scan_offsets: master holds only " +
                                    std::to_string(static_cast<long long>(nx) * ny) +
                                    " disjoint windows, requested " + std::to_string(count));
    }
    std::vector<ScanOffset> offsets;
    offsets.reserve(count);
    for (int i = 0; i < count; ++i) {
        offsets.emplace_back((i % nx) * window.width, (i / nx) * window.height);
    }
    return offsets;
}

std::pair<int, int> master_dims_for_scan(int count, const Grid& window, int spacing) {
    const int cells = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    return {cells * spacing + window.height, cells * spacing + window.width};
}

int default_scan_spacing(double feature_size_px) {
    return std::max(8, static_cast<int>(std::ceil(4.0 * feature_size_px)));
}

PatternStack subset_stack(const PatternStack& stack, int count) {
    if (count < 1 || count > stack.count()) {
        throw std::out_of_range("subset_stack: requested " + std::to_string(count) +
                                " of " + std::to_string(stack.count()) + " patterns");
    }
    PatternStack out;
    out.height = stack.height;
    out.width = stack.width;
    out.pixel_pitch_um = stack.pixel_pitch_um;
    out.data.assign(stack.data.begin(),
                    stack.data.begin() + static_cast<std::ptrdiff_t>(
                                             count * stack.pixels_per_pattern()));
    return out;
}

void save_stack(const PatternStack& stack, const std::filesystem::path& path) {
    std::vector<unsigned char> bytes;
    bytes.insert(bytes.end(), {'G', 'F', 'P', 'S'});
    bin::put_u16(bytes, 1);  // format version
    bin::put_u16(bytes, 0);  // reserved
    bin::put_u32(bytes, static_cast<std::uint32_t>(stack.count()));
    bin::put_u32(bytes, static_cast<std::uint32_t>(stack.height));
    bin::put_u32(bytes, static_cast<std::uint32_t>(stack.width));
    bin::put_f32(bytes, static_cast<float>(stack.pixel_pitch_um));
    bytes.reserve(bytes.size() + stack.data.size() * 4);
    for (double v : stack.data) bin::put_f32(bytes, static_cast<float>(v));
    write_file_bytes(path, bytes);
}

PatternStack load_stack(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    const std::string ctx = "GFPS " + path.string();
    bin::Reader r(bytes.data(), bytes.size(), ctx);
    char magic[4];
    r.bytes(reinterpret_cast<unsigned char*>(magic), 4);
    if (std::string(magic, 4) != "GFPS") {
        throw FormatError(ctx + ": bad magic \"" + std::string(magic, 4) + "\"");
    }
    const std::uint16_t version = r.u16();
    if (version != 1) {
        throw FormatError(ctx + ": unsupported format version " + std::to_string(version));
    }
    r.u16();  // reserved
    const std::uint64_t n = r.u32();
    const std::uint64_t h = r.u32();
    const std::uint64_t w = r.u32();
    const float pitch = r.f32();
    if (h == 0 || w == 0) throw FormatError(ctx + ": zero-area pattern dimensions");
    const std::uint64_t hw = h * w;  // both < 2^32, product fits
    if (hw > kMaxStackPixels || (n != 0 && hw > kMaxStackPixels / n)) {
        throw FormatError(ctx + ": dimension overflow, " + std::to_string(n) + "x" +
                          std::to_string(h) + "x" + std::to_string(w));
    }
    const std::uint64_t expected = n * hw * 4;
    if (r.remaining() != expected) {
        throw FormatError(ctx + ": payload size mismatch, expected " + std::to_string(expected) +
                          " bytes, have " + std::to_string(r.remaining()));
    }
    PatternStack stack;
    stack.height = static_cast<int>(h);
    stack.width = static_cast<int>(w);
    stack.pixel_pitch_um = pitch;
    stack.data.resize(n * hw);
    for (double& v : stack.data) v = r.f32();
    return stack;
}

}  // namespace spgi
