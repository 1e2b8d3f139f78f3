#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "spgi/image.hpp"

namespace spgi {

/// Master random-transmission field a diffuser scan cuts windows from.
/// Built as white noise smoothed with a Gaussian of sigma = feature/2.355
/// (so the feature size is the FWHM of the smoothing kernel), min-max
/// normalized to [0, 1]. feature_size_px <= 1 disables smoothing.
struct DiffuserMap {
    int height = 0;
    int width = 0;
    double feature_size_px = 1.0;
    std::uint64_t seed = 0;
    std::vector<double> data;  // row-major, values in [0, 1]

    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Stack of N reference illumination patterns on a shared H x W grid.
struct PatternStack {
    int height = 0;
    int width = 0;
    double pixel_pitch_um = 1.0;
    std::vector<double> data;  // realization-major, row-major per pattern

    int count() const {
        const std::size_t hw = static_cast<std::size_t>(height) * width;
        return hw == 0 ? 0 : static_cast<int>(data.size() / hw);
    }
    std::size_t pixels_per_pattern() const {
        return static_cast<std::size_t>(height) * width;
    }
    std::span<const double> pattern(int r) const {
        return {data.data() + static_cast<std::size_t>(r) * pixels_per_pattern(),
                pixels_per_pattern()};
    }
    std::span<double> pattern(int r) {
        return {data.data() + static_cast<std::size_t>(r) * pixels_per_pattern(),
                pixels_per_pattern()};
    }
    Image pattern_image(int r) const;
    Grid grid() const { return {height, width, pixel_pitch_um}; }
};

/// (dx, dy) window offset into a diffuser map: dx = column, dy = row.
using ScanOffset = std::pair<int, int>;

DiffuserMap generate_diffuser(std::uint64_t seed, int height, int width,
                              double feature_size_px);

PatternStack cut_patterns(const DiffuserMap& map, const Grid& window,
                          const std::vector<ScanOffset>& offsets);

/// Quasi-random jittered scan grid: cells of `spacing` px, one offset per cell
/// jittered within the cell. Neighbouring realizations decorrelate once the
/// spacing exceeds a few feature sizes.
std::vector<ScanOffset> jittered_scan_offsets(int count, const Grid& window,
                                              int master_height, int master_width,
                                              int spacing, std::uint64_t seed);

/// Strict raster scan: row-major grid of non-overlapping windows.
std::vector<ScanOffset> raster_scan_offsets(int count, const Grid& window,
                                            int master_height, int master_width);

/// Master dimensions sized for `count` jittered cells of `spacing` px.
std::pair<int, int> master_dims_for_scan(int count, const Grid& window, int spacing);

int default_scan_spacing(double feature_size_px);

/// First `count` patterns of a stack.
PatternStack subset_stack(const PatternStack& stack, int count);

/// GFPS pattern-stack container (binary, little-endian):
/// magic "GFPS", u16 version = 1, u16 reserved, u32 N, u32 H, u32 W,
/// f32 pixel_pitch_um, then N*H*W f32 intensities, realization-major.
void save_stack(const PatternStack& stack, const std::filesystem::path& path);
PatternStack load_stack(const std::filesystem::path& path);

}  // namespace spgi
