#pragma once

#include <cstddef>
#include <vector>

namespace spgi {

/// Pixel grid shared by patterns, scenes and reconstructions.
struct Grid {
    int height = 0;
    int width = 0;
    double pixel_pitch_um = 1.0;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }
    double fov_width_um() const { return width * pixel_pitch_um; }
    double fov_height_um() const { return height * pixel_pitch_um; }
    bool operator==(const Grid&) const = default;
};

/// Row-major H x W image of doubles.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, double fill = 0.0)
        : height(h), width(w),
          data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {}

    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
};

double image_min(const Image& img);
double image_max(const Image& img);
double image_mean(const Image& img);

/// Root-mean-square difference of two equally shaped images.
double image_rmse(const Image& a, const Image& b);

/// RMSE after the best affine map a*x+b of `img` onto `ref` (least squares).
/// Puts images with arbitrary linear scaling (e.g. correlation outputs) on a
/// common footing for quality comparisons.
double image_rmse_affine(const Image& img, const Image& ref);

/// Pearson correlation of two equally sized pixel sets.
double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace spgi
