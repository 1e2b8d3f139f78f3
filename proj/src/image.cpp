#include "spgi/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spgi {

double image_min(const Image& img) {
    if (img.data.empty()) throw std::invalid_argument("image_min: empty image");
    return *std::min_element(img.data.begin(), img.data.end());
}

double image_max(const Image& img) {
    if (img.data.empty()) throw std::invalid_argument("image_max: empty image");
    return *std::max_element(img.data.begin(), img.data.end());
}

double image_mean(const Image& img) {
    if (img.data.empty()) throw std::invalid_argument("image_mean: empty image");
    double s = 0.0;
    for (double v : img.data) s += v;
    return s / static_cast<double>(img.data.size());
}

double image_rmse(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width) {
        throw std::invalid_argument("image_rmse: shape mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.data.size()));
}

double image_rmse_affine(const Image& img, const Image& ref) {
    if (img.height != ref.height || img.width != ref.width) {
        throw std::invalid_argument("image_rmse_affine: shape mismatch");
    }
    const std::size_t n = img.data.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += img.data[i];
        sy += ref.data[i];
        sxx += img.data[i] * img.data[i];
        sxy += img.data[i] * ref.data[i];
    }
    const double dn = static_cast<double>(n);
    const double denom = sxx - sx * sx / dn;
    double a = 0.0, b = sy / dn;
    if (denom > 0.0) {
        a = (sxy - sx * sy / dn) / denom;
        b = (sy - a * sx) / dn;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a * img.data[i] + b - ref.data[i];
        s += d * d;
    }
    return std::sqrt(s / dn);
}

double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("pearson_correlation: need two equally sized sets");
    }
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
    }
    const double ma = sa / n, mb = sb / n;
    double cab = 0, caa = 0, cbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        cab += da * db;
        caa += da * da;
        cbb += db * db;
    }
    if (caa == 0.0 || cbb == 0.0) {
        throw std::invalid_argument("pearson_correlation: zero variance input");
    }
    return cab / std::sqrt(caa * cbb);
}

}  // namespace spgi
