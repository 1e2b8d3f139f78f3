#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "spgi/image.hpp"
#include "spgi/pipeline.hpp"

namespace spgi {

/// SNR of a region of interest: mean over std-dev with the sample (n-1) divisor.
struct SnrReport {
    std::size_t roi_size = 0;
    double mu = 0.0;
    double sigma = 0.0;
    double snr = 0.0;
    bool defined = false;     // false when sigma is zero
    int n_realizations = 0;   // context for curve points, 0 when unused
};

SnrReport snr(const Image& image, const std::vector<std::size_t>& roi);

/// Single-parameter least squares of snr = a sqrt(N):
/// a = sum(snr*sqrt(N)) / sum(N). Accepts one or more points.
double fit_sqrt(const std::vector<std::pair<double, double>>& points);

/// Heuristic counting-statistics error bar sqrt(1/I + mu^2 / (sigma^3 sqrt(I)))
/// with I the ROI sample count. It tracks resampling estimates only for
/// roughly hundred-scale sigma; see the analyze docs.
double snr_error(const SnrReport& report);

/// 10%-90% transition width (um) of the row-averaged column profile.
/// Requires one edge crossing the image along x; throws when the profile is flat.
double edge_spread_width_um(const Image& image, double pixel_pitch_um);

/// 50% crossing position (um, FOV-centered) of the row-averaged column profile.
double edge_position_um(const Image& image, double pixel_pitch_um);

/// Default ROI: pixels with ground-truth transmission 1 whose Chebyshev
/// neighbourhood of `margin` px is also fully open and inside the border.
std::vector<std::size_t> roi_from_truth(const Image& truth, int margin);

/// Least-squares slope of log(y) vs log(x).
double loglog_slope(const std::vector<std::pair<double, double>>& points);

struct SnrPoint {
    int n = 0;
    double snr = 0.0;
    double error = 0.0;
};

struct SnrCurve {
    std::vector<SnrPoint> points;
    double fit_a = 0.0;
    double slope = 0.0;  // log-log regression slope
};

/// Correlation-GI SNR against the number of realizations, reconstructing the
/// analysis frame with the first N realizations for each requested N.
SnrCurve analyze_snr_curve(const PipelineConfig& cfg, const std::vector<int>& n_values);

struct DosePoint {
    double flux = 0.0;
    double snr = 0.0;
    double error = 0.0;  // standard error over repeats
};

/// Full simulate -> demux -> reconstruct -> snr pipeline per flux level with
/// Poisson noise; photon_scale is recalibrated per level, repeats vary the
/// noise seed.
std::vector<DosePoint> dose_sweep(const PipelineConfig& cfg,
                                  const std::vector<double>& flux_levels, int repeats = 5);

struct EdgeWidthRow {
    int frame = 0;
    double width_um = 0.0;
};

/// Edge-spread width per reconstructed movie frame that has an edge in view.
std::vector<EdgeWidthRow> edge_width_analysis(const PipelineConfig& cfg);

}  // namespace spgi
