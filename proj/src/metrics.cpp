#include "spgi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace spgi {

SnrReport snr(const Image& image, const std::vector<std::size_t>& roi) {
    if (roi.size() < 2) throw std::invalid_argument("snr: ROI needs at least 2 pixels");
    for (std::size_t idx : roi) {
        if (idx >= image.data.size()) {
            throw std::out_of_range("snr: ROI index " + std::to_string(idx) +
                                    " outside the image");
        }
    }
    SnrReport report;
    report.roi_size = roi.size();
    double sum = 0.0;
    for (std::size_t idx : roi) sum += image.data[idx];
    report.mu = sum / static_cast<double>(roi.size());
    double ss = 0.0;
    for (std::size_t idx : roi) {
        const double d = image.data[idx] - report.mu;
        ss += d * d;
    }
    report.sigma = std::sqrt(ss / static_cast<double>(roi.size() - 1));
    if (report.sigma > 0.0) {
        report.snr = report.mu / report.sigma;
        report.defined = true;
    } else {
        report.snr = std::numeric_limits<double>::quiet_NaN();
        report.defined = false;
    }
    return report;
}

double fit_sqrt(const std::vector<std::pair<double, double>>& points) {
    if (points.empty()) throw std::invalid_argument("fit_sqrt: no points");
    double num = 0.0, den = 0.0;
    for (const auto& [n, s] : points) {
        if (n < 1.0) throw std::invalid_argument("fit_sqrt: N must be >= 1");
        num += s * std::sqrt(n);
        den += n;
    }
    return num / den;
}

double snr_error(const SnrReport& report) {
    if (!report.defined) throw std::invalid_argument("snr_error: undefined SNR");
    if (report.roi_size < 1) throw std::invalid_argument("snr_error: empty ROI");
    const double i = static_cast<double>(report.roi_size);
    return std::sqrt(1.0 / i +
                     report.mu * report.mu /
                         (report.sigma * report.sigma * report.sigma * std::sqrt(i)));
}

namespace {

std::vector<double> column_profile(const Image& image) {
    std::vector<double> profile(image.width, 0.0);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) profile[x] += image.at(y, x);
    }
    for (double& v : profile) v /= image.height;
    return profile;
}

struct EdgeCrossings {
    double x10 = 0.0, x50 = 0.0, x90 = 0.0;  // um, FOV-centered
};

/// Normalized rising-edge crossings of the column profile; flips falling
/// profiles. Levels are found walking outward from the 50% crossing.
EdgeCrossings edge_crossings(const Image& image, double pitch) {
    if (image.width < 2 || image.height < 1) {
        throw std::invalid_argument("edge profile: image too small");
    }
    std::vector<double> profile = column_profile(image);
    const double lo = *std::min_element(profile.begin(), profile.end());
    const double hi = *std::max_element(profile.begin(), profile.end());
    if (!(hi - lo > 1e-12 * std::max(std::fabs(hi), 1.0))) {
        throw std::runtime_error("edge profile: flat profile, no edge found");
    }
    for (double& v : profile) v = (v - lo) / (hi - lo);

    const int w = static_cast<int>(profile.size());
    const int head = std::max(1, w / 4);
    double front = 0.0, back = 0.0;
    for (int j = 0; j < head; ++j) front += profile[j];
    for (int j = w - head; j < w; ++j) back += profile[j];
    if (front > back) {
        for (double& v : profile) v = 1.0 - v;  // make the profile rising
    }

    const double x0 = -0.5 * w * pitch + 0.5 * pitch;  // center of column 0
    auto interp = [&](int j0, int j1, double level) {
        const double q0 = profile[j0], q1 = profile[j1];
        const double t = (level - q0) / (q1 - q0);
        return x0 + (j0 + t * (j1 - j0)) * pitch;
    };

    int j50 = -1;
    for (int j = 1; j < w; ++j) {
        if (profile[j - 1] < 0.5 && profile[j] >= 0.5) {
            j50 = j;
            break;
        }
    }
    if (j50 < 0) throw std::runtime_error("edge profile: no 50% crossing found");
    EdgeCrossings out;
    out.x50 = interp(j50 - 1, j50, 0.5);

    int jlow = -1;
    for (int j = j50 - 1; j >= 0; --j) {
        if (profile[j] <= 0.1) {
            jlow = j;
            break;
        }
    }
    if (jlow < 0) throw std::runtime_error("edge profile: 10% level not reached");
    out.x10 = interp(jlow, jlow + 1, 0.1);

    int jhigh = -1;
    for (int j = j50; j < w; ++j) {
        if (profile[j] >= 0.9) {
            jhigh = j;
            break;
        }
    }
    if (jhigh < 0) throw std::runtime_error("edge profile: 90% level not reached");
    out.x90 = interp(jhigh - 1, jhigh, 0.9);
    return out;
}

}  // namespace

double edge_spread_width_um(const Image& image, double pixel_pitch_um) {
    const EdgeCrossings c = edge_crossings(image, pixel_pitch_um);
    return c.x90 - c.x10;
}

double edge_position_um(const Image& image, double pixel_pitch_um) {
    return edge_crossings(image, pixel_pitch_um).x50;
}

std::vector<std::size_t> roi_from_truth(const Image& truth, int margin) {
    if (margin < 0) throw std::invalid_argument("roi_from_truth: negative margin");
    std::vector<std::size_t> roi;
    for (int y = margin; y < truth.height - margin; ++y) {
        for (int x = margin; x < truth.width - margin; ++x) {
            bool open = true;
            for (int dy = -margin; dy <= margin && open; ++dy) {
                for (int dx = -margin; dx <= margin && open; ++dx) {
                    if (truth.at(y + dy, x + dx) < 0.999) open = false;
                }
            }
            if (open) roi.push_back(static_cast<std::size_t>(y) * truth.width + x);
        }
    }
    return roi;
}

double loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : points) {
        if (x <= 0.0 || y <= 0.0) {
            throw std::invalid_argument("loglog_slope: points must be positive");
        }
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(points.size());
    return (sxy - sx * sy / n) / (sxx - sx * sx / n);
}

SnrCurve analyze_snr_curve(const PipelineConfig& cfg, const std::vector<int>& n_values) {
    if (n_values.empty()) throw std::invalid_argument("analyze_snr_curve: no N values");
    for (int n : n_values) {
        if (n > cfg.realizations) {
            throw std::invalid_argument("analyze_snr_curve: requested N " + std::to_string(n) +
                                        " exceeds available realizations " +
                                        std::to_string(cfg.realizations));
        }
        if (n < 2) throw std::invalid_argument("analyze_snr_curve: N must be >= 2");
    }
    const SceneModel scene = build_scene(cfg);
    SimulationProducts products = run_simulation(cfg);
    const auto frames = demultiplex(products.measurements.records);
    const int frame = cfg.analysis_frame >= 0
                          ? cfg.analysis_frame
                          : pick_analysis_frame(scene, products.samples_per_cycle);
    const Image truth = ground_truth_frame(scene, frame, products.samples_per_cycle);
    const auto roi = roi_from_truth(truth, cfg.roi_margin);
    if (roi.size() < 2) throw std::runtime_error("analyze_snr_curve: ROI has fewer than 2 pixels");

    SnrCurve curve;
    std::vector<std::pair<double, double>> fit_points;
    for (int n : n_values) {
        const PatternStack sub = subset_stack(products.reference, n);
        FrameMeasurements fm;
        fm.frame_index = frame;
        fm.values.assign(frames[frame].values.begin(), frames[frame].values.begin() + n);
        const Image g = correlate_gi(sub, fm);
        SnrReport report = snr(g, roi);
        report.n_realizations = n;
        if (!report.defined) {
            throw std::runtime_error("analyze_snr_curve: undefined SNR at N = " +
                                     std::to_string(n));
        }
        curve.points.push_back({n, report.snr, snr_error(report)});
        fit_points.emplace_back(static_cast<double>(n), report.snr);
    }
    curve.fit_a = fit_sqrt(fit_points);
    curve.slope = fit_points.size() >= 2 ? loglog_slope(fit_points) : 0.0;
    return curve;
}

std::vector<DosePoint> dose_sweep(const PipelineConfig& cfg,
                                  const std::vector<double>& flux_levels, int repeats) {
    if (flux_levels.empty()) throw std::invalid_argument("dose_sweep: no flux levels");
    if (repeats < 1) throw std::invalid_argument("dose_sweep: repeats must be >= 1");
    for (double f : flux_levels) {
        if (f <= 0.0) throw std::invalid_argument("dose_sweep: flux levels must be positive");
    }
    const SceneModel scene = build_scene(cfg);
    const PatternStack stack = build_patterns(cfg);
    SamplingConfig sampling = cfg.sampling;  // Poisson unless the config disables it
    const int spc = samples_per_cycle(sampling, scene.chopping_frequency_hz());
    const int frame =
        cfg.analysis_frame >= 0 ? cfg.analysis_frame : pick_analysis_frame(scene, spc);
    const Image truth = ground_truth_frame(scene, frame, spc);
    const auto roi = roi_from_truth(truth, cfg.roi_margin);
    if (roi.size() < 2) throw std::runtime_error("dose_sweep: ROI has fewer than 2 pixels");

    const CameraModel* camera = cfg.camera.enabled ? &cfg.camera : nullptr;

    std::vector<DosePoint> table;
    for (double flux : flux_levels) {
        sampling.photon_scale = calibrate_photon_scale(stack, scene, spc,
                                                       sampling.cycles_per_realization, flux);
        std::vector<double> snrs;
        for (int rep = 0; rep < repeats; ++rep) {
            sampling.noise_seed = cfg.sampling.noise_seed + static_cast<std::uint64_t>(rep);
            Campaign campaign = run_campaign(stack, scene, sampling, camera, cfg.threads);
            const auto frames = demultiplex(campaign.records);
            PipelineConfig run_cfg = cfg;
            run_cfg.sampling = sampling;
            const Image recon =
                reconstruct_frame(run_cfg, campaign.reference, frames[frame],
                                  sampling.photon_scale);
            const SnrReport report = snr(recon, roi);
            if (!report.defined) {
                throw std::runtime_error("dose_sweep: undefined SNR at flux " +
                                         std::to_string(flux));
            }
            snrs.push_back(report.snr);
        }
        double mean = 0.0;
        for (double s : snrs) mean += s;
        mean /= static_cast<double>(snrs.size());
        double var = 0.0;
        for (double s : snrs) var += (s - mean) * (s - mean);
        const double err = snrs.size() > 1
                               ? std::sqrt(var / (static_cast<double>(snrs.size()) - 1.0)) /
                                     std::sqrt(static_cast<double>(snrs.size()))
                               : 0.0;
        table.push_back({flux, mean, err});
    }
    return table;
}

std::vector<EdgeWidthRow> edge_width_analysis(const PipelineConfig& cfg) {
    const SceneModel scene = build_scene(cfg);
    SimulationProducts products = run_simulation(cfg);
    const auto frames = demultiplex(products.measurements.records);
    std::vector<EdgeWidthRow> rows;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const CyclePhase cp{0, static_cast<double>(f) / products.samples_per_cycle};
        if (!scene.edge_position(cp, false).has_value()) continue;
        const Image recon = reconstruct_frame(cfg, products.reference, frames[f],
                                              products.photon_scale);
        try {
            rows.push_back({static_cast<int>(f),
                            edge_spread_width_um(recon, cfg.grid.pixel_pitch_um)});
        } catch (const std::runtime_error&) {
            // edge too close to the border for a full profile; skip the frame
        }
    }
    return rows;
}

}  // namespace spgi
