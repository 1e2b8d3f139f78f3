#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "spgi/metrics.hpp"
#include "spgi/rng.hpp"

using namespace spgi;

namespace {

/// Small desk-scale chopper pipeline whose frame S/4 has the blade edge
/// exactly at the FOV center.
PipelineConfig desk_config() {
    PipelineConfig cfg;
    cfg.grid = {24, 24, 6.5};
    cfg.diffuser_seed = 42;
    cfg.feature_size_px = 1.0;
    cfg.realizations = 600;
    cfg.scene_kind = "chopper";
    cfg.chopping_frequency_hz = 200.0;
    cfg.blade_count = 10;
    cfg.duty_cycle = 0.5;
    cfg.beam_radius_mm = 4.8;
    cfg.jitter_deg = 0.0;
    cfg.sampling.sample_rate_hz = 200.0 * 8;  // 8 frames per cycle
    cfg.sampling.cycles_per_realization = 1;
    cfg.sampling.noise = NoiseKind::none;
    cfg.method = "correlation";
    cfg.roi_margin = 2;
    cfg.threads = 2;
    return cfg;
}

}  // namespace

TEST_CASE("snr of [2, 4] under the sample divisor") {
    Image img(1, 2);
    img.data = {2.0, 4.0};
    const SnrReport report = snr(img, {0, 1});
    CHECK(report.mu == 3.0);
    CHECK(report.sigma == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(report.snr == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(report.defined);
}

TEST_CASE("constant ROI reports an undefined SNR instead of infinity") {
    Image img(2, 2, 1.0);
    const SnrReport report = snr(img, {0, 1, 2, 3});
    CHECK_FALSE(report.defined);
    CHECK(std::isnan(report.snr));
    CHECK_THROWS_AS(snr_error(report), std::invalid_argument);
}

TEST_CASE("snr validates its ROI") {
    Image img(2, 2, 1.0);
    CHECK_THROWS_AS(snr(img, {0}), std::invalid_argument);
    CHECK_THROWS_AS(snr(img, {0, 99}), std::out_of_range);
}

TEST_CASE("snr is scale invariant") {
    Image img(4, 4);
    Rng rng = rng_stream(3, {1});
    for (double& v : img.data) v = rng.next_unit() + 0.5;
    std::vector<std::size_t> roi;
    for (std::size_t i = 0; i < img.data.size(); ++i) roi.push_back(i);
    const double base = snr(img, roi).snr;
    Image scaled = img;
    for (double& v : scaled.data) v *= 3.7;
    CHECK(snr(scaled, roi).snr == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("fit_sqrt recovers exact and noisy coefficients") {
    std::vector<std::pair<double, double>> exact;
    for (double n : {50.0, 100.0, 400.0, 1600.0}) exact.emplace_back(n, 0.5 * std::sqrt(n));
    CHECK(fit_sqrt(exact) == doctest::Approx(0.5).epsilon(1e-12));

    // single point, the coefficient form used in the results table
    CHECK(fit_sqrt({{100.0, 1.033}}) == doctest::Approx(0.1033).epsilon(1e-12));

    Rng rng = rng_stream(5, {2});
    std::vector<std::pair<double, double>> noisy;
    for (int i = 1; i <= 20; ++i) {
        const double n = 100.0 * i;
        noisy.emplace_back(n, 0.2 * std::sqrt(n) * (1.0 + 0.05 * rng.next_gaussian()));
    }
    CHECK(fit_sqrt(noisy) == doctest::Approx(0.2).epsilon(0.03));

    CHECK_THROWS_AS(fit_sqrt({}), std::invalid_argument);
    CHECK_THROWS_AS(fit_sqrt({{0.5, 1.0}}), std::invalid_argument);
}

TEST_CASE("snr_error evaluates the printed expression verbatim") {
    SnrReport report;
    report.defined = true;
    report.roi_size = 100;
    report.mu = 0.0;
    report.sigma = 2.0;
    CHECK(snr_error(report) == doctest::Approx(std::sqrt(1.0 / 100.0)).epsilon(1e-12));

    // verbatim evaluation at arbitrary values
    report.mu = 3.0;
    report.sigma = 1.5;
    report.roi_size = 100;
    const double e1 = snr_error(report);
    CHECK(e1 == doctest::Approx(std::sqrt(1.0 / 100.0 + 9.0 / (3.375 * 10.0))).epsilon(1e-12));

    // both terms decay with I, so the error vanishes in the large-sample limit
    report.roi_size = 1000000;
    const double e2 = snr_error(report);
    CHECK(e2 < e1);
    CHECK(e2 == doctest::Approx(std::sqrt(1e-6 + 9.0 / (3.375 * 1000.0))).epsilon(1e-12));
}

TEST_CASE("snr_error tracks a bootstrap oracle in its working regime") {
    // Gaussian ROI with mu = 300, sigma = 200: the heuristic and the
    // resampling estimate coincide near hundred-scale sigma.
    const std::size_t n = 10000;
    Image img(100, 100);
    Rng rng = rng_stream(7, {3});
    for (double& v : img.data) v = 300.0 + 200.0 * rng.next_gaussian();
    std::vector<std::size_t> roi(n);
    for (std::size_t i = 0; i < n; ++i) roi[i] = i;
    const SnrReport report = snr(img, roi);
    const double heuristic = snr_error(report);

    // bootstrap oracle over ROI resampling
    const int resamples = 400;
    std::vector<double> snrs;
    Rng boot = rng_stream(7, {4});
    for (int b = 0; b < resamples; ++b) {
        double sum = 0.0, sum2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = img.data[boot.next_u64() % n];
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / n;
        const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1.0));
        snrs.push_back(mean / sd);
    }
    double bm = 0.0;
    for (double s : snrs) bm += s;
    bm /= resamples;
    double bv = 0.0;
    for (double s : snrs) bv += (s - bm) * (s - bm);
    const double bootstrap_sd = std::sqrt(bv / (resamples - 1.0));

    CHECK(std::fabs(heuristic - bootstrap_sd) <= 0.2 * bootstrap_sd);
}

TEST_CASE("edge spread of an ideal step stays within one pixel") {
    // edge aligned with a pixel boundary
    Image img(16, 32, 0.0);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) img.at(y, x) = 1.0;
    }
    CHECK(edge_spread_width_um(img, 6.5) <= 6.5);

    // an edge inside a pixel adds at most one more column to the ramp
    Image frac = img;
    for (int y = 0; y < 16; ++y) frac.at(y, 16) = 0.4;
    CHECK(edge_spread_width_um(frac, 6.5) <= 2.0 * 6.5);
}

TEST_CASE("edge spread of a Gaussian-blurred step matches the numeric oracle") {
    const double sigma_px = 3.0 / 2.3548200450309493;  // FWHM 3 px
    const double pitch = 6.5;
    Image img(8, 64);
    for (int x = 0; x < 64; ++x) {
        const double xc = (x + 0.5 - 32.0);
        const double v = 0.5 * (1.0 + std::erf(xc / (sigma_px * std::sqrt(2.0))));
        for (int y = 0; y < 8; ++y) img.at(y, x) = v;
    }

    // oracle: bisect the analytic profile for the 10% and 90% levels
    auto level_at = [&](double level) {
        double lo = -20.0, hi = 20.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double v = 0.5 * (1.0 + std::erf(mid / (sigma_px * std::sqrt(2.0))));
            (v < level ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double oracle_width = (level_at(0.9) - level_at(0.1)) * pitch;

    const double measured = edge_spread_width_um(img, pitch);
    CHECK(measured == doctest::Approx(oracle_width).epsilon(0.10));
}

TEST_CASE("flat images raise the no-edge error") {
    Image img(8, 8, 0.5);
    CHECK_THROWS_WITH_AS(edge_spread_width_um(img, 1.0), doctest::Contains("flat"),
                         std::runtime_error);
}

TEST_CASE("edge position finds the 50% crossing") {
    Image img(4, 20, 0.0);
    // falling edge: open left of column 12
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 12; ++x) img.at(y, x) = 1.0;
    }
    const double pos = edge_position_um(img, 1.0);
    // crossing between columns 11 and 12, FOV center at column 10
    CHECK(pos == doctest::Approx(1.5).epsilon(0.2));
}

TEST_CASE("roi_from_truth keeps interior open pixels only") {
    Image truth(8, 8, 0.0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 4; ++x) truth.at(y, x) = 1.0;
    }
    const auto roi = roi_from_truth(truth, 1);
    // open columns 0..3, interior needs x in [1, 2] minus the edge at 3, y in [1, 6]
    CHECK(roi.size() == 12);
    for (std::size_t idx : roi) {
        const int x = static_cast<int>(idx % 8);
        CHECK(x >= 1);
        CHECK(x <= 2);
    }
}

TEST_CASE("loglog_slope recovers power laws") {
    std::vector<std::pair<double, double>> pts;
    for (double x : {1.0, 2.0, 4.0, 8.0}) pts.emplace_back(x, 3.0 * std::pow(x, 0.5));
    CHECK(loglog_slope(pts) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("snr curve scales like sqrt(N) and predicts a held-out point") {
    PipelineConfig cfg = desk_config();
    cfg.realizations = 1200;
    const SnrCurve curve = analyze_snr_curve(cfg, {100, 200, 400, 800});
    CHECK(curve.fit_a > 0.0);
    CHECK(curve.slope > 0.35);
    CHECK(curve.slope < 0.65);

    const SnrCurve held = analyze_snr_curve(cfg, {1200});
    const double predicted = curve.fit_a * std::sqrt(1200.0);
    const double tol = std::max(1.96 * held.points[0].error, 0.10 * predicted);
    CHECK(std::fabs(held.points[0].snr - predicted) <= tol);
}

TEST_CASE("requesting more realizations than available is an error") {
    PipelineConfig cfg = desk_config();
    cfg.realizations = 100;
    CHECK_THROWS_WITH_AS(analyze_snr_curve(cfg, {400}), doctest::Contains("exceeds"),
                         std::invalid_argument);
}

TEST_CASE("poisson-only dose sweep climbs with a square-root slope") {
    PipelineConfig cfg = desk_config();
    cfg.sampling.noise = NoiseKind::poisson;
    cfg.sampling.noise_seed = 11;
    const auto table = dose_sweep(cfg, {8.0, 16.0, 32.0, 64.0, 80.0}, 3);
    REQUIRE(table.size() == 5);
    for (std::size_t i = 1; i < table.size(); ++i) {
        CHECK(table[i].snr >= table[i - 1].snr);
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : table) pts.emplace_back(row.flux, row.snr);
    const double slope = loglog_slope(pts);
    CHECK(slope == doctest::Approx(0.5).epsilon(0.3));  // 0.5 +- 0.15
}

TEST_CASE("dose sweep without noise is flat in flux") {
    PipelineConfig cfg = desk_config();
    cfg.sampling.noise = NoiseKind::none;
    const auto table = dose_sweep(cfg, {100.0, 1000.0}, 1);
    REQUIRE(table.size() == 2);
    CHECK(table[0].snr == doctest::Approx(table[1].snr).epsilon(1e-9));
}
