#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <vector>

#include "spgi/exact_sum.hpp"
#include "spgi/recon.hpp"
#include "spgi/rng.hpp"

using namespace spgi;

namespace {

PatternStack stack_from_matrix(const Eigen::MatrixXd& A, int h, int w) {
    PatternStack stack;
    stack.height = h;
    stack.width = w;
    stack.pixel_pitch_um = 1.0;
    stack.data.resize(static_cast<std::size_t>(A.rows()) * A.cols());
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            stack.data[static_cast<std::size_t>(r) * A.cols() + j] = A(r, j);
        }
    }
    return stack;
}

Image phantom8() {
    Image img(8, 8, 0.2);
    for (int y = 2; y <= 4; ++y) {
        for (int x = 3; x <= 6; ++x) img.at(y, x) = 0.8;
    }
    return img;
}

Eigen::MatrixXd gaussian_matrix(int n, int p, std::uint64_t seed) {
    Eigen::MatrixXd A(n, p);
    Rng rng = rng_stream(seed, {101});
    for (int r = 0; r < n; ++r) {
        for (int j = 0; j < p; ++j) A(r, j) = rng.next_gaussian();
    }
    return A;
}

FrameMeasurements measure(const Eigen::MatrixXd& A, const Image& object) {
    Eigen::VectorXd x(object.data.size());
    for (std::size_t i = 0; i < object.data.size(); ++i) x(static_cast<Eigen::Index>(i)) = object.data[i];
    const Eigen::VectorXd b = A * x;
    FrameMeasurements fm;
    fm.values.assign(b.data(), b.data() + b.size());
    return fm;
}

double dynamic_range(const Image& img) { return image_max(img) - image_min(img); }

}  // namespace

TEST_CASE("exact accumulation is permutation invariant and correctly rounded") {
    Rng rng = rng_stream(2, {0});
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values(200);
        for (double& v : values) {
            v = (rng.next_gaussian()) * std::pow(10.0, static_cast<int>(rng.next_u64() % 12) - 6);
        }
        ExactAccumulator fwd;
        for (double v : values) fwd.add(v);
        ExactAccumulator rev;
        for (auto it = values.rbegin(); it != values.rend(); ++it) rev.add(*it);
        CHECK(fwd.round() == rev.round());

        long double ref = 0.0L;
        for (double v : values) ref += static_cast<long double>(v);
        CHECK(fwd.round() == doctest::Approx(static_cast<double>(ref)).epsilon(1e-15));
    }
}

TEST_CASE("shrink2 exact values") {
    {
        const auto [x, y] = shrink2(3.0, 4.0, 1.0);
        CHECK(x == doctest::Approx(2.4).epsilon(1e-12));
        CHECK(y == doctest::Approx(3.2).epsilon(1e-12));
    }
    CHECK(shrink2(0.3, 0.4, 0.5) == std::pair{0.0, 0.0});
    CHECK(shrink2(0.3, 0.4, 5.0) == std::pair{0.0, 0.0});
    CHECK(shrink2(0.0, 0.0, 1.0) == std::pair{0.0, 0.0});
    // zero threshold is the identity
    CHECK(shrink2(1.7, -2.3, 0.0) == std::pair{1.7, -2.3});
}

TEST_CASE("shrink2 contracts toward the origin") {
    Rng rng = rng_stream(4, {0});
    for (int i = 0; i < 200; ++i) {
        const double gx = rng.next_gaussian(), gy = rng.next_gaussian();
        const double t = rng.next_unit();
        const auto [sx, sy] = shrink2(gx, gy, t);
        CHECK(std::hypot(sx, sy) <= std::hypot(gx, gy) + 1e-15);
    }
}

TEST_CASE("gradient operators are adjoint") {
    const int h = 7, w = 9, p = h * w;
    Rng rng = rng_stream(6, {0});
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd x(p), gx(p), gy(p), atg(p);
        Eigen::VectorXd ux(p), uy(p);
        for (int i = 0; i < p; ++i) {
            x(i) = rng.next_gaussian();
            ux(i) = rng.next_gaussian();
            uy(i) = rng.next_gaussian();
        }
        gradient_forward(x, h, w, gx, gy);
        gradient_adjoint(ux, uy, h, w, atg);
        const double lhs = gx.dot(ux) + gy.dot(uy);
        const double rhs = x.dot(atg);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("replicate boundary zeroes the border gradient") {
    const int h = 4, w = 5;
    Eigen::VectorXd x(h * w), gx, gy;
    Rng rng = rng_stream(7, {0});
    for (int i = 0; i < h * w; ++i) x(i) = rng.next_unit();
    gradient_forward(x, h, w, gx, gy);
    for (int y = 0; y < h; ++y) CHECK(gx(y * w + (w - 1)) == 0.0);
    for (int xcol = 0; xcol < w; ++xcol) CHECK(gy((h - 1) * w + xcol) == 0.0);
}

TEST_CASE("constant measurements correlate to a zero image") {
    const Eigen::MatrixXd A = gaussian_matrix(12, 16, 3).cwiseAbs();
    const PatternStack stack = stack_from_matrix(A, 4, 4);
    FrameMeasurements fm;
    fm.values.assign(12, 5.0);
    const Image g = correlate_gi(stack, fm);
    for (double v : g.data) CHECK(v == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("two-pattern correlation reproduces the hand-computed covariance") {
    PatternStack stack;
    stack.height = 1;
    stack.width = 2;
    stack.pixel_pitch_um = 1.0;
    stack.data = {1.0, 0.0, 0.0, 1.0};  // I1 = [1,0], I2 = [0,1]
    FrameMeasurements fm;
    fm.values = {1.0, 0.0};
    const Image g = correlate_gi(stack, fm);
    CHECK(g.data[0] == 0.25);
    CHECK(g.data[1] == -0.25);
}

TEST_CASE("one-hot patterns give an affine copy of the object") {
    const int h = 5, w = 5, p = h * w;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p, p);
    const PatternStack stack = stack_from_matrix(A, h, w);
    Image object(h, w);
    Rng rng = rng_stream(11, {0});
    for (double& v : object.data) v = rng.next_unit();
    const FrameMeasurements fm = measure(A, object);
    const Image g = correlate_gi(stack, fm);

    // closed form: G = (T - mean(T)) / N
    const double mean = image_mean(object);
    for (int i = 0; i < p; ++i) {
        CHECK(g.data[i] == doctest::Approx((object.data[i] - mean) / p).epsilon(1e-12));
    }
    std::vector<double> gv(g.data.begin(), g.data.end());
    std::vector<double> tv(object.data.begin(), object.data.end());
    CHECK(pearson_correlation(gv, tv) >= 0.99);
}

TEST_CASE("correlation requires at least two realizations") {
    PatternStack stack;
    stack.height = 1;
    stack.width = 2;
    stack.pixel_pitch_um = 1.0;
    stack.data = {1.0, 0.0};
    FrameMeasurements fm;
    fm.values = {1.0};
    CHECK_THROWS_AS(correlate_gi(stack, fm), std::invalid_argument);
}

TEST_CASE("zero measurements give the zero image in one outer iteration") {
    const Eigen::MatrixXd A = gaussian_matrix(20, 64, 13);
    const PatternStack stack = stack_from_matrix(A, 8, 8);
    FrameMeasurements fm;
    fm.values.assign(20, 0.0);
    const SensingSystem sys = make_sensing_system(stack, fm);
    const ReconstructedFrame out = reconstruct_tv(sys, TvConfig{});
    CHECK(out.iterations == 1);
    CHECK(out.converged);
    for (double v : out.image.data) CHECK(v == 0.0);
}

TEST_CASE("full-rank noiseless system matches the pseudo-inverse oracle") {
    const Image truth = phantom8();
    const Eigen::MatrixXd A = gaussian_matrix(64, 64, 17);
    const FrameMeasurements fm = measure(A, truth);
    const PatternStack stack = stack_from_matrix(A, 8, 8);

    // oracle: least-squares solve, independent of the TV solver path
    Eigen::VectorXd b(64);
    for (int i = 0; i < 64; ++i) b(i) = fm.values[i];
    const Eigen::VectorXd x_ls = A.completeOrthogonalDecomposition().solve(b);

    TvConfig cfg;
    cfg.mu = std::pow(2.0, 16);
    cfg.outer_tol = 1e-10;
    cfg.max_outer = 4000;
    const ReconstructedFrame out = reconstruct_tv(make_sensing_system(stack, fm), cfg);

    double err_oracle = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double d = out.image.data[i] - x_ls(i);
        err_oracle += d * d;
    }
    const double rmse = std::sqrt(err_oracle / 64.0);
    CHECK(rmse <= 1e-3 * dynamic_range(truth));
}

TEST_CASE("compressive recovery at N = 0.4 p") {
    const Image truth = phantom8();
    const Eigen::MatrixXd A = gaussian_matrix(26, 64, 19);
    const FrameMeasurements fm = measure(A, truth);
    const PatternStack stack = stack_from_matrix(A, 8, 8);

    TvConfig cfg;
    cfg.outer_tol = 1e-8;
    cfg.max_outer = 3000;
    const ReconstructedFrame out = reconstruct_tv(make_sensing_system(stack, fm), cfg);

    double num = 0.0, den = 0.0;
    for (int i = 0; i < 64; ++i) {
        const double d = out.image.data[i] - truth.data[i];
        num += d * d;
        den += truth.data[i] * truth.data[i];
    }
    CHECK(std::sqrt(num / den) <= 5e-2);
}

TEST_CASE("objective decreases and the residual shrinks on consistent systems") {
    const Image truth = phantom8();
    const Eigen::MatrixXd A = gaussian_matrix(40, 64, 23);
    const FrameMeasurements fm = measure(A, truth);
    const PatternStack stack = stack_from_matrix(A, 8, 8);
    const SensingSystem sys = make_sensing_system(stack, fm);

    const ReconstructedFrame out = reconstruct_tv(sys, TvConfig{});
    CHECK(out.final_objective <= out.initial_objective);

    // residual at x0 computed independently
    Eigen::VectorXd b(40);
    for (int i = 0; i < 40; ++i) b(i) = fm.values[i];
    Eigen::VectorXd x0 = A.transpose() * b;
    const double ax_mean = (A * x0).mean();
    if (ax_mean != 0.0) x0 *= b.mean() / ax_mean;
    x0 = x0.cwiseMax(0.0);
    const double r0 = (A * x0 - b).norm();
    CHECK(out.residual_norm <= r0);
}

TEST_CASE("non-convergence is reported, not thrown") {
    const Image truth = phantom8();
    const Eigen::MatrixXd A = gaussian_matrix(40, 64, 29);
    const FrameMeasurements fm = measure(A, truth);
    const PatternStack stack = stack_from_matrix(A, 8, 8);
    TvConfig cfg;
    cfg.max_outer = 2;
    cfg.outer_tol = 1e-14;
    const ReconstructedFrame out = reconstruct_tv(make_sensing_system(stack, fm), cfg);
    CHECK_FALSE(out.converged);
    CHECK(out.iterations == 2);
}

TEST_CASE("solver rejects degenerate inputs") {
    PatternStack stack;
    stack.height = 2;
    stack.width = 2;
    stack.pixel_pitch_um = 1.0;
    stack.data.assign(8, 0.0);  // two all-zero patterns
    FrameMeasurements fm;
    fm.values = {0.0, 0.0};
    CHECK_THROWS_AS(reconstruct_tv(make_sensing_system(stack, fm), TvConfig{}),
                    std::invalid_argument);

    TvConfig bad;
    bad.mu = -1.0;
    CHECK_THROWS_AS(reconstruct_tv(SensingSystem{}, bad), std::invalid_argument);
}

TEST_CASE("preprocess raw is the identity and centering zeroes duplicate rows") {
    Eigen::MatrixXd A(3, 4);
    A << 1, 2, 3, 4, 1, 2, 3, 4, 1, 2, 3, 4;
    auto shared = std::make_shared<Eigen::MatrixXd>(A);
    FrameMeasurements fm;
    fm.values = {10, 10, 10};
    SensingSystem sys = make_sensing_system(shared, 2, 2, fm);
    const SensingSystem raw = preprocess(sys);
    CHECK(raw.A.get() == sys.A.get());

    sys.preprocessing = Preprocessing::mean_centered;
    const SensingSystem centered = preprocess(sys);
    CHECK(centered.A->isZero(0.0));
    CHECK(centered.b.isZero(0.0));
    CHECK(centered.b_mean == doctest::Approx(10.0));
}

TEST_CASE("centered and raw pipelines agree on a constant object") {
    const int p = 64;
    Image flat(8, 8, 0.6);
    const Eigen::MatrixXd A = gaussian_matrix(p, p, 31).cwiseAbs();
    const FrameMeasurements fm = measure(A, flat);
    const PatternStack stack = stack_from_matrix(A, 8, 8);

    TvConfig cfg;
    cfg.outer_tol = 1e-8;
    cfg.max_outer = 2000;
    const ReconstructedFrame raw =
        reconstruct_tv(make_sensing_system(stack, fm, 1.0, Preprocessing::raw), cfg);
    const ReconstructedFrame cen =
        reconstruct_tv(make_sensing_system(stack, fm, 1.0, Preprocessing::mean_centered), cfg);

    CHECK(image_mean(cen.image) ==
          doctest::Approx(image_mean(raw.image)).epsilon(0.02));
}

TEST_CASE("joint row permutations leave reconstructions unchanged") {
    const Image truth = phantom8();
    const Eigen::MatrixXd A = gaussian_matrix(32, 64, 37);
    const FrameMeasurements fm = measure(A, truth);
    const PatternStack stack = stack_from_matrix(A, 8, 8);

    std::vector<int> perm(32);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = rng_stream(41, {0});
    for (int i = 31; i > 0; --i) {
        std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
    }
    Eigen::MatrixXd Ap(32, 64);
    FrameMeasurements fmp;
    fmp.values.resize(32);
    for (int r = 0; r < 32; ++r) {
        Ap.row(r) = A.row(perm[r]);
        fmp.values[r] = fm.values[perm[r]];
    }
    const PatternStack stackp = stack_from_matrix(Ap, 8, 8);

    // correlation is permutation invariant bit for bit
    const Image g = correlate_gi(stack, fm);
    const Image gp = correlate_gi(stackp, fmp);
    for (std::size_t i = 0; i < g.data.size(); ++i) CHECK(g.data[i] == gp.data[i]);

    // the TV solve agrees within solver tolerance
    TvConfig cfg;
    cfg.outer_tol = 1e-8;
    cfg.max_outer = 2000;
    const Image a = reconstruct_tv(make_sensing_system(stack, fm), cfg).image;
    const Image b = reconstruct_tv(make_sensing_system(stackp, fmp), cfg).image;
    CHECK(image_rmse(a, b) < 1e-4);
}

TEST_CASE("movie reconstruction: one frame equals reconstruct_tv, static frames agree") {
    const Image truth = phantom8();
    const Eigen::MatrixXd A = gaussian_matrix(48, 64, 43).cwiseAbs();
    const FrameMeasurements fm = measure(A, truth);
    const PatternStack stack = stack_from_matrix(A, 8, 8);

    TvConfig cfg;
    cfg.max_outer = 200;
    const ReconstructedFrame single = reconstruct_tv(make_sensing_system(stack, fm), cfg);

    std::vector<FrameMeasurements> frames(3, fm);
    for (int f = 0; f < 3; ++f) frames[f].frame_index = f;
    const auto movie = reconstruct_movie(stack, frames, cfg, 1.0, Preprocessing::raw, 2);
    REQUIRE(movie.size() == 3);
    for (const auto& frame : movie) {
        CHECK(frame.image.data == single.image.data);
    }
}
