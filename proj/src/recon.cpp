#include "spgi/recon.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "spgi/exact_sum.hpp"
#include "spgi/parallel.hpp"

namespace spgi {

std::shared_ptr<const Eigen::MatrixXd> sensing_matrix(const PatternStack& stack) {
    const int n = stack.count();
    const int p = static_cast<int>(stack.pixels_per_pattern());
    if (n < 1 || p < 1) throw std::invalid_argument("sensing_matrix: empty stack");
    auto A = std::make_shared<Eigen::MatrixXd>(n, p);
    for (int r = 0; r < n; ++r) {
        const auto pat = stack.pattern(r);
        for (int j = 0; j < p; ++j) (*A)(r, j) = pat[j];
    }
    return A;
}

SensingSystem make_sensing_system(std::shared_ptr<const Eigen::MatrixXd> A, int height,
                                  int width, const FrameMeasurements& frame,
                                  double measurement_scale, Preprocessing preprocessing) {
    if (!A) throw std::invalid_argument("make_sensing_system: null matrix");
    if (A->cols() != static_cast<Eigen::Index>(height) * width) {
        throw std::invalid_argument("make_sensing_system: matrix columns do not match grid");
    }
    if (A->rows() != static_cast<Eigen::Index>(frame.values.size())) {
        throw std::invalid_argument("make_sensing_system: pattern count " +
                                    std::to_string(A->rows()) + " vs measurement count " +
                                    std::to_string(frame.values.size()));
    }
    if (measurement_scale <= 0.0) {
        throw std::invalid_argument("make_sensing_system: measurement scale must be positive");
    }
    SensingSystem sys;
    sys.A = std::move(A);
    sys.height = height;
    sys.width = width;
    sys.preprocessing = preprocessing;
    sys.b.resize(static_cast<Eigen::Index>(frame.values.size()));
    for (Eigen::Index i = 0; i < sys.b.size(); ++i) {
        sys.b(i) = frame.values[static_cast<std::size_t>(i)] / measurement_scale;
    }
    return sys;
}

SensingSystem make_sensing_system(const PatternStack& stack, const FrameMeasurements& frame,
                                  double measurement_scale, Preprocessing preprocessing) {
    return make_sensing_system(sensing_matrix(stack), stack.height, stack.width, frame,
                               measurement_scale, preprocessing);
}

SensingSystem preprocess(const SensingSystem& system) {
    if (system.preprocessing == Preprocessing::raw) return system;
    if (system.n() < 2) {
        throw std::invalid_argument("preprocess: mean centering needs at least 2 rows");
    }
    SensingSystem out = system;
    const Eigen::MatrixXd& A = *system.A;
    out.column_means = A.colwise().mean();
    out.b_mean = system.b.mean();
    out.row_sum_mean = A.rowwise().sum().mean();
    auto centered = std::make_shared<Eigen::MatrixXd>(A.rowwise() - out.column_means.transpose());
    out.A = centered;
    out.b = system.b.array() - out.b_mean;
    out.centered = true;
    out.operator_norm_hint = 0.0;  // centering changes the spectrum
    return out;
}

Image correlate_gi(const PatternStack& stack, const FrameMeasurements& frame) {
    const int n = stack.count();
    if (n < 2) throw std::invalid_argument("correlate_gi: need at least 2 realizations");
    if (static_cast<int>(frame.values.size()) != n) {
        throw std::invalid_argument("correlate_gi: measurement count " +
                                    std::to_string(frame.values.size()) +
                                    " does not match pattern count " + std::to_string(n));
    }
    const std::size_t p = stack.pixels_per_pattern();

    // (1/N) sum_r B_r I_r  -  <B> <I>, one pass over the stack. Sums are
    // accumulated exactly so the result is bit-identical under joint
    // permutations of the realizations.
    ExactAccumulator b_sum;
    for (double v : frame.values) b_sum.add(v);
    const double b_mean = b_sum.round() / n;

    std::vector<ExactAccumulator> acc(p), pattern_sum(p);
    for (int r = 0; r < n; ++r) {
        const auto pat = stack.pattern(r);
        const double br = frame.values[r];
        for (std::size_t j = 0; j < p; ++j) {
            acc[j].add(br * pat[j]);
            pattern_sum[j].add(pat[j]);
        }
    }
    Image g(stack.height, stack.width);
    for (std::size_t j = 0; j < p; ++j) {
        g.data[j] = acc[j].round() / n - b_mean * (pattern_sum[j].round() / n);
    }
    return g;
}

std::pair<double, double> shrink2(double gx, double gy, double t) {
    if (t < 0.0) throw std::invalid_argument("shrink2: negative threshold");
    const double norm = std::sqrt(gx * gx + gy * gy);
    if (norm == 0.0) return {0.0, 0.0};
    const double kept = norm - t;
    if (kept <= 0.0) return {0.0, 0.0};
    const double scale = kept / norm;
    return {gx * scale, gy * scale};
}

void gradient_forward(const Eigen::VectorXd& x, int height, int width, Eigen::VectorXd& gx,
                      Eigen::VectorXd& gy) {
    gx.resize(x.size());
    gy.resize(x.size());
    for (int i = 0; i < height; ++i) {
        const int row = i * width;
        for (int j = 0; j < width; ++j) {
            const int idx = row + j;
            gx(idx) = (j < width - 1) ? x(idx + 1) - x(idx) : 0.0;
            gy(idx) = (i < height - 1) ? x(idx + width) - x(idx) : 0.0;
        }
    }
}

void gradient_adjoint(const Eigen::VectorXd& gx, const Eigen::VectorXd& gy, int height,
                      int width, Eigen::VectorXd& out) {
    out.setZero(static_cast<Eigen::Index>(height) * width);
    for (int i = 0; i < height; ++i) {
        const int row = i * width;
        for (int j = 0; j < width; ++j) {
            const int idx = row + j;
            double v = 0.0;
            if (j < width - 1) v -= gx(idx);
            if (j >= 1) v += gx(idx - 1);
            if (i < height - 1) v -= gy(idx);
            if (i >= 1) v += gy(idx - width);
            out(idx) = v;
        }
    }
}

double estimate_operator_norm(const Eigen::MatrixXd& A, int iterations) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.cols());
    v.normalize();
    double norm = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Eigen::VectorXd w = A.transpose() * (A * v);
        norm = std::sqrt(w.norm());
        if (w.norm() == 0.0) return 0.0;
        v = w / w.norm();
    }
    return norm;
}

namespace {

struct TvWork {
    Eigen::VectorXd gx, gy;    // D x
    Eigen::VectorXd wx, wy;    // splitting variables
    Eigen::VectorXd nux, nuy;  // multipliers
    Eigen::VectorXd ax;        // A x
    Eigen::VectorXd grad, dgx, dgy;
};

double isotropic_tv(const Eigen::VectorXd& gx, const Eigen::VectorXd& gy) {
    double tv = 0.0;
    for (Eigen::Index i = 0; i < gx.size(); ++i) {
        tv += std::sqrt(gx(i) * gx(i) + gy(i) * gy(i));
    }
    return tv;
}

/// Smooth surrogate q(x) for fixed (w, nu), with ax = A x and (gx, gy) = D x.
double surrogate(const Eigen::VectorXd& ax, const Eigen::VectorXd& gx,
                 const Eigen::VectorXd& gy, const TvWork& wk, const Eigen::VectorXd& b,
                 double mu_eff, double beta) {
    const double fid = 0.5 * mu_eff * (ax - b).squaredNorm();
    double split = 0.0;
    for (Eigen::Index i = 0; i < gx.size(); ++i) {
        const double rx = gx(i) - wk.wx(i);
        const double ry = gy(i) - wk.wy(i);
        split += 0.5 * beta * (rx * rx + ry * ry) - wk.nux(i) * rx - wk.nuy(i) * ry;
    }
    return fid + split;
}

}  // namespace

ReconstructedFrame reconstruct_tv(const SensingSystem& input, const TvConfig& cfg) {
    if (cfg.mu <= 0.0 || cfg.beta <= 0.0 || cfg.outer_tol <= 0.0 || cfg.max_outer < 1 ||
        cfg.inner_steps < 1) {
        throw std::invalid_argument("reconstruct_tv: invalid solver configuration");
    }
    const SensingSystem sys = preprocess(input);
    const Eigen::MatrixXd& A = *sys.A;
    const Eigen::VectorXd& b = sys.b;
    const int height = sys.height, width = sys.width;
    const Eigen::Index p = A.cols();
    if (!A.allFinite() || !b.allFinite()) {
        throw std::invalid_argument("reconstruct_tv: non-finite inputs");
    }

    ReconstructedFrame result;
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        if (A.row(r).isZero(0.0)) ++result.zero_pattern_rows;
    }
    const double op_norm = sys.operator_norm_hint > 0.0 ? sys.operator_norm_hint
                                                        : estimate_operator_norm(A);
    if (op_norm == 0.0) throw std::invalid_argument("reconstruct_tv: all-zero sensing matrix");
    // Solving with A/||A|| and b/||A|| equals solving the raw system with a
    // rescaled fidelity weight, so mu keeps one meaning across photon scales.
    const double mu_eff = cfg.mu / (op_norm * op_norm);
    const bool project = cfg.nonneg && !sys.centered;

    // x0 = A^T b scaled so that mean(A x0) matches mean(b).
    Eigen::VectorXd x = A.transpose() * b;
    TvWork wk;
    wk.ax = A * x;
    const double ax_mean = wk.ax.mean();
    if (ax_mean != 0.0) x *= b.mean() / ax_mean;
    if (project) x = x.cwiseMax(0.0);

    wk.ax = A * x;
    gradient_forward(x, height, width, wk.gx, wk.gy);
    wk.wx.setZero(p);
    wk.wy.setZero(p);
    wk.nux.setZero(p);
    wk.nuy.setZero(p);

    const double initial_objective =
        isotropic_tv(wk.gx, wk.gy) + 0.5 * mu_eff * (wk.ax - b).squaredNorm();

    Eigen::VectorXd best_x = x;
    double best_objective = initial_objective;
    Eigen::VectorXd prev_x, prev_grad;
    bool have_bb_pair = false;
    bool converged = false;
    int outer = 0;

    for (outer = 1; outer <= cfg.max_outer; ++outer) {
        // (a) splitting update via isotropic shrinkage
        const double threshold = 1.0 / cfg.beta;
        for (Eigen::Index i = 0; i < p; ++i) {
            const auto [sx, sy] = shrink2(wk.gx(i) - wk.nux(i) / cfg.beta,
                                          wk.gy(i) - wk.nuy(i) / cfg.beta, threshold);
            wk.wx(i) = sx;
            wk.wy(i) = sy;
        }

        // (b) a few BB gradient steps with backtracking on the smooth surrogate
        const Eigen::VectorXd x_outer = x;
        for (int step = 0; step < cfg.inner_steps; ++step) {
            Eigen::VectorXd res_x = cfg.beta * (wk.gx - wk.wx) - wk.nux;
            Eigen::VectorXd res_y = cfg.beta * (wk.gy - wk.wy) - wk.nuy;
            gradient_adjoint(res_x, res_y, height, width, wk.grad);
            wk.grad.noalias() += mu_eff * (A.transpose() * (wk.ax - b));

            const double gnorm2 = wk.grad.squaredNorm();
            if (gnorm2 == 0.0) break;

            double alpha;
            if (have_bb_pair) {
                const Eigen::VectorXd s = x - prev_x;
                const Eigen::VectorXd y = wk.grad - prev_grad;
                const double sty = s.dot(y);
                alpha = sty > 0.0 ? s.squaredNorm() / sty : 0.0;
            } else {
                alpha = 0.0;
            }
            if (alpha <= 0.0 || !std::isfinite(alpha)) {
                // exact steepest-descent step for the quadratic surrogate
                Eigen::VectorXd ag = A * wk.grad;
                gradient_forward(wk.grad, height, width, wk.dgx, wk.dgy);
                const double curvature = mu_eff * ag.squaredNorm() +
                                         cfg.beta * (wk.dgx.squaredNorm() + wk.dgy.squaredNorm());
                if (curvature <= 0.0) break;
                alpha = gnorm2 / curvature;
            }

            const double q0 = surrogate(wk.ax, wk.gx, wk.gy, wk, b, mu_eff, cfg.beta);
            prev_x = x;
            prev_grad = wk.grad;

            bool accepted = false;
            Eigen::VectorXd x_try, ax_try, gx_try, gy_try;
            for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
                x_try = x - alpha * wk.grad;
                if (project) x_try = x_try.cwiseMax(0.0);
                const double move = wk.grad.dot(x_try - x);
                if ((x_try - x).squaredNorm() == 0.0) break;  // stationary under projection
                ax_try.noalias() = A * x_try;
                gradient_forward(x_try, height, width, gx_try, gy_try);
                const double q_try = surrogate(ax_try, gx_try, gy_try, wk, b, mu_eff, cfg.beta);
                if (q_try <= q0 + cfg.armijo_c * move) {
                    x = std::move(x_try);
                    wk.ax = std::move(ax_try);
                    wk.gx = std::move(gx_try);
                    wk.gy = std::move(gy_try);
                    accepted = true;
                    break;
                }
                alpha *= cfg.backtrack;
            }
            if (!accepted) break;
            have_bb_pair = true;
        }

        // (c) multiplier update
        wk.nux -= cfg.beta * (wk.gx - wk.wx);
        wk.nuy -= cfg.beta * (wk.gy - wk.wy);

        const double objective =
            isotropic_tv(wk.gx, wk.gy) + 0.5 * mu_eff * (wk.ax - b).squaredNorm();
        if (objective < best_objective) {
            best_objective = objective;
            best_x = x;
        }

        const double denom = std::max(x_outer.norm(), 1e-30);
        if ((x - x_outer).norm() / denom < cfg.outer_tol) {
            converged = true;
            break;
        }
    }

    // report the best iterate by true objective
    Eigen::VectorXd x_final = best_x;
    if (sys.centered) {
        const double dc_gap =
            sys.b_mean - ((*sys.A) * x_final).mean() - sys.column_means.dot(x_final);
        if (sys.row_sum_mean != 0.0) {
            x_final.array() += dc_gap / sys.row_sum_mean;
        }
        if (cfg.nonneg) x_final = x_final.cwiseMax(0.0);
    }

    result.image = Image(height, width);
    for (Eigen::Index i = 0; i < p; ++i) result.image.data[static_cast<std::size_t>(i)] = x_final(i);
    result.iterations = std::min(outer, cfg.max_outer);
    result.initial_objective = initial_objective;
    result.final_objective = best_objective;
    result.residual_norm = ((*sys.A) * best_x - b).norm();
    result.converged = converged;
    return result;
}

std::vector<ReconstructedFrame> reconstruct_movie(const PatternStack& stack,
                                                  const std::vector<FrameMeasurements>& frames,
                                                  const TvConfig& cfg, double measurement_scale,
                                                  Preprocessing preprocessing, int threads) {
    auto A = sensing_matrix(stack);
    const double op_norm =
        preprocessing == Preprocessing::raw ? estimate_operator_norm(*A) : 0.0;
    std::vector<ReconstructedFrame> out(frames.size());
    parallel_for(frames.size(), threads, [&](std::size_t f) {
        SensingSystem sys = make_sensing_system(A, stack.height, stack.width, frames[f],
                                                measurement_scale, preprocessing);
        sys.operator_norm_hint = op_norm;
        out[f] = reconstruct_tv(sys, cfg);
    });
    return out;
}

}  // namespace spgi
