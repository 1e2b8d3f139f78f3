#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>
#include <vector>

#include "spgi/demux.hpp"
#include "spgi/image.hpp"
#include "spgi/patterns.hpp"

namespace spgi {

enum class Preprocessing { raw, mean_centered };

/// Linear sensing model A x = b with A row r the flattened pattern r.
struct SensingSystem {
    std::shared_ptr<const Eigen::MatrixXd> A;  // N x p
    Eigen::VectorXd b;                         // length N
    int height = 0;
    int width = 0;
    Preprocessing preprocessing = Preprocessing::raw;

    // Set by preprocess() in mean_centered mode, used to restore the DC level.
    bool centered = false;
    Eigen::VectorXd column_means;
    double b_mean = 0.0;
    double row_sum_mean = 0.0;

    /// Estimated operator norm of A; 0 means "compute when needed".
    double operator_norm_hint = 0.0;

    int n() const { return A ? static_cast<int>(A->rows()) : 0; }
    int p() const { return height * width; }
};

/// Shared sensing matrix for a stack (rows are flattened patterns).
std::shared_ptr<const Eigen::MatrixXd> sensing_matrix(const PatternStack& stack);

/// System for one frame; measurement values are divided by measurement_scale
/// (photon_scale times summed cycles) so the solution is in transmission units.
SensingSystem make_sensing_system(std::shared_ptr<const Eigen::MatrixXd> A, int height,
                                  int width, const FrameMeasurements& frame,
                                  double measurement_scale = 1.0,
                                  Preprocessing preprocessing = Preprocessing::raw);
SensingSystem make_sensing_system(const PatternStack& stack, const FrameMeasurements& frame,
                                  double measurement_scale = 1.0,
                                  Preprocessing preprocessing = Preprocessing::raw);

/// Apply the system's preprocessing mode. Raw mode is the identity;
/// mean_centered subtracts column means from A and the mean from b and records
/// what is needed to add the mean level back after solving.
SensingSystem preprocess(const SensingSystem& system);

struct TvConfig {
    double mu = 256.0;   // data-fidelity weight (2^8)
    double beta = 64.0;  // splitting penalty (2^6)
    double outer_tol = 1e-4;
    int max_outer = 300;
    int inner_steps = 3;       // BB gradient steps per outer iteration
    double armijo_c = 1e-4;    // sufficient-decrease constant
    double backtrack = 0.5;    // step shrink factor
    int max_backtracks = 40;
    bool nonneg = true;
};

struct ReconstructedFrame {
    Image image;
    int iterations = 0;
    double initial_objective = 0.0;  // objective at x0 = A^T b, rescaled
    double final_objective = 0.0;
    double residual_norm = 0.0;  // ||Ax - b|| of the solved system
    bool converged = false;
    int zero_pattern_rows = 0;
};

/// Classical correlation ghost imaging:
/// G(x,y) = (1/N) sum_r (B_r - <B>) (I_r(x,y) - <I(x,y)>).
Image correlate_gi(const PatternStack& stack, const FrameMeasurements& frame);

/// Isotropic two-component shrinkage: shortens (gx, gy) radially by t.
std::pair<double, double> shrink2(double gx, double gy, double t);

/// TV/L2+ reconstruction: min_{x>=0} sum_i ||D_i x||_2 + (mu/2) ||Ax - b||^2
/// via variable splitting w_i = D_i x with an augmented Lagrangian on the
/// splitting; w-updates use shrink2, x-updates use Barzilai-Borwein gradient
/// steps with backtracking, multipliers nu_i <- nu_i - beta (D_i x - w_i).
/// D is the forward-difference gradient with replicate boundary.
ReconstructedFrame reconstruct_tv(const SensingSystem& system, const TvConfig& cfg);

/// Per-frame reconstruction of a whole movie; frames are independent and may
/// run in parallel with identical results.
std::vector<ReconstructedFrame> reconstruct_movie(const PatternStack& stack,
                                                  const std::vector<FrameMeasurements>& frames,
                                                  const TvConfig& cfg,
                                                  double measurement_scale = 1.0,
                                                  Preprocessing preprocessing = Preprocessing::raw,
                                                  int threads = 1);

/// Forward differences with replicate boundary (zero across the border) and
/// the matching adjoint; exposed for tests.
void gradient_forward(const Eigen::VectorXd& x, int height, int width, Eigen::VectorXd& gx,
                      Eigen::VectorXd& gy);
void gradient_adjoint(const Eigen::VectorXd& gx, const Eigen::VectorXd& gy, int height,
                      int width, Eigen::VectorXd& out);

/// Power-iteration estimate of the operator norm of A.
double estimate_operator_norm(const Eigen::MatrixXd& A, int iterations = 30);

}  // namespace spgi
