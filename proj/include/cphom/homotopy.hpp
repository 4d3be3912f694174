#pragma once

// Multi-homogeneous linear-product homotopy for the systems in polysys.hpp.
//
// The start system replaces every kept multilinear row by a product of
// linear forms, (α_jᵀx)(β_jᵀy)[(γ_jᵀz)], and keeps the normalizations. Its
// solutions come from choosing which factor vanishes in each row, so there
// are exactly as many as the multi-homogeneous Bézout number. Paths of
//
//   H(z, t) = (1 - t) γ Q0(z) + t P(z)
//
// are followed from t = 0 to t = 1 with an Euler predictor and a Newton
// corrector.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cphom/polysys.hpp"

namespace cphom {

/// (Σ(d-1))! / ∏ (d-1)!
std::uint64_t bezout_count(const Dims& mode_dims);

struct StartSystem {
    Dims mode_dims;
    /// forms[k] is mode_dims[k] x n_products; column j holds α_j (k=0), β_j (k=1) or γ_j (k=2).
    std::vector<Eigen::MatrixXd> forms;
    std::vector<Eigen::VectorXd> norm_vectors;
    std::uint64_t seed = 0;

    Index num_products() const { return forms.empty() ? 0 : forms.front().cols(); }
    Index num_vars() const;
};

/// Linear forms drawn from `seed`; normalization vectors taken from `norm_vectors`.
StartSystem make_start_system(const Dims& mode_dims, std::vector<Eigen::VectorXd> norm_vectors, std::uint64_t seed);
/// Same, sharing the normalization vectors of `target`.
StartSystem make_start_system(const PolySystem& target, std::uint64_t seed);
/// Standalone variant; the normalization vectors are drawn from `seed` as well.
StartSystem make_start_system(const Dims& mode_dims, std::uint64_t seed);

/// True when every min(d, n) subset of each mode's forms is nonsingular within `tol`.
bool forms_independent(const StartSystem& q, double tol = 1e-10);

void eval_start(const StartSystem& q, const VectorXc& z, VectorXc& value, MatrixXc* jac);

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval_start(const StartSystem& q, const BasicEvalPoint<Scalar>& p);

/// All solutions of Q0 = 0, in lexicographic order of the vanishing-factor assignment.
std::vector<EvalPoint> enumerate_start_solutions(const StartSystem& q);

enum class PathStatus { Converged, Diverged, Stalled };
const char* to_string(PathStatus s);

struct TrackerConfig {
    Complex gamma{1.0, 0.0};
    double initial_step = 0.05;
    double min_step = 1e-7;
    double max_step = 0.2;
    double newton_tol = 1e-10;
    int newton_max_iters = 5;
    double divergence_norm = 1e8;
    double t_end_refine_tol = 1e-12;
    int end_refine_max_iters = 20;
    long max_steps = 200000;
    std::uint64_t seed = 0;
    /// Paths tracked concurrently by track_all; 0 uses the hardware concurrency.
    unsigned threads = 1;
    /// track_all re-tracks paths that share an endpoint, each round with a
    /// quarter of the step cap and at most 3 corrector iterations.
    int retrack_rounds = 3;
    double collision_tol = 1e-6; // relative endpoint distance

    /// Defaults with γ = exp(iθ), θ uniform on [0, 2π) from `seed`.
    static TrackerConfig from_seed(std::uint64_t seed);
    void validate() const;
};

struct PathResult {
    Index start_index = 0;
    EvalPoint endpoint;
    PathStatus status = PathStatus::Stalled;
    double final_residual = 0.0;
    long steps = 0;
    bool is_real = false;
};

struct PathStats {
    Index converged = 0;
    Index diverged = 0;
    Index stalled = 0;

    Index total() const { return converged + diverged + stalled; }
};

PathStats summarize(const std::vector<PathResult>& results);

PathResult track_path(const PolySystem& p, const StartSystem& q, const EvalPoint& start, const TrackerConfig& cfg,
                      Index start_index = 0);

/// Tracks every start point; results are in start order regardless of cfg.threads.
std::vector<PathResult> track_all(const PolySystem& p, const StartSystem& q, const std::vector<EvalPoint>& starts,
                                  const TrackerConfig& cfg);

/// Indices of converged paths whose endpoint coincides with another converged endpoint.
std::vector<std::size_t> colliding_paths(const std::vector<PathResult>& results, double tol = 1e-6);

struct RealSolution {
    RealPoint point;
    double residual = 0.0; // ‖P‖ at the tracked endpoint
    Index start_index = 0;
};

/// Converged, numerically real endpoints with clusters merged; sorted lexicographically.
std::vector<RealSolution> classify_real(const std::vector<PathResult>& results, double reality_tol = 1e-8,
                                        double cluster_tol = 1e-6);

} // namespace cphom
