#pragma once

// End-to-end CP decomposition of third- and fourth-order tensors.
//
//   matricize -> truncated SVD (T = E Fᵀ) -> basis of N(Eᵀ) -> square system P
//   -> homotopy over all start paths -> real solutions S_R
//   -> R solutions with the smallest dropped-equation residual δ (scaled by ∏‖p_k‖)
//   -> W = Eᵀ (KR chain of stacked solutions) -> last factor = F W⁻ᵀ

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cphom/homotopy.hpp"
#include "cphom/numlin.hpp"
#include "cphom/polysys.hpp"
#include "cphom/tensor.hpp"

namespace cphom {

struct DecomposeRequest {
    DenseTensor tensor;
    Index rank = 0; // 0 = auto
    std::uint64_t seed = 0;
    std::optional<TrackerConfig> tracker; // defaults to TrackerConfig::from_seed(seed)
    double trunc_tol = kDefaultTruncTol;
    double reality_tol = kDefaultRealityTol;
    double cluster_tol = 1e-6;
    double max_w_condition = 1e12;
};

struct DecompositionReport {
    FactorSet factors;
    double relative_error = 0.0;
    Index rank_used = 0;
    Index s_real = 0;
    std::vector<double> deltas; // δ of the selected solutions, sorted
    PathStats path_stats;
    double w_condition = 0.0;
    std::uint64_t seed = 0;
    Complex gamma{1.0, 0.0};
    std::vector<RealSolution> real_solutions; // all of S_R
    std::vector<double> all_deltas;           // δ for every member of S_R, same order
    Eigen::VectorXd singular_values;
    std::vector<std::string> warnings;
};

/// Homotopy solve of P: start system, all M paths, and S_R.
struct SolveOutcome {
    StartSystem start;
    std::vector<PathResult> paths;
    std::vector<RealSolution> real_solutions;
};

SolveOutcome solve_system(const PolySystem& sys, const TrackerConfig& cfg, double reality_tol = kDefaultRealityTol,
                          double cluster_tol = 1e-6);

/// δ divided by ∏‖p_k‖. The dropped forms are multilinear, so this does not
/// depend on the normalization chart; it equals δ up to scale at exact solutions.
double scaled_delta(const PolySystem& sys, const RealPoint& p);

/// Indices into `solutions` ordered by (scaled δ, ‖P‖, input order).
std::vector<std::size_t> rank_by_delta(const PolySystem& sys, const std::vector<RealSolution>& solutions);

struct Reconstruction {
    FactorSet factors;
    double w_condition = 0.0;
};

/// Stacks the chosen points into the leading factors and recovers the last one from F W⁻ᵀ.
Reconstruction reconstruct(const RankFactorization& fact, const std::vector<RealPoint>& points,
                           double max_w_condition = 1e12);

double relative_error(const DenseTensor& reference, const FactorSet& model);

DecompositionReport decompose(const DecomposeRequest& req);

/// decompose() with a caller-built system (e.g. a hand-picked nullspace basis).
DecompositionReport decompose_with_system(const DenseTensor& tensor, const RankFactorization& fact,
                                          const PolySystem& sys, const DecomposeRequest& req);

struct MatchReport {
    std::vector<Index> permutation; // permutation[r] = truth component matched to found component r
    std::vector<double> errors;     // relative error of each found component against its match
    double max_error = 0.0;
};

MatchReport match_components(const FactorSet& found, const FactorSet& truth);

struct Synthesized {
    DenseTensor noisy;
    DenseTensor clean;
    FactorSet truth;
};

/// Factors i.i.d. N(0,1), plus θ·N/‖N‖_F noise, all from `seed`.
Synthesized synthesize(const Dims& dims, Index rank, double theta, std::uint64_t seed,
                       bool allow_out_of_regime = false);
/// Noise added to a fixed model.
Synthesized synthesize_from(const FactorSet& truth, double theta, std::uint64_t seed);

struct EnumerationResult {
    std::vector<DecompositionReport> reports;
    std::vector<std::vector<std::size_t>> subsets; // indices into S_R for each report
    std::size_t subsets_tried = 0;
    bool truncated = false;
};

/// Every R-subset of S_R whose reconstruction reaches `threshold`; at most `cap` subsets are tried.
EnumerationResult enumerate_decompositions(const DecomposeRequest& req, double threshold = 1e-8,
                                           std::size_t cap = 10000);
EnumerationResult enumerate_decompositions(const DenseTensor& tensor, const RankFactorization& fact,
                                           const PolySystem& sys, const DecomposeRequest& req,
                                           double threshold = 1e-8, std::size_t cap = 10000);

/// The rank-4 3x3x6 model with small rational factors used as a golden fixture.
FactorSet rank4_3x3x6_model();

} // namespace cphom
