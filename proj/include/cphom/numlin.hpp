#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

#include "cphom/tensor.hpp"

namespace cphom {

inline constexpr double kDefaultTruncTol = 1e-6;

/// T ≈ E Fᵀ from a truncated SVD: E = U_R (orthonormal), F = V_R Σ_R.
struct RankFactorization {
    Eigen::MatrixXd E;
    Eigen::MatrixXd F;
    Eigen::VectorXd singular_values; // full spectrum of T, nonincreasing
    Index rank_used = 0;
    std::optional<std::string> warning;
};

/// Orthonormal basis of N(Eᵀ), one vector per column.
struct NullspaceBasis {
    Eigen::MatrixXd vectors;

    Index count() const { return vectors.cols(); }
    Eigen::VectorXd vector(Index i) const { return vectors.col(i); }
};

/// `rank` <= 0 selects the rank automatically: the number of σ_i > trunc_tol·σ_1.
RankFactorization full_rank_factorize(const Matricization& t, Index rank = 0, double trunc_tol = kDefaultTruncTol);
RankFactorization full_rank_factorize(const Eigen::MatrixXd& t, Index rank = 0, double trunc_tol = kDefaultTruncTol);

NullspaceBasis nullspace_basis(const RankFactorization& f);
NullspaceBasis nullspace_basis(const Eigen::MatrixXd& E);

/// Number of singular values above rel_tol·σ_1.
Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol);

} // namespace cphom
