#pragma once

// Square polynomial systems built from a basis of N(Eᵀ).
//
// For leading dims (I, J) the unknowns are x ∈ C^I, y ∈ C^J and the system is
//
//   p_j = xᵀ U_j y,            j = 1 .. I+J-2
//   c_xᵀ x - 1,  c_yᵀ y - 1
//
// where U_j = unvec(u_j) is I x J. For (I, J, K) each kept row is the
// trilinear form u_jᵀ (z ⊗ y ⊗ x) and there is one extra normalization.
// Nullspace vectors beyond the kept ones become the dropped forms q_i.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cphom/numlin.hpp"
#include "cphom/tensor.hpp"

namespace cphom {

using Complex = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

inline constexpr double kDefaultRealityTol = 1e-8;

/// ∏ d − Σ (d − 1).
Index critical_rank(const Dims& leading_dims);

/// A point (x, y) or (x, y, z); one vector per leading mode.
template <typename Scalar>
struct BasicEvalPoint {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    std::vector<Vector> modes;

    Index num_modes() const { return static_cast<Index>(modes.size()); }

    Vector stacked() const {
        Index n = 0;
        for (const auto& m : modes) n += m.size();
        Vector out(n);
        Index off = 0;
        for (const auto& m : modes) {
            out.segment(off, m.size()) = m;
            off += m.size();
        }
        return out;
    }

    static BasicEvalPoint from_stacked(const Vector& v, const Dims& dims) {
        BasicEvalPoint p;
        Index off = 0;
        for (Index d : dims) {
            if (off + d > v.size()) throw Error(ErrorKind::InvalidInput, "stacked point too short");
            p.modes.push_back(v.segment(off, d));
            off += d;
        }
        if (off != v.size()) throw Error(ErrorKind::InvalidInput, "stacked point length mismatch");
        return p;
    }
};

using EvalPoint = BasicEvalPoint<Complex>;
using RealPoint = BasicEvalPoint<double>;

EvalPoint to_complex(const RealPoint& p);
RealPoint real_part(const EvalPoint& p);
/// max|Im| <= tol·(1 + max|Re|).
bool is_real(const EvalPoint& p, double tol = kDefaultRealityTol);

struct PolySystem {
    Dims mode_dims;                            // (I, J) or (I, J, K)
    std::vector<DenseTensor> kept_blocks;      // U_j, shape mode_dims
    std::vector<DenseTensor> dropped_blocks;   // q_i coefficient blocks
    std::vector<Eigen::VectorXd> norm_vectors; // c_x, c_y (, c_z)
    std::uint64_t rng_seed = 0;

    Index order() const { return static_cast<Index>(mode_dims.size()) + 1; }
    Index num_vars() const;
    Index num_kept() const { return static_cast<Index>(kept_blocks.size()); }
    Index num_dropped() const { return static_cast<Index>(dropped_blocks.size()); }
};

/// Kept/dropped split of an orthonormal nullspace basis, c-vectors drawn from `seed`.
PolySystem build_system(const NullspaceBasis& ns, const Dims& mode_dims, Index rank, std::uint64_t seed);

/// Same construction from any basis (columns) with caller-supplied normalization vectors.
PolySystem build_system(const Eigen::MatrixXd& basis, const Dims& mode_dims, Index rank,
                        std::vector<Eigen::VectorXd> norm_vectors, std::uint64_t seed = 0);

/// Value of the multilinear form vec(block)ᵀ (⊗ modes reversed) and optionally its gradient per mode.
template <typename Scalar>
Scalar contract(const DenseTensor& block, const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& modes,
                std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>* grads = nullptr);

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval_P(const PolySystem& s, const BasicEvalPoint<Scalar>& p);

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eval_jacobian(const PolySystem& s,
                                                                    const BasicEvalPoint<Scalar>& p);

/// Values and Jacobian together, on a stacked point.
void eval_P_and_jacobian(const PolySystem& s, const VectorXc& z, VectorXc& value, MatrixXc& jac);

/// Values of the kept multilinear rows only.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval_kept(const PolySystem& s, const BasicEvalPoint<Scalar>& p);

/// Values of the dropped forms q_i.
Eigen::VectorXd eval_dropped(const PolySystem& s, const RealPoint& p);

/// δ = ‖q(p)‖₂; 0 when nothing was dropped.
double dropped_residual(const PolySystem& s, const RealPoint& p);
/// Complex overload; the point must be real within kDefaultRealityTol.
double dropped_residual(const PolySystem& s, const EvalPoint& p);

} // namespace cphom
