#include "cphom/polysys.hpp"

#include <string>

#include "cphom/rng.hpp"

namespace cphom {

Index critical_rank(const Dims& leading_dims) {
    Index prod = 1;
    Index sum = 0;
    for (Index d : leading_dims) {
        prod *= d;
        sum += d - 1;
    }
    return prod - sum;
}

EvalPoint to_complex(const RealPoint& p) {
    EvalPoint out;
    for (const auto& m : p.modes) out.modes.push_back(m.cast<Complex>());
    return out;
}

RealPoint real_part(const EvalPoint& p) {
    RealPoint out;
    for (const auto& m : p.modes) out.modes.push_back(m.real());
    return out;
}

bool is_real(const EvalPoint& p, double tol) {
    double max_im = 0.0;
    double max_re = 0.0;
    for (const auto& m : p.modes) {
        if (m.size() == 0) continue;
        max_im = std::max(max_im, m.imag().cwiseAbs().maxCoeff());
        max_re = std::max(max_re, m.real().cwiseAbs().maxCoeff());
    }
    return max_im <= tol * (1.0 + max_re);
}

Index PolySystem::num_vars() const {
    Index n = 0;
    for (Index d : mode_dims) n += d;
    return n;
}

namespace {

void check_dims(const Dims& mode_dims) {
    if (mode_dims.size() != 2 && mode_dims.size() != 3)
        throw Error(ErrorKind::UnsupportedOrder, "polynomial systems need 2 or 3 leading modes");
    for (Index d : mode_dims)
        if (d < 1) throw Error(ErrorKind::InvalidInput, "mode dims must be positive");
}

template <typename Scalar>
void check_point(const PolySystem& s, const BasicEvalPoint<Scalar>& p) {
    if (p.num_modes() != static_cast<Index>(s.mode_dims.size()))
        throw Error(ErrorKind::InvalidInput, "point has wrong number of modes");
    for (std::size_t n = 0; n < s.mode_dims.size(); ++n)
        if (p.modes[n].size() != s.mode_dims[n])
            throw Error(ErrorKind::InvalidInput, "point mode " + std::to_string(n) + " has wrong length");
}

DenseTensor block_from(const Eigen::VectorXd& u, const Dims& mode_dims) { return DenseTensor(mode_dims, u); }

} // namespace

PolySystem build_system(const Eigen::MatrixXd& basis, const Dims& mode_dims, Index rank,
                        std::vector<Eigen::VectorXd> norm_vectors, std::uint64_t seed) {
    check_dims(mode_dims);
    const Index rstar = critical_rank(mode_dims);
    if (rank < 1) throw Error(ErrorKind::InvalidInput, "rank must be positive");
    if (rank > rstar)
        throw Error(ErrorKind::UnderdeterminedRank, "rank " + std::to_string(rank) + " exceeds critical rank " +
                                                        std::to_string(rstar) +
                                                        "; the decomposition is not locally unique");
    const Index prod = dims_product(mode_dims);
    if (basis.rows() != prod) throw Error(ErrorKind::InvalidInput, "basis vectors have wrong length");
    if (basis.cols() != prod - rank)
        throw Error(ErrorKind::InvalidInput, "nullspace basis has " + std::to_string(basis.cols()) +
                                                 " vectors, expected " + std::to_string(prod - rank));
    if (norm_vectors.size() != mode_dims.size())
        throw Error(ErrorKind::InvalidInput, "one normalization vector per mode required");
    for (std::size_t n = 0; n < mode_dims.size(); ++n)
        if (norm_vectors[n].size() != mode_dims[n])
            throw Error(ErrorKind::InvalidInput, "normalization vector has wrong length");

    PolySystem s;
    s.mode_dims = mode_dims;
    s.norm_vectors = std::move(norm_vectors);
    s.rng_seed = seed;
    Index kept = 0;
    for (Index d : mode_dims) kept += d - 1;
    for (Index j = 0; j < basis.cols(); ++j) {
        auto block = block_from(basis.col(j), mode_dims);
        if (j < kept)
            s.kept_blocks.push_back(std::move(block));
        else
            s.dropped_blocks.push_back(std::move(block));
    }
    return s;
}

PolySystem build_system(const NullspaceBasis& ns, const Dims& mode_dims, Index rank, std::uint64_t seed) {
    check_dims(mode_dims);
    Rng rng(seed);
    std::vector<Eigen::VectorXd> c;
    for (Index d : mode_dims) c.push_back(rng.normal_vector(d));
    return build_system(ns.vectors, mode_dims, rank, std::move(c), seed);
}

template <typename Scalar>
Scalar contract(const DenseTensor& block, const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& modes,
                std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>* grads) {
    const Dims& d = block.dims();
    const auto& u = block.data();
    Scalar value(0);
    if (d.size() == 2) {
        const auto& x = modes[0];
        const auto& y = modes[1];
        const Eigen::Map<const Eigen::MatrixXd> U(u.data(), d[0], d[1]);
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> uy = U.template cast<Scalar>() * y;
        // Bilinear, not sesquilinear: Eigen's dot() would conjugate x.
        value = (x.array() * uy.array()).sum();
        if (grads) {
            (*grads)[0] = uy;
            (*grads)[1] = U.transpose().template cast<Scalar>() * x;
        }
        return value;
    }
    // Three leading modes: u[a + I b + I J c] x_a y_b z_c.
    const auto& x = modes[0];
    const auto& y = modes[1];
    const auto& z = modes[2];
    const Index I = d[0], J = d[1], K = d[2];
    if (grads) {
        (*grads)[0].setZero(I);
        (*grads)[1].setZero(J);
        (*grads)[2].setZero(K);
    }
    Index off = 0;
    for (Index c = 0; c < K; ++c) {
        for (Index b = 0; b < J; ++b) {
            // slice_ab = Σ_a u x_a for fixed (b, c)
            Scalar sx(0);
            for (Index a = 0; a < I; ++a) sx += u(off + a) * x(a);
            const Scalar yz = y(b) * z(c);
            value += sx * yz;
            if (grads) {
                for (Index a = 0; a < I; ++a) (*grads)[0](a) += u(off + a) * yz;
                (*grads)[1](b) += sx * z(c);
                (*grads)[2](c) += sx * y(b);
            }
            off += I;
        }
    }
    return value;
}

template double contract<double>(const DenseTensor&, const std::vector<Eigen::VectorXd>&,
                                 std::vector<Eigen::VectorXd>*);
template Complex contract<Complex>(const DenseTensor&, const std::vector<VectorXc>&, std::vector<VectorXc>*);

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval_kept(const PolySystem& s, const BasicEvalPoint<Scalar>& p) {
    check_point(s, p);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(s.num_kept());
    for (Index j = 0; j < s.num_kept(); ++j) out(j) = contract<Scalar>(s.kept_blocks[j], p.modes);
    return out;
}

template Eigen::VectorXd eval_kept<double>(const PolySystem&, const RealPoint&);
template VectorXc eval_kept<Complex>(const PolySystem&, const EvalPoint&);

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval_P(const PolySystem& s, const BasicEvalPoint<Scalar>& p) {
    check_point(s, p);
    const Index m = static_cast<Index>(s.mode_dims.size());
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(s.num_kept() + m);
    out.head(s.num_kept()) = eval_kept(s, p);
    for (Index n = 0; n < m; ++n)
        out(s.num_kept() + n) = (s.norm_vectors[n].template cast<Scalar>().array() * p.modes[n].array()).sum() - Scalar(1);
    return out;
}

template Eigen::VectorXd eval_P<double>(const PolySystem&, const RealPoint&);
template VectorXc eval_P<Complex>(const PolySystem&, const EvalPoint&);

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eval_jacobian(const PolySystem& s,
                                                                    const BasicEvalPoint<Scalar>& p) {
    check_point(s, p);
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Index m = static_cast<Index>(s.mode_dims.size());
    const Index n = s.num_vars();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> jac =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(s.num_kept() + m, n);
    std::vector<Vec> grads(static_cast<std::size_t>(m));
    for (Index j = 0; j < s.num_kept(); ++j) {
        contract<Scalar>(s.kept_blocks[j], p.modes, &grads);
        Index off = 0;
        for (Index k = 0; k < m; ++k) {
            jac.row(j).segment(off, s.mode_dims[k]) = grads[k].transpose();
            off += s.mode_dims[k];
        }
    }
    Index off = 0;
    for (Index k = 0; k < m; ++k) {
        jac.row(s.num_kept() + k).segment(off, s.mode_dims[k]) =
            s.norm_vectors[k].template cast<Scalar>().transpose();
        off += s.mode_dims[k];
    }
    return jac;
}

template Eigen::MatrixXd eval_jacobian<double>(const PolySystem&, const RealPoint&);
template MatrixXc eval_jacobian<Complex>(const PolySystem&, const EvalPoint&);

void eval_P_and_jacobian(const PolySystem& s, const VectorXc& z, VectorXc& value, MatrixXc& jac) {
    const EvalPoint p = EvalPoint::from_stacked(z, s.mode_dims);
    const Index m = static_cast<Index>(s.mode_dims.size());
    value.resize(s.num_kept() + m);
    jac.setZero(s.num_kept() + m, s.num_vars());
    std::vector<VectorXc> grads(static_cast<std::size_t>(m));
    for (Index j = 0; j < s.num_kept(); ++j) {
        value(j) = contract<Complex>(s.kept_blocks[j], p.modes, &grads);
        Index off = 0;
        for (Index k = 0; k < m; ++k) {
            jac.row(j).segment(off, s.mode_dims[k]) = grads[k].transpose();
            off += s.mode_dims[k];
        }
    }
    Index off = 0;
    for (Index k = 0; k < m; ++k) {
        const VectorXc c = s.norm_vectors[k].cast<Complex>();
        value(s.num_kept() + k) = (c.array() * p.modes[k].array()).sum() - 1.0;
        jac.row(s.num_kept() + k).segment(off, s.mode_dims[k]) = c.transpose();
        off += s.mode_dims[k];
    }
}

Eigen::VectorXd eval_dropped(const PolySystem& s, const RealPoint& p) {
    check_point(s, p);
    Eigen::VectorXd q(s.num_dropped());
    for (Index i = 0; i < s.num_dropped(); ++i) q(i) = contract<double>(s.dropped_blocks[i], p.modes);
    return q;
}

double dropped_residual(const PolySystem& s, const RealPoint& p) {
    if (s.dropped_blocks.empty()) return 0.0;
    return eval_dropped(s, p).norm();
}

double dropped_residual(const PolySystem& s, const EvalPoint& p) {
    if (!is_real(p)) throw Error(ErrorKind::InvalidInput, "dropped_residual needs a real point");
    return dropped_residual(s, real_part(p));
}

} // namespace cphom
