#pragma once

// Dense tensors, multilinear products and CP model evaluation.
//
// All linearizations are column-major: the first index runs fastest, so
// vec(A_{::k}) of a third-order tensor is A(:,:,k) stacked column by column.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cphom/error.hpp"

namespace cphom {

using Index = Eigen::Index;
using Dims = std::vector<Index>;

Index dims_product(const Dims& dims);

/// Order-N real array with explicit dimensions, stored column-major.
template <typename Scalar>
class BasicTensor {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicTensor() = default;

    explicit BasicTensor(Dims dims) : dims_(std::move(dims)) {
        check_dims(dims_);
        data_ = Vector::Zero(dims_product(dims_));
    }

    BasicTensor(Dims dims, Vector data) : dims_(std::move(dims)), data_(std::move(data)) {
        check_dims(dims_);
        if (data_.size() != dims_product(dims_))
            throw Error(ErrorKind::InvalidInput, "tensor data length does not match product of dims");
    }

    const Dims& dims() const { return dims_; }
    Index order() const { return static_cast<Index>(dims_.size()); }
    Index dim(Index n) const { return dims_[static_cast<std::size_t>(n)]; }
    Index size() const { return data_.size(); }

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    /// Linear offset of a multi-index (zero based).
    Index offset(const std::vector<Index>& idx) const {
        Index off = 0;
        Index stride = 1;
        for (std::size_t n = 0; n < dims_.size(); ++n) {
            off += idx[n] * stride;
            stride *= dims_[n];
        }
        return off;
    }

    Scalar operator()(const std::vector<Index>& idx) const { return data_(offset(idx)); }
    Scalar& operator()(const std::vector<Index>& idx) { return data_(offset(idx)); }

private:
    static void check_dims(const Dims& dims) {
        if (dims.size() < 2 || dims.size() > 4)
            throw Error(ErrorKind::UnsupportedOrder, "tensor order must be 2, 3 or 4");
        for (Index d : dims)
            if (d < 1) throw Error(ErrorKind::InvalidInput, "tensor dims must be positive");
    }

    Dims dims_;
    Vector data_;
};

using DenseTensor = BasicTensor<double>;

/// A CP model [|U1, ..., UN|]: one I_n x R factor matrix per mode.
struct FactorSet {
    std::vector<Eigen::MatrixXd> factors;

    FactorSet() = default;
    explicit FactorSet(std::vector<Eigen::MatrixXd> f) : factors(std::move(f)) {}

    Index order() const { return static_cast<Index>(factors.size()); }
    Index rank() const { return factors.empty() ? 0 : factors.front().cols(); }
    Dims dims() const;

    /// Throws invalid-input unless all factors share R >= 1 columns and no column is zero.
    void validate() const;
};

/// T = [vec(A_{::1}), ..., vec(A_{::K})] for order 3, IJK x L for order 4.
struct Matricization {
    Eigen::MatrixXd entries;
    Dims leading_dims;

    Index rows() const { return entries.rows(); }
    Index cols() const { return entries.cols(); }
};

DenseTensor outer_rank1(const std::vector<Eigen::VectorXd>& vectors);
DenseTensor cp_evaluate(const FactorSet& model);
Matricization matricize(const DenseTensor& t);

double frobenius_norm(const DenseTensor& t);
double inner(const DenseTensor& a, const DenseTensor& b);

/// Kronecker product; a ⊗ b for vectors puts b's index fastest.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                                 a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Khatri-Rao product: column j is a_j ⊗ b_j.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
khatri_rao(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.cols() != b.cols())
        throw Error(ErrorKind::InvalidInput, "khatri_rao: column counts differ");
    Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols());
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            out.col(j).segment(i * b.rows(), b.rows()) = a(i, j) * b.col(j);
    return out;
}

/// Khatri-Rao chain of the leading factors, last-mode-adjacent factor leftmost:
/// Y⊙X for {X, Y}, Z⊙Y⊙X for {X, Y, Z}.
Eigen::MatrixXd khatri_rao_chain(const std::vector<Eigen::MatrixXd>& leading);

Eigen::VectorXd vec(const Eigen::MatrixXd& m);
Eigen::MatrixXd unvec(const Eigen::VectorXd& v, Index rows, Index cols);

} // namespace cphom
