#include "cphom/tensor.hpp"

#include <string>

namespace cphom {

Index dims_product(const Dims& dims) {
    Index p = 1;
    for (Index d : dims) p *= d;
    return p;
}

Dims FactorSet::dims() const {
    Dims d;
    d.reserve(factors.size());
    for (const auto& f : factors) d.push_back(f.rows());
    return d;
}

void FactorSet::validate() const {
    if (factors.empty()) throw Error(ErrorKind::InvalidInput, "factor set is empty");
    const Index r = factors.front().cols();
    if (r < 1) throw Error(ErrorKind::InvalidInput, "factor rank must be at least 1");
    for (std::size_t n = 0; n < factors.size(); ++n) {
        if (factors[n].cols() != r)
            throw Error(ErrorKind::InvalidInput, "factor " + std::to_string(n) + " has mismatched column count");
        if (factors[n].rows() < 1)
            throw Error(ErrorKind::InvalidInput, "factor " + std::to_string(n) + " has no rows");
        for (Index c = 0; c < r; ++c)
            if (factors[n].col(c).isZero(0.0))
                throw Error(ErrorKind::InvalidInput,
                            "factor " + std::to_string(n) + " column " + std::to_string(c) + " is zero");
    }
}

DenseTensor outer_rank1(const std::vector<Eigen::VectorXd>& vectors) {
    if (vectors.empty()) throw Error(ErrorKind::InvalidInput, "outer_rank1: no vectors");
    Dims dims;
    for (const auto& v : vectors) {
        if (v.size() == 0) throw Error(ErrorKind::InvalidInput, "outer_rank1: empty vector");
        dims.push_back(v.size());
    }
    if (vectors.size() == 1) dims.push_back(1);

    // Build by repeated Kronecker: vec(u1∘u2∘...∘uN) = uN ⊗ ... ⊗ u1.
    Eigen::VectorXd acc = vectors.front();
    for (std::size_t n = 1; n < vectors.size(); ++n) acc = kron(vectors[n], acc);
    return DenseTensor(std::move(dims), std::move(acc));
}

DenseTensor cp_evaluate(const FactorSet& model) {
    model.validate();
    const Dims dims = model.dims();
    if (dims.size() < 2 || dims.size() > 4)
        throw Error(ErrorKind::UnsupportedOrder, "cp_evaluate: order must be 2, 3 or 4");

    // vec(A) = (U_N ⊙ ... ⊙ U_1) 1_R
    Eigen::MatrixXd chain = model.factors.front();
    for (std::size_t n = 1; n < model.factors.size(); ++n) chain = khatri_rao(model.factors[n], chain);
    return DenseTensor(dims, chain.rowwise().sum());
}

Matricization matricize(const DenseTensor& t) {
    if (t.order() != 3 && t.order() != 4)
        throw Error(ErrorKind::UnsupportedOrder, "matricize: order must be 3 or 4");
    const Index cols = t.dims().back();
    const Index rows = t.size() / cols;
    Matricization m;
    m.entries = Eigen::Map<const Eigen::MatrixXd>(t.data().data(), rows, cols);
    m.leading_dims.assign(t.dims().begin(), t.dims().end() - 1);
    return m;
}

double frobenius_norm(const DenseTensor& t) { return t.data().norm(); }

double inner(const DenseTensor& a, const DenseTensor& b) {
    if (a.dims() != b.dims()) throw Error(ErrorKind::InvalidInput, "inner: dims differ");
    return a.data().dot(b.data());
}

Eigen::MatrixXd khatri_rao_chain(const std::vector<Eigen::MatrixXd>& leading) {
    if (leading.empty()) throw Error(ErrorKind::InvalidInput, "khatri_rao_chain: no factors");
    Eigen::MatrixXd acc = leading.front();
    for (std::size_t n = 1; n < leading.size(); ++n) acc = khatri_rao(leading[n], acc);
    return acc;
}

Eigen::VectorXd vec(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unvec(const Eigen::VectorXd& v, Index rows, Index cols) {
    if (rows < 0 || cols < 0 || rows * cols != v.size())
        throw Error(ErrorKind::InvalidInput, "unvec: size mismatch");
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

} // namespace cphom
