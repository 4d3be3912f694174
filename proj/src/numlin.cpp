#include "cphom/numlin.hpp"

#include <sstream>

namespace cphom {

namespace {

// Make the largest-magnitude entry of column j positive; mirror the flip in `partner`.
void fix_column_signs(Eigen::MatrixXd& u, Eigen::MatrixXd* partner) {
    for (Index j = 0; j < u.cols(); ++j) {
        Index imax = 0;
        u.col(j).cwiseAbs().maxCoeff(&imax);
        if (u(imax, j) < 0) {
            u.col(j) = -u.col(j);
            if (partner && j < partner->cols()) partner->col(j) = -partner->col(j);
        }
    }
}

} // namespace

Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

RankFactorization full_rank_factorize(const Matricization& t, Index rank, double trunc_tol) {
    return full_rank_factorize(t.entries, rank, trunc_tol);
}

RankFactorization full_rank_factorize(const Eigen::MatrixXd& t, Index rank, double trunc_tol) {
    if (trunc_tol < 0) throw Error(ErrorKind::InvalidInput, "trunc_tol must be nonnegative");
    if (t.size() == 0 || t.isZero(0.0)) throw Error(ErrorKind::RankZero, "matricization is the zero matrix");
    if (rank > std::min(t.rows(), t.cols()))
        throw Error(ErrorKind::InvalidInput, "requested rank exceeds min(rows, cols)");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();

    Index auto_rank = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > trunc_tol * s(0)) ++auto_rank;

    RankFactorization out;
    out.singular_values = s;
    out.rank_used = rank > 0 ? rank : auto_rank;
    if (out.rank_used < 1) throw Error(ErrorKind::RankZero, "no singular value above truncation tolerance");

    if (rank > auto_rank) {
        std::ostringstream msg;
        msg << "requested rank " << rank << " exceeds numerical rank " << auto_rank << " (sigma_" << rank
            << "/sigma_1 = " << s(rank - 1) / s(0) << ")";
        out.warning = msg.str();
    }

    const Index r = out.rank_used;
    Eigen::MatrixXd u = svd.matrixU().leftCols(r);
    Eigen::MatrixXd v = svd.matrixV().leftCols(r);
    fix_column_signs(u, &v);
    out.E = std::move(u);
    out.F = v * s.head(r).asDiagonal();
    return out;
}

NullspaceBasis nullspace_basis(const RankFactorization& f) { return nullspace_basis(f.E); }

NullspaceBasis nullspace_basis(const Eigen::MatrixXd& E) {
    const Index rows = E.rows();
    const Index r = E.cols();
    if (rows <= r) throw Error(ErrorKind::EmptyNullspace, "E has no left nullspace (rows <= rank)");

    // Trailing left singular vectors of E complete range(E) to an orthonormal basis.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullU);
    Eigen::MatrixXd n = svd.matrixU().rightCols(rows - r);
    fix_column_signs(n, nullptr);
    return NullspaceBasis{std::move(n)};
}

} // namespace cphom
