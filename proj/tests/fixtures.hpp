#pragma once

// Example 1: the rank-4 3x3x6 tensor, the printed nullspace basis, S_R and the
// recovered factors.

#include <vector>

#include <Eigen/Dense>

#include "cphom/pipeline.hpp"

namespace fixtures {

inline cphom::FactorSet example1_model() { return cphom::rank4_3x3x6_model(); }

inline cphom::DenseTensor example1_tensor() { return cphom::cp_evaluate(example1_model()); }

// u1..u5 as columns.
inline Eigen::MatrixXd example1_basis() {
    Eigen::MatrixXd b(9, 5);
    b << 13, 4, 68, 0, 26,
         4, 2, 19, 1, 33,
         -8, -4, -38, 0, -26,
         0, 5, 15, 0, 20,
         0, 0, 0, 0, -10,
         0, 0, 0, -1, 0,
         0, 0, -30, 0, 0,
         0, -5, 0, 0, 0,
         -5, 0, 0, 0, 0;
    return b;
}

inline std::vector<Eigen::VectorXd> example1_norms() {
    return {Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)};
}

inline cphom::PolySystem example1_system() {
    return cphom::build_system(example1_basis(), {3, 3}, 4, example1_norms());
}

// S_R, each row (x1, x2, x3, y1, y2, y3). The first four satisfy the u5 equation.
inline Eigen::MatrixXd example1_solutions() {
    Eigen::MatrixXd s(6, 6);
    s << 0, 2.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3, 0,
         0.5, 0, 0.5, 0.5, 0, 0.5,
         1.0 / 3, 2.0 / 3, 0, 0, 2.0 / 3, 1.0 / 3,
         2.0 / 11, 3.0 / 11, 6.0 / 11, 6.0 / 7, 3.0 / 7, -2.0 / 7,
         19.0 / 45, 26.0 / 135, 52.0 / 135, 20.0 / 63, 10.0 / 63, 11.0 / 21,
         0, 1, 0, 0, 1, 0;
    return s;
}

inline cphom::RealPoint point_of(const Eigen::VectorXd& row, const cphom::Dims& dims) {
    return cphom::RealPoint::from_stacked(row, dims);
}

inline Eigen::MatrixXd example1_zhat() {
    Eigen::MatrixXd z(6, 4);
    const double a = 9.0 / 4, b = 4.0, c = 9.0 / 4, d = 77.0 / 36;
    z << a, b, c, d,
         -a, b, c, d,
         a, -b, c, d,
         a, b, -c, d,
         a, b, c, -d,
         -a, -b, c, d;
    return z;
}

// Distance from `p` to the nearest row of `rows`.
inline double nearest_row(const Eigen::MatrixXd& rows, const Eigen::VectorXd& p) {
    double best = 1e300;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) best = std::min(best, (rows.row(i).transpose() - p).norm());
    return best;
}

} // namespace fixtures
