#include <gtest/gtest.h>

#include "cphom/homotopy.hpp"
#include "cphom/rng.hpp"
#include "fixtures.hpp"

using namespace cphom;

namespace {

// Target whose kept rows are γ'·(αᵀx)(βᵀy): the zero set of another start system.
PolySystem product_system(const StartSystem& q, Complex scale) {
    PolySystem p;
    p.mode_dims = q.mode_dims;
    p.norm_vectors = q.norm_vectors;
    for (Index j = 0; j < q.num_products(); ++j) {
        const Eigen::MatrixXd u = q.forms[0].col(j) * q.forms[1].col(j).transpose();
        p.kept_blocks.emplace_back(q.mode_dims, vec(u) * scale.real());
    }
    return p;
}

} // namespace

TEST(Bezout, Counts) {
    EXPECT_EQ(bezout_count({3, 3}), 6u);
    EXPECT_EQ(bezout_count({2, 2}), 2u);
    EXPECT_EQ(bezout_count({3, 3, 4}), 210u);
    EXPECT_EQ(bezout_count({1, 5}), 1u);
}

TEST(StartSystem, DeterministicAndSized) {
    const StartSystem a = make_start_system({3, 3}, 17), b = make_start_system({3, 3}, 17);
    ASSERT_EQ(a.forms.size(), 2u);
    EXPECT_EQ(a.forms[0].cols(), 4);
    EXPECT_EQ(a.forms[1].cols(), 4);
    EXPECT_EQ(a.forms[0], b.forms[0]);
    EXPECT_EQ(a.forms[1], b.forms[1]);
    EXPECT_NE(make_start_system({3, 3}, 18).forms[0], a.forms[0]);
    EXPECT_TRUE(forms_independent(a));
}

TEST(StartSystem, SubsetDeterminants) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const StartSystem q = make_start_system({3, 3, 4}, seed);
        EXPECT_EQ(q.num_products(), 7);
        // Independent check: every 3-subset of alphas by explicit determinant.
        const Eigen::MatrixXd& a = q.forms[0];
        for (Index i = 0; i < 7; ++i)
            for (Index j = i + 1; j < 7; ++j)
                for (Index k = j + 1; k < 7; ++k) {
                    Eigen::Matrix3d m;
                    m << a.col(i).normalized(), a.col(j).normalized(), a.col(k).normalized();
                    EXPECT_GT(std::abs(m.determinant()), 1e-10);
                }
    }
}

TEST(StartSystem, DegenerateFormsDetected) {
    StartSystem q = make_start_system({3, 3}, 1);
    q.forms[0].col(2) = q.forms[0].col(0);
    EXPECT_FALSE(forms_independent(q));
}

TEST(StartSolutions, ThreeByThree) {
    const StartSystem q = make_start_system({3, 3}, 2);
    const auto pts = enumerate_start_solutions(q);
    ASSERT_EQ(pts.size(), 6u);
    for (const auto& p : pts) {
        EXPECT_LE(eval_start(q, p).norm(), 1e-10);
        EXPECT_NEAR(std::abs(q.norm_vectors[0].cast<Complex>().dot(p.modes[0]) - 1.0), 0.0, 1e-12);
        EXPECT_NEAR(std::abs(q.norm_vectors[1].cast<Complex>().dot(p.modes[1]) - 1.0), 0.0, 1e-12);
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < i; ++j) EXPECT_GT((pts[i].stacked() - pts[j].stacked()).norm(), 1e-6);
}

TEST(StartSolutions, TwoByTwo) {
    const StartSystem q = make_start_system({2, 2}, 3);
    EXPECT_EQ(enumerate_start_solutions(q).size(), 2u);
}

TEST(StartSolutions, FourthOrder) {
    const StartSystem q = make_start_system({3, 3, 4}, 4);
    const auto pts = enumerate_start_solutions(q);
    ASSERT_EQ(pts.size(), 210u);
    double worst = 0;
    for (const auto& p : pts) worst = std::max(worst, eval_start(q, p).norm());
    EXPECT_LE(worst, 1e-10);
}

TEST(TrackerConfig, Validation) {
    TrackerConfig c = TrackerConfig::from_seed(5);
    EXPECT_NEAR(std::abs(c.gamma), 1.0, 1e-15);
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(TrackerConfig::from_seed(5).gamma, c.gamma);
    c.min_step = 0.1;
    EXPECT_THROW(c.validate(), Error);
    c = TrackerConfig{};
    c.gamma = Complex(2, 0);
    EXPECT_THROW(c.validate(), Error);
}

TEST(Track, Example1) {
    const PolySystem p = fixtures::example1_system();
    const StartSystem q = make_start_system(p, 7);
    const auto starts = enumerate_start_solutions(q);
    const TrackerConfig cfg = TrackerConfig::from_seed(7);
    const auto results = track_all(p, q, starts, cfg);
    ASSERT_EQ(results.size(), 6u);
    for (const auto& r : results) {
        EXPECT_EQ(r.status, PathStatus::Converged);
        EXPECT_LE(r.final_residual, 10 * cfg.newton_tol);
        EXPECT_TRUE(r.is_real);
    }
    const auto real = classify_real(results);
    ASSERT_EQ(real.size(), 6u);
    const Eigen::MatrixXd paper = fixtures::example1_solutions();
    for (const auto& s : real) EXPECT_LE(fixtures::nearest_row(paper, s.point.stacked()), 1e-8);
}

TEST(Track, SelfHomotopy) {
    const StartSystem target = make_start_system({3, 3}, 100);
    const PolySystem p = product_system(target, Complex(-0.8, 0.0));
    const StartSystem q = make_start_system(p, 200);
    const auto results = track_all(p, q, enumerate_start_solutions(q), TrackerConfig::from_seed(9));
    const auto expected = enumerate_start_solutions(target);
    for (const auto& r : results) {
        ASSERT_EQ(r.status, PathStatus::Converged);
        EXPECT_LE(eval_P(p, r.endpoint).norm(), 1e-9);
        double best = 1e300;
        for (const auto& e : expected) best = std::min(best, (e.stacked() - r.endpoint.stacked()).norm());
        EXPECT_LE(best, 1e-8);
    }
    EXPECT_TRUE(colliding_paths(results).empty());
}

TEST(Track, DivergingPath) {
    // (c_xᵀx)(bᵀy) and (a'ᵀx)(b'ᵀy): the first factor never vanishes, so only
    // one of the two start paths has a finite endpoint.
    PolySystem p;
    p.mode_dims = {2, 2};
    const Eigen::Vector2d cx(1, 1), cy(1, 2), b(1, -1), a2(1, -2), b2(3, 1);
    p.norm_vectors = {cx, cy};
    p.kept_blocks.emplace_back(Dims{2, 2}, vec(cx * b.transpose()));
    p.kept_blocks.emplace_back(Dims{2, 2}, vec(a2 * b2.transpose()));
    const StartSystem q = make_start_system(p, 5);
    TrackerConfig cfg = TrackerConfig::from_seed(5);
    cfg.divergence_norm = 1e8;
    const auto results = track_all(p, q, enumerate_start_solutions(q), cfg);
    const PathStats st = summarize(results);
    EXPECT_EQ(st.total(), 2);
    EXPECT_EQ(st.converged, 1);
    EXPECT_EQ(st.diverged, 1);
    for (const auto& r : results)
        if (r.status == PathStatus::Converged) EXPECT_LE(r.final_residual, 10 * cfg.newton_tol);
}

TEST(Track, Deterministic) {
    const PolySystem p = fixtures::example1_system();
    const StartSystem q = make_start_system(p, 7);
    const auto starts = enumerate_start_solutions(q);
    TrackerConfig cfg = TrackerConfig::from_seed(3);
    const auto a = track_all(p, q, starts, cfg);
    cfg.threads = 3;
    const auto b = track_all(p, q, starts, cfg);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].endpoint.stacked(), b[i].endpoint.stacked());
        EXPECT_EQ(a[i].steps, b[i].steps);
    }
}

TEST(ClassifyReal, DuplicatesMerge) {
    const PolySystem p = fixtures::example1_system();
    const StartSystem q = make_start_system(p, 7);
    const auto results = track_all(p, q, enumerate_start_solutions(q), TrackerConfig::from_seed(7));
    auto doubled = results;
    doubled.insert(doubled.end(), results.begin(), results.end());
    const auto once = classify_real(results), twice = classify_real(doubled);
    ASSERT_EQ(twice.size(), once.size());
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i].point.stacked(), twice[i].point.stacked());
}

TEST(ClassifyReal, ComplexOnly) {
    std::vector<PathResult> results(3);
    for (auto& r : results) {
        r.status = PathStatus::Converged;
        r.endpoint.modes = {VectorXc::Constant(2, Complex(1, 0.5)), VectorXc::Constant(2, Complex(0, 1))};
    }
    EXPECT_TRUE(classify_real(results).empty());
}

TEST(ClassifyReal, SkipsUnconverged) {
    std::vector<PathResult> results(2);
    results[0].status = PathStatus::Diverged;
    results[1].status = PathStatus::Stalled;
    for (auto& r : results) r.endpoint.modes = {VectorXc::Ones(2), VectorXc::Ones(2)};
    EXPECT_TRUE(classify_real(results).empty());
}
