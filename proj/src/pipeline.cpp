#include "cphom/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cphom/rng.hpp"

namespace cphom {

namespace {

constexpr std::uint64_t kStartSeedMix = 0x2545f4914f6cdd1dULL;

void check_regime(const Dims& dims, Index rank) {
    const Dims leading(dims.begin(), dims.end() - 1);
    const Index rstar = critical_rank(leading);
    const Index last = dims.back();
    const Index bound = std::min(last, rstar);
    if (rank < 1 || rank > bound)
        throw Error(ErrorKind::OutOfRegime, "rank " + std::to_string(rank) + " outside 1..min(last dim " +
                                                std::to_string(last) + ", critical rank " + std::to_string(rstar) +
                                                ")");
}

Eigen::VectorXd component_vector(const FactorSet& f, Index r) {
    Eigen::VectorXd acc = f.factors.front().col(r);
    for (std::size_t n = 1; n < f.factors.size(); ++n) acc = kron(Eigen::VectorXd(f.factors[n].col(r)), acc);
    return acc;
}

Eigen::VectorXd sign_normalized(const Eigen::VectorXd& v) {
    const double nrm = v.norm();
    if (nrm == 0.0) return v;
    Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    return (v(imax) < 0 ? -1.0 : 1.0) * v / nrm;
}

TrackerConfig tracker_for(const DecomposeRequest& req) {
    return req.tracker ? *req.tracker : TrackerConfig::from_seed(req.seed);
}

} // namespace

double scaled_delta(const PolySystem& sys, const RealPoint& p) {
    double scale = 1.0;
    for (const auto& m : p.modes) scale *= m.norm();
    const double d = dropped_residual(sys, p);
    return scale > 0 ? d / scale : d;
}

SolveOutcome solve_system(const PolySystem& sys, const TrackerConfig& cfg, double reality_tol, double cluster_tol) {
    SolveOutcome out;
    out.start = make_start_system(sys, cfg.seed ^ kStartSeedMix);
    const auto starts = enumerate_start_solutions(out.start);
    out.paths = track_all(sys, out.start, starts, cfg);
    out.real_solutions = classify_real(out.paths, reality_tol, cluster_tol);
    return out;
}

std::vector<std::size_t> rank_by_delta(const PolySystem& sys, const std::vector<RealSolution>& solutions) {
    struct Key {
        double delta;
        double residual;
        std::size_t index;
    };
    std::vector<Key> keys;
    for (std::size_t i = 0; i < solutions.size(); ++i) {
        const double delta = scaled_delta(sys, solutions[i].point);
        const double residual = eval_P(sys, solutions[i].point).norm();
        keys.push_back({delta, residual, i});
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (a.delta != b.delta) return a.delta < b.delta;
        if (a.residual != b.residual) return a.residual < b.residual;
        return a.index < b.index;
    });
    std::vector<std::size_t> order;
    for (const auto& k : keys) order.push_back(k.index);
    return order;
}

Reconstruction reconstruct(const RankFactorization& fact, const std::vector<RealPoint>& points,
                           double max_w_condition) {
    const Index r = fact.rank_used;
    if (static_cast<Index>(points.size()) != r)
        throw Error(ErrorKind::InvalidInput, "need exactly R points to reconstruct");
    const Index modes = points.front().num_modes();

    std::vector<Eigen::MatrixXd> leading;
    for (Index k = 0; k < modes; ++k) {
        Eigen::MatrixXd m(points.front().modes[k].size(), r);
        for (Index c = 0; c < r; ++c) m.col(c) = points[c].modes[k];
        leading.push_back(std::move(m));
    }
    const Eigen::MatrixXd chain = khatri_rao_chain(leading);
    if (chain.rows() != fact.E.rows()) throw Error(ErrorKind::InvalidInput, "points do not match E");

    const Eigen::MatrixXd W = fact.E.transpose() * chain;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
    const auto& s = svd.singularValues();
    const double cond = s(s.size() - 1) > 0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
    if (!(cond <= max_w_condition))
        throw Error(ErrorKind::IllConditionedW, "condition of W is " + std::to_string(cond));

    // Ẑ = F W⁻ᵀ  <=>  W Ẑᵀ = Fᵀ
    const Eigen::MatrixXd lastT = W.partialPivLu().solve(fact.F.transpose());

    Reconstruction out;
    out.factors.factors = std::move(leading);
    out.factors.factors.push_back(lastT.transpose());
    out.w_condition = cond;
    return out;
}

double relative_error(const DenseTensor& reference, const FactorSet& model) {
    const DenseTensor approx = cp_evaluate(model);
    if (approx.dims() != reference.dims()) throw Error(ErrorKind::InvalidInput, "model and tensor shapes differ");
    const double ref = frobenius_norm(reference);
    const double diff = (reference.data() - approx.data()).norm();
    return ref > 0 ? diff / ref : diff;
}

DecompositionReport decompose(const DecomposeRequest& req) {
    const DenseTensor& a = req.tensor;
    if (a.order() != 3 && a.order() != 4)
        throw Error(ErrorKind::UnsupportedOrder, "decompose handles third- and fourth-order tensors");
    if (req.rank > 0) check_regime(a.dims(), req.rank);

    const Matricization t = matricize(a);
    const RankFactorization fact = full_rank_factorize(t, req.rank, req.trunc_tol);
    if (req.rank <= 0) check_regime(a.dims(), fact.rank_used);

    const NullspaceBasis ns = nullspace_basis(fact);
    const PolySystem sys = build_system(ns, t.leading_dims, fact.rank_used, req.seed);
    return decompose_with_system(a, fact, sys, req);
}

DecompositionReport decompose_with_system(const DenseTensor& tensor, const RankFactorization& fact,
                                          const PolySystem& sys, const DecomposeRequest& req) {
    const TrackerConfig cfg = tracker_for(req);
    const Index r = fact.rank_used;

    DecompositionReport rep;
    rep.seed = req.seed;
    rep.gamma = cfg.gamma;
    rep.rank_used = r;
    rep.singular_values = fact.singular_values;
    if (fact.warning) rep.warnings.push_back(*fact.warning);

    SolveOutcome solved = solve_system(sys, cfg, req.reality_tol, req.cluster_tol);
    rep.path_stats = summarize(solved.paths);
    rep.s_real = static_cast<Index>(solved.real_solutions.size());
    if (rep.s_real < r)
        throw Error(ErrorKind::InsufficientRealSolutions,
                    "found " + std::to_string(rep.s_real) + " real solutions, need " + std::to_string(r));

    const auto order = rank_by_delta(sys, solved.real_solutions);
    std::vector<RealPoint> chosen;
    for (Index i = 0; i < r; ++i) {
        const auto& sol = solved.real_solutions[order[i]];
        chosen.push_back(sol.point);
        rep.deltas.push_back(dropped_residual(sys, sol.point));
    }
    std::sort(rep.deltas.begin(), rep.deltas.end());
    for (const auto& sol : solved.real_solutions) rep.all_deltas.push_back(dropped_residual(sys, sol.point));
    rep.real_solutions = std::move(solved.real_solutions);

    Reconstruction rec = reconstruct(fact, chosen, req.max_w_condition);
    rep.factors = std::move(rec.factors);
    rep.w_condition = rec.w_condition;
    rep.relative_error = relative_error(tensor, rep.factors);

    if (r < static_cast<Index>(rep.all_deltas.size()) && rep.s_real > r) {
        const double last = scaled_delta(sys, rep.real_solutions[order[r - 1]].point);
        const double next = scaled_delta(sys, rep.real_solutions[order[r]].point);
        if (!(next > 1e2 * std::max(last, 1e-300)))
            rep.warnings.push_back("weak delta separation between selected and rejected solutions");
    }
    return rep;
}

MatchReport match_components(const FactorSet& found, const FactorSet& truth) {
    found.validate();
    truth.validate();
    if (found.rank() != truth.rank()) throw Error(ErrorKind::InvalidInput, "match_components: ranks differ");
    if (found.dims() != truth.dims()) throw Error(ErrorKind::InvalidInput, "match_components: dims differ");

    const Index r = found.rank();
    std::vector<Eigen::VectorXd> fc, tc, fn, tn;
    for (Index i = 0; i < r; ++i) {
        fc.push_back(component_vector(found, i));
        tc.push_back(component_vector(truth, i));
        fn.push_back(sign_normalized(fc.back()));
        tn.push_back(sign_normalized(tc.back()));
    }
    Eigen::MatrixXd dist(r, r);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < r; ++j) dist(i, j) = (fn[i] - tn[j]).norm();

    MatchReport rep;
    rep.permutation.assign(static_cast<std::size_t>(r), -1);
    std::vector<bool> used_f(static_cast<std::size_t>(r), false), used_t(static_cast<std::size_t>(r), false);
    for (Index step = 0; step < r; ++step) {
        double best = std::numeric_limits<double>::infinity();
        Index bi = -1, bj = -1;
        for (Index i = 0; i < r; ++i) {
            if (used_f[i]) continue;
            for (Index j = 0; j < r; ++j) {
                if (used_t[j]) continue;
                if (dist(i, j) < best) {
                    best = dist(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        used_f[bi] = used_t[bj] = true;
        rep.permutation[bi] = bj;
    }
    for (Index i = 0; i < r; ++i) {
        const auto& t = tc[rep.permutation[i]];
        const double e = (fc[i] - t).norm() / t.norm();
        rep.errors.push_back(e);
        rep.max_error = std::max(rep.max_error, e);
    }
    return rep;
}

namespace {

DenseTensor add_noise(const DenseTensor& clean, double theta, Rng& rng) {
    if (theta == 0.0) return clean;
    const Eigen::VectorXd n = rng.normal_vector(clean.size());
    return DenseTensor(clean.dims(), clean.data() + theta * n / n.norm());
}

} // namespace

Synthesized synthesize(const Dims& dims, Index rank, double theta, std::uint64_t seed, bool allow_out_of_regime) {
    if (dims.size() < 2 || dims.size() > 4) throw Error(ErrorKind::UnsupportedOrder, "synthesize: order 2..4");
    if (rank < 1) throw Error(ErrorKind::InvalidInput, "synthesize: rank must be positive");
    if (!allow_out_of_regime && dims.size() >= 3) check_regime(dims, rank);

    Rng rng(seed);
    FactorSet truth;
    for (Index d : dims) truth.factors.push_back(rng.normal_matrix(d, rank));
    Synthesized out;
    out.clean = cp_evaluate(truth);
    out.noisy = add_noise(out.clean, theta, rng);
    out.truth = std::move(truth);
    return out;
}

Synthesized synthesize_from(const FactorSet& truth, double theta, std::uint64_t seed) {
    Rng rng(seed);
    Synthesized out;
    out.clean = cp_evaluate(truth);
    out.noisy = add_noise(out.clean, theta, rng);
    out.truth = truth;
    return out;
}

EnumerationResult enumerate_decompositions(const DecomposeRequest& req, double threshold, std::size_t cap) {
    const DenseTensor& a = req.tensor;
    if (a.order() != 3 && a.order() != 4)
        throw Error(ErrorKind::UnsupportedOrder, "enumerate_decompositions handles orders 3 and 4");
    if (req.rank > 0) check_regime(a.dims(), req.rank);
    const Matricization t = matricize(a);
    const RankFactorization fact = full_rank_factorize(t, req.rank, req.trunc_tol);
    if (req.rank <= 0) check_regime(a.dims(), fact.rank_used);
    const PolySystem sys = build_system(nullspace_basis(fact), t.leading_dims, fact.rank_used, req.seed);
    return enumerate_decompositions(a, fact, sys, req, threshold, cap);
}

EnumerationResult enumerate_decompositions(const DenseTensor& tensor, const RankFactorization& fact,
                                           const PolySystem& sys, const DecomposeRequest& req, double threshold,
                                           std::size_t cap) {
    const TrackerConfig cfg = tracker_for(req);
    const Index r = fact.rank_used;
    SolveOutcome solved = solve_system(sys, cfg, req.reality_tol, req.cluster_tol);
    const auto& sols = solved.real_solutions;
    const Index s = static_cast<Index>(sols.size());
    if (s < r)
        throw Error(ErrorKind::InsufficientRealSolutions,
                    "found " + std::to_string(s) + " real solutions, need " + std::to_string(r));

    EnumerationResult out;
    const PathStats stats = summarize(solved.paths);
    std::vector<Index> idx(static_cast<std::size_t>(r));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        if (out.subsets_tried >= cap) {
            out.truncated = true;
            break;
        }
        ++out.subsets_tried;

        std::vector<RealPoint> chosen;
        for (Index i : idx) chosen.push_back(sols[i].point);
        std::vector<Eigen::MatrixXd> leading;
        for (Index k = 0; k < chosen.front().num_modes(); ++k) {
            Eigen::MatrixXd m(chosen.front().modes[k].size(), r);
            for (Index c = 0; c < r; ++c) m.col(c) = chosen[c].modes[k];
            leading.push_back(std::move(m));
        }
        if (numerical_rank(khatri_rao_chain(leading), 1e-10) == r) {
            try {
                Reconstruction rec = reconstruct(fact, chosen, req.max_w_condition);
                const double err = relative_error(tensor, rec.factors);
                if (err <= threshold) {
                    DecompositionReport rep;
                    rep.factors = std::move(rec.factors);
                    rep.relative_error = err;
                    rep.rank_used = r;
                    rep.s_real = s;
                    rep.path_stats = stats;
                    rep.w_condition = rec.w_condition;
                    rep.seed = req.seed;
                    rep.gamma = cfg.gamma;
                    rep.singular_values = fact.singular_values;
                    for (const auto& p : chosen) rep.deltas.push_back(dropped_residual(sys, p));
                    std::sort(rep.deltas.begin(), rep.deltas.end());
                    out.reports.push_back(std::move(rep));
                    out.subsets.emplace_back(idx.begin(), idx.end());
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::IllConditionedW) throw;
            }
        }

        Index i = r - 1;
        while (i >= 0 && idx[i] == s - r + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (Index j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
    return out;
}

FactorSet rank4_3x3x6_model() {
    Eigen::MatrixXd x(3, 4), y(3, 4), z(6, 4);
    x << 0, 1, 0.5, 1.0 / 3,
         1, 0, 1, 0.5,
         0.5, 1, 0, 1;
    y << 0.5, 1, 0, 1,
         1, 0, 1, 0.5,
         0, 1, 0.5, -1.0 / 3;
    z << 1, 1, 1, 1,
         -1, 1, 1, 1,
         1, -1, 1, 1,
         1, 1, -1, 1,
         1, 1, 1, -1,
         -1, -1, 1, 1;
    return FactorSet({x, y, z});
}

} // namespace cphom
