#include "cphom/homotopy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "cphom/rng.hpp"

namespace cphom {

std::uint64_t bezout_count(const Dims& mode_dims) {
    // Multinomial built as a product of binomials to stay exact.
    std::uint64_t result = 1;
    std::uint64_t placed = 0;
    for (Index d : mode_dims) {
        const auto k = static_cast<std::uint64_t>(d - 1);
        for (std::uint64_t i = 1; i <= k; ++i) {
            result = result * (placed + i) / i;
        }
        placed += k;
    }
    return result;
}

Index StartSystem::num_vars() const {
    Index n = 0;
    for (Index d : mode_dims) n += d;
    return n;
}

namespace {

// Visit every size-k subset of {0..n-1} in lexicographic order; stop if f returns false.
template <typename F>
void for_each_subset(Index n, Index k, F&& f) {
    if (k > n || k < 0) return;
    std::vector<Index> idx(static_cast<std::size_t>(k));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        if (!f(idx)) return;
        Index i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) return;
        ++idx[i];
        for (Index j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::uint64_t binomial(Index n, Index k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (Index i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

bool subset_nonsingular(const Eigen::MatrixXd& cols, const std::vector<Index>& idx, double tol) {
    const Index k = static_cast<Index>(idx.size());
    Eigen::MatrixXd m(cols.rows(), k);
    for (Index j = 0; j < k; ++j) m.col(j) = cols.col(idx[j]).normalized();
    if (k == cols.rows()) return std::abs(m.determinant()) > tol;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(k - 1) > tol;
}

} // namespace

bool forms_independent(const StartSystem& q, double tol) {
    constexpr std::uint64_t kExhaustiveLimit = 5000;
    constexpr int kSamples = 2000;
    for (std::size_t k = 0; k < q.forms.size(); ++k) {
        const auto& f = q.forms[k];
        const Index n = f.cols();
        const Index size = std::min<Index>(f.rows(), n);
        if (size == 0) continue;
        if (binomial(n, size) <= kExhaustiveLimit) {
            bool ok = true;
            for_each_subset(n, size, [&](const std::vector<Index>& idx) {
                ok = subset_nonsingular(f, idx, tol);
                return ok;
            });
            if (!ok) return false;
        } else {
            Rng rng(q.seed ^ 0x9e3779b97f4a7c15ULL);
            std::vector<Index> all(static_cast<std::size_t>(n));
            std::iota(all.begin(), all.end(), 0);
            for (int s = 0; s < kSamples; ++s) {
                std::shuffle(all.begin(), all.end(), rng.engine());
                std::vector<Index> idx(all.begin(), all.begin() + size);
                std::sort(idx.begin(), idx.end());
                if (!subset_nonsingular(f, idx, tol)) return false;
            }
        }
    }
    return true;
}

StartSystem make_start_system(const Dims& mode_dims, std::vector<Eigen::VectorXd> norm_vectors, std::uint64_t seed) {
    if (mode_dims.size() != 2 && mode_dims.size() != 3)
        throw Error(ErrorKind::UnsupportedOrder, "start systems need 2 or 3 leading modes");
    if (norm_vectors.size() != mode_dims.size())
        throw Error(ErrorKind::InvalidInput, "one normalization vector per mode required");
    Index products = 0;
    for (Index d : mode_dims) {
        if (d < 1) throw Error(ErrorKind::InvalidInput, "mode dims must be positive");
        products += d - 1;
    }

    constexpr int kMaxRetries = 16;
    Rng rng(seed);
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        StartSystem q;
        q.mode_dims = mode_dims;
        q.norm_vectors = norm_vectors;
        q.seed = seed;
        for (Index d : mode_dims) q.forms.push_back(rng.normal_matrix(d, products));
        if (forms_independent(q)) return q;
    }
    throw Error(ErrorKind::DegenerateRandomness, "could not draw independent start forms");
}

StartSystem make_start_system(const PolySystem& target, std::uint64_t seed) {
    return make_start_system(target.mode_dims, target.norm_vectors, seed);
}

StartSystem make_start_system(const Dims& mode_dims, std::uint64_t seed) {
    Rng rng(seed ^ 0x5bd1e995ULL);
    std::vector<Eigen::VectorXd> c;
    for (Index d : mode_dims) c.push_back(rng.normal_vector(d));
    return make_start_system(mode_dims, std::move(c), seed);
}

void eval_start(const StartSystem& q, const VectorXc& z, VectorXc& value, MatrixXc* jac) {
    const Index m = static_cast<Index>(q.mode_dims.size());
    const Index n = q.num_products();
    value.resize(n + m);
    if (jac) jac->setZero(n + m, q.num_vars());

    // lin(k, j) = form_{k,j}ᵀ z_k
    Eigen::MatrixXcd lin(m, n);
    Index off = 0;
    for (Index k = 0; k < m; ++k) {
        const Index d = q.mode_dims[k];
        lin.row(k) = (z.segment(off, d).transpose() * q.forms[k].cast<Complex>());
        off += d;
    }
    for (Index j = 0; j < n; ++j) {
        value(j) = lin.col(j).prod();
        if (!jac) continue;
        off = 0;
        for (Index k = 0; k < m; ++k) {
            Complex others(1.0, 0.0);
            for (Index l = 0; l < m; ++l)
                if (l != k) others *= lin(l, j);
            jac->row(j).segment(off, q.mode_dims[k]) = others * q.forms[k].col(j).cast<Complex>().transpose();
            off += q.mode_dims[k];
        }
    }
    off = 0;
    for (Index k = 0; k < m; ++k) {
        const Index d = q.mode_dims[k];
        const VectorXc c = q.norm_vectors[k].cast<Complex>();
        value(n + k) = (c.array() * z.segment(off, d).array()).sum() - 1.0;
        if (jac) jac->row(n + k).segment(off, d) = c.transpose();
        off += d;
    }
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eval_start(const StartSystem& q, const BasicEvalPoint<Scalar>& p) {
    VectorXc v;
    eval_start(q, p.stacked().template cast<Complex>(), v, nullptr);
    if constexpr (std::is_same_v<Scalar, double>)
        return v.real();
    else
        return v;
}

template Eigen::VectorXd eval_start<double>(const StartSystem&, const RealPoint&);
template VectorXc eval_start<Complex>(const StartSystem&, const EvalPoint&);

std::vector<EvalPoint> enumerate_start_solutions(const StartSystem& q) {
    const Index m = static_cast<Index>(q.mode_dims.size());
    const Index n = q.num_products();

    // Solve [forms_S, c]ᵀ v = e_last for the subset S of rows whose mode-k factor vanishes.
    auto solve_mode = [&](Index k, const std::vector<Index>& rows) {
        const Index d = q.mode_dims[k];
        Eigen::MatrixXd a(d, d);
        for (Index i = 0; i < static_cast<Index>(rows.size()); ++i) a.row(i) = q.forms[k].col(rows[i]).transpose();
        a.row(d - 1) = q.norm_vectors[k].transpose();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
        rhs(d - 1) = 1.0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-14 * std::pow(a.norm(), static_cast<double>(d)))
            throw Error(ErrorKind::DegenerateRandomness, "singular start subsystem");
        return Eigen::VectorXd(lu.solve(rhs));
    };

    std::vector<EvalPoint> out;
    out.reserve(bezout_count(q.mode_dims));
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);

    auto complement = [](const std::vector<Index>& from, const std::vector<Index>& take) {
        std::vector<Index> rest;
        std::set_difference(from.begin(), from.end(), take.begin(), take.end(), std::back_inserter(rest));
        return rest;
    };
    auto pick = [](const std::vector<Index>& from, const std::vector<Index>& positions) {
        std::vector<Index> r;
        for (Index p : positions) r.push_back(from[p]);
        return r;
    };

    const Index kx = q.mode_dims[0] - 1;
    for_each_subset(n, kx, [&](const std::vector<Index>& sx) {
        const std::vector<Index> rest = complement(all, sx);
        if (m == 2) {
            EvalPoint p;
            p.modes.push_back(solve_mode(0, sx).cast<Complex>());
            p.modes.push_back(solve_mode(1, rest).cast<Complex>());
            out.push_back(std::move(p));
            return true;
        }
        const Index ky = q.mode_dims[1] - 1;
        for_each_subset(static_cast<Index>(rest.size()), ky, [&](const std::vector<Index>& pos) {
            const std::vector<Index> sy = pick(rest, pos);
            const std::vector<Index> sz = complement(rest, sy);
            EvalPoint p;
            p.modes.push_back(solve_mode(0, sx).cast<Complex>());
            p.modes.push_back(solve_mode(1, sy).cast<Complex>());
            p.modes.push_back(solve_mode(2, sz).cast<Complex>());
            out.push_back(std::move(p));
            return true;
        });
        return true;
    });
    return out;
}

const char* to_string(PathStatus s) {
    switch (s) {
    case PathStatus::Converged: return "converged";
    case PathStatus::Diverged: return "diverged";
    case PathStatus::Stalled: return "stalled";
    }
    return "unknown";
}

TrackerConfig TrackerConfig::from_seed(std::uint64_t seed) {
    TrackerConfig cfg;
    cfg.seed = seed;
    Rng rng(seed ^ 0xa0761d6478bd642fULL);
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    cfg.gamma = std::polar(1.0, theta);
    return cfg;
}

void TrackerConfig::validate() const {
    if (!(min_step > 0 && min_step <= initial_step && initial_step <= max_step && max_step < 1))
        throw Error(ErrorKind::InvalidInput, "step sizes must satisfy 0 < min <= initial <= max < 1");
    if (!(newton_tol > 0 && t_end_refine_tol > 0 && divergence_norm > 0 && newton_max_iters > 0))
        throw Error(ErrorKind::InvalidInput, "tracker tolerances must be positive");
    if (std::abs(std::abs(gamma) - 1.0) > 1e-12) throw Error(ErrorKind::InvalidInput, "gamma must have unit modulus");
}

PathStats summarize(const std::vector<PathResult>& results) {
    PathStats s;
    for (const auto& r : results) {
        switch (r.status) {
        case PathStatus::Converged: ++s.converged; break;
        case PathStatus::Diverged: ++s.diverged; break;
        case PathStatus::Stalled: ++s.stalled; break;
        }
    }
    return s;
}

namespace {

class Homotopy {
public:
    Homotopy(const PolySystem& p, const StartSystem& q, Complex gamma) : p_(p), q_(q), gamma_(gamma) {}

    // H(z,t) and ∂H/∂z; optionally ∂H/∂t = P - γQ.
    void eval(const VectorXc& z, double t, VectorXc& h, MatrixXc& jz, VectorXc* ht) {
        eval_P_and_jacobian(p_, z, pv_, pj_);
        eval_start(q_, z, qv_, &qj_);
        const Complex a = (1.0 - t) * gamma_;
        h = a * qv_ + t * pv_;
        jz = a * qj_ + t * pj_;
        if (ht) *ht = pv_ - gamma_ * qv_;
    }

    void eval_target(const VectorXc& z, VectorXc& h, MatrixXc& jz) { eval_P_and_jacobian(p_, z, h, jz); }

private:
    const PolySystem& p_;
    const StartSystem& q_;
    Complex gamma_;
    VectorXc pv_, qv_;
    MatrixXc pj_, qj_;
};

enum class Correction { Ok, Failed };

Correction newton(Homotopy& hom, VectorXc& z, double t, const TrackerConfig& cfg) {
    VectorXc h;
    MatrixXc jz;
    double prev_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= cfg.newton_max_iters; ++it) {
        hom.eval(z, t, h, jz, nullptr);
        if (!h.allFinite()) return Correction::Failed;
        if (h.norm() <= cfg.newton_tol) return Correction::Ok;
        if (it == cfg.newton_max_iters) break;
        Eigen::PartialPivLU<MatrixXc> lu(jz);
        const VectorXc dz = lu.solve(h);
        if (!dz.allFinite()) return Correction::Failed;
        const double step = dz.norm();
        // Require contraction.
        if (step > 0.5 * prev_step && step > 1e-12 * (1.0 + z.norm())) return Correction::Failed;
        prev_step = step;
        z -= dz;
    }
    return Correction::Failed;
}

} // namespace

PathResult track_path(const PolySystem& p, const StartSystem& q, const EvalPoint& start, const TrackerConfig& cfg,
                      Index start_index) {
    cfg.validate();
    Homotopy hom(p, q, cfg.gamma);

    PathResult result;
    result.start_index = start_index;
    VectorXc z = start.stacked();
    double t = 0.0;
    double h = cfg.initial_step;
    int successes = 0;
    long steps = 0;

    VectorXc hv, ht;
    MatrixXc jz;
    bool diverged = false;
    bool stalled = false;

    while (t < 1.0) {
        if (steps >= cfg.max_steps) {
            stalled = true;
            break;
        }
        const double step = std::min(h, 1.0 - t);
        hom.eval(z, t, hv, jz, &ht);
        Eigen::PartialPivLU<MatrixXc> lu(jz);
        const VectorXc tangent = lu.solve(-ht);

        VectorXc zn = z + step * tangent;
        const double tn = (1.0 - (t + step) < 1e-15) ? 1.0 : t + step;
        const bool ok = tangent.allFinite() && newton(hom, zn, tn, cfg) == Correction::Ok;
        if (ok) {
            z = std::move(zn);
            t = tn;
            ++steps;
            if (++successes >= 2) {
                h = std::min(1.5 * h, cfg.max_step);
                successes = 0;
            }
            if (z.norm() > cfg.divergence_norm) {
                diverged = true;
                break;
            }
        } else {
            h *= 0.5;
            successes = 0;
            if (h < cfg.min_step) {
                diverged = true;
                break;
            }
        }
    }

    if (!diverged && !stalled) {
        // Polish on P itself.
        VectorXc pv;
        MatrixXc pj;
        for (int it = 0; it < cfg.end_refine_max_iters; ++it) {
            hom.eval_target(z, pv, pj);
            if (pv.norm() <= cfg.t_end_refine_tol) break;
            Eigen::PartialPivLU<MatrixXc> lu(pj);
            const VectorXc dz = lu.solve(pv);
            if (!dz.allFinite()) break;
            const VectorXc zt = z - dz;
            VectorXc pt;
            MatrixXc jt;
            hom.eval_target(zt, pt, jt);
            if (!(pt.norm() < pv.norm())) break;
            z = zt;
        }
    }

    VectorXc pv;
    MatrixXc pj;
    hom.eval_target(z, pv, pj);
    result.endpoint = EvalPoint::from_stacked(z, p.mode_dims);
    result.final_residual = pv.norm();
    result.steps = steps;
    if (diverged)
        result.status = PathStatus::Diverged;
    else if (stalled || !(result.final_residual <= 10.0 * cfg.newton_tol))
        result.status = PathStatus::Stalled;
    else
        result.status = PathStatus::Converged;
    result.is_real = result.status == PathStatus::Converged && is_real(result.endpoint);
    return result;
}

std::vector<PathResult> track_all(const PolySystem& p, const StartSystem& q, const std::vector<EvalPoint>& starts,
                                  const TrackerConfig& cfg) {
    cfg.validate();
    std::vector<PathResult> results(starts.size());
    unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, starts.size())));

    auto run = [&](const std::vector<std::size_t>& which, const TrackerConfig& c) {
        auto work = [&](unsigned worker) {
            for (std::size_t k = worker; k < which.size(); k += threads)
                results[which[k]] = track_path(p, q, starts[which[k]], c, static_cast<Index>(which[k]));
        };
        if (threads <= 1 || which.size() <= 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        }
    };
    std::vector<std::size_t> all(starts.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    run(all, cfg);

    // Distinct starts must reach distinct endpoints; a shared endpoint means a path jumped.
    TrackerConfig tight = cfg;
    for (int round = 0; round < cfg.retrack_rounds; ++round) {
        const auto hit = colliding_paths(results, cfg.collision_tol);
        if (hit.empty()) break;
        tight.max_step *= 0.25;
        tight.initial_step = std::min(tight.initial_step, tight.max_step);
        tight.newton_max_iters = std::min(tight.newton_max_iters, 3);
        run(hit, tight);
    }
    return results;
}

std::vector<std::size_t> colliding_paths(const std::vector<PathResult>& results, double tol) {
    std::vector<bool> flag(results.size(), false);
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].status != PathStatus::Converged) continue;
        const VectorXc zi = results[i].endpoint.stacked();
        for (std::size_t j = 0; j < i; ++j) {
            if (results[j].status != PathStatus::Converged) continue;
            if ((results[j].endpoint.stacked() - zi).norm() <= tol * (1.0 + zi.norm())) flag[i] = flag[j] = true;
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < flag.size(); ++i)
        if (flag[i]) out.push_back(i);
    return out;
}

std::vector<RealSolution> classify_real(const std::vector<PathResult>& results, double reality_tol,
                                        double cluster_tol) {
    std::vector<RealSolution> candidates;
    for (const auto& r : results) {
        if (r.status != PathStatus::Converged || !is_real(r.endpoint, reality_tol)) continue;
        candidates.push_back({real_part(r.endpoint), r.final_residual, r.start_index});
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const RealSolution& a, const RealSolution& b) {
        if (a.residual != b.residual) return a.residual < b.residual;
        return a.start_index < b.start_index;
    });

    std::vector<RealSolution> kept;
    for (auto& c : candidates) {
        const Eigen::VectorXd v = c.point.stacked();
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const RealSolution& k) {
            return (k.point.stacked() - v).norm() <= cluster_tol;
        });
        if (!duplicate) kept.push_back(std::move(c));
    }

    auto key = [](const RealSolution& s) {
        Eigen::VectorXd v = s.point.stacked();
        for (Index i = 0; i < v.size(); ++i) v(i) = std::round(v(i) * 1e8) / 1e8;
        return v;
    };
    std::sort(kept.begin(), kept.end(), [&](const RealSolution& a, const RealSolution& b) {
        const Eigen::VectorXd ka = key(a), kb = key(b);
        return std::lexicographical_compare(ka.data(), ka.data() + ka.size(), kb.data(), kb.data() + kb.size());
    });
    return kept;
}

} // namespace cphom
