#include "cphom/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <regex>
#include <thread>

#include "cphom/io.hpp"

namespace cphom {

ShapeSpec parse_shape(const std::string& spec) {
    static const std::regex re(R"(^(\d+(?:x\d+){2,3})r(\d+)$)");
    std::smatch m;
    if (!std::regex_match(spec, m, re))
        throw Error(ErrorKind::InvalidInput, "shape must look like IxJxK[xL]rR, got '" + spec + "'");
    ShapeSpec s;
    s.name = spec;
    const std::string dims = m[1].str();
    std::size_t pos = 0;
    while (pos <= dims.size()) {
        const auto next = dims.find('x', pos);
        const std::string part = dims.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        s.dims.push_back(std::stol(part));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    s.rank = std::stol(m[2].str());
    if (spec == "3x3x6r4") s.model = rank4_3x3x6_model();
    return s;
}

namespace {

TrialRow run_trial(const ShapeSpec& shape, double theta, int trial, std::uint64_t seed) {
    TrialRow row;
    row.shape = shape.name;
    row.theta = theta;
    row.trial = trial;
    row.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Synthesized data =
            shape.model ? synthesize_from(*shape.model, theta, seed) : synthesize(shape.dims, shape.rank, theta, seed);
        DecomposeRequest req;
        req.tensor = data.noisy;
        req.rank = shape.rank;
        req.seed = seed;
        const DecompositionReport rep = decompose(req);
        row.relative_error = relative_error(data.clean, rep.factors);
        row.s_real = rep.s_real;
        row.converged_paths = rep.path_stats.converged;
        row.status = "ok";
    } catch (const Error& e) {
        row.relative_error = std::numeric_limits<double>::quiet_NaN();
        row.status = to_string(e.kind());
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

} // namespace

std::vector<TrialRow> run_experiment(const ShapeSpec& shape, const SweepConfig& cfg) {
    struct Job {
        double theta;
        int trial;
    };
    std::vector<Job> jobs;
    for (double theta : cfg.noise_levels)
        for (int t = 0; t < cfg.trials; ++t) jobs.push_back({theta, t});

    std::vector<TrialRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
            rows[i] = run_trial(shape, jobs[i].theta, jobs[i].trial, cfg.seed + static_cast<std::uint64_t>(jobs[i].trial));
    };
    const unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work);
    }
    return rows;
}

double median_error(const std::vector<TrialRow>& rows, double theta) {
    std::vector<double> e;
    for (const auto& r : rows)
        if (r.theta == theta && r.status == "ok") e.push_back(r.relative_error);
    if (e.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(e.begin(), e.end());
    const std::size_t n = e.size();
    return n % 2 ? e[n / 2] : 0.5 * (e[n / 2 - 1] + e[n / 2]);
}

void write_csv(std::ostream& out, const std::vector<TrialRow>& rows, const std::vector<double>& noise_levels,
               bool include_timing) {
    out << "shape,theta,trial,seed,relative_error,s_real,converged_paths,wall_ms,status\n";
    for (double theta : noise_levels) {
        std::string shape;
        for (const auto& r : rows) {
            if (r.theta != theta) continue;
            shape = r.shape;
            out << r.shape << ',' << format_real(r.theta) << ',' << r.trial << ',' << r.seed << ','
                << format_real(r.relative_error) << ',' << r.s_real << ',' << r.converged_paths << ','
                << (include_timing ? format_real(r.wall_ms) : std::string("0")) << ',' << r.status << '\n';
        }
        out << shape << ',' << format_real(theta) << ",median,," << format_real(median_error(rows, theta))
            << ",,,,summary\n";
    }
}

} // namespace cphom
