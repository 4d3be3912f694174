// cphom: CP decomposition of unbalanced 3rd/4th-order tensors by homotopy continuation.
//
// Exit codes: 0 success, 1 I/O, parse or usage error, 2 no decomposition found
// (too few real solutions or singular W), 3 rank out of regime,
// 4 verification above tolerance.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cphom/experiment.hpp"
#include "cphom/io.hpp"
#include "cphom/pipeline.hpp"

namespace {

using namespace cphom;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InsufficientRealSolutions:
    case ErrorKind::IllConditionedW:
    case ErrorKind::DegenerateRandomness:
        return 2;
    case ErrorKind::OutOfRegime:
    case ErrorKind::UnderdeterminedRank:
        return 3;
    default:
        return 1;
    }
}

struct TrackerFlags {
    double h0 = 0.05, min_step = 1e-7, max_step = 0.2, newton_tol = 1e-10, divergence = 1e8, refine_tol = 1e-12;
    int newton_iters = 5;
    unsigned threads = 1;

    void add(CLI::App* app) {
        app->add_option("--h0", h0, "initial step");
        app->add_option("--min-step", min_step, "minimum step before a path is abandoned");
        app->add_option("--max-step", max_step, "maximum step");
        app->add_option("--newton-tol", newton_tol, "corrector tolerance on |H|");
        app->add_option("--newton-max-iters", newton_iters, "corrector iterations per step");
        app->add_option("--divergence-norm", divergence, "norm at which a path counts as diverged");
        app->add_option("--refine-tol", refine_tol, "end polishing tolerance on |P|");
        app->add_option("--threads", threads, "paths tracked concurrently (0 = all cores)");
    }

    TrackerConfig config(std::uint64_t seed) const {
        TrackerConfig cfg = TrackerConfig::from_seed(seed);
        cfg.initial_step = h0;
        cfg.min_step = min_step;
        cfg.max_step = max_step;
        cfg.newton_tol = newton_tol;
        cfg.newton_max_iters = newton_iters;
        cfg.divergence_norm = divergence;
        cfg.t_end_refine_tol = refine_tol;
        cfg.threads = threads;
        return cfg;
    }
};

Index parse_rank(const std::string& s) {
    if (s == "auto") return 0;
    try {
        const long v = std::stol(s);
        if (v >= 1) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidInput, "--rank must be a positive integer or 'auto'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"CP decomposition of unbalanced tensors by multi-homogeneous homotopy continuation"};
    app.require_subcommand(1);

    // decompose
    auto* dec = app.add_subcommand("decompose", "decompose a tensor file");
    std::string dec_input, dec_output, dec_rank = "auto", dec_report = "text", dec_report_file;
    std::uint64_t dec_seed = 0;
    double dec_trunc = kDefaultTruncTol;
    TrackerFlags dec_tracker;
    dec->add_option("--input", dec_input, "tensor file")->required();
    dec->add_option("--rank", dec_rank, "rank R or 'auto'");
    dec->add_option("--seed", dec_seed, "seed for normalizations, start system and gamma");
    dec->add_option("--trunc-tol", dec_trunc, "relative singular value cutoff for auto rank");
    dec->add_option("--output", dec_output, "factor file to write");
    dec->add_option("--report", dec_report, "report format")->check(CLI::IsMember({"json", "text"}));
    dec->add_option("--report-file", dec_report_file, "write the report here instead of stdout");
    dec_tracker.add(dec);

    // synthesize
    auto* syn = app.add_subcommand("synthesize", "generate a noisy low-rank tensor and its factors");
    std::vector<Index> syn_dims;
    Index syn_rank = 1;
    double syn_noise = 0.0;
    std::uint64_t syn_seed = 0;
    std::vector<std::string> syn_output;
    std::string syn_model;
    bool syn_allow = false;
    syn->add_option("--dims", syn_dims, "tensor dims");
    syn->add_option("--rank", syn_rank, "CP rank");
    syn->add_option("--noise", syn_noise, "noise level theta (absolute Frobenius norm)");
    syn->add_option("--seed", syn_seed, "generator seed");
    syn->add_option("--model", syn_model, "fixed model instead of random factors")
        ->check(CLI::IsMember({"rank4-3x3x6"}));
    syn->add_flag("--allow-out-of-regime", syn_allow, "permit ranks above min(last dim, critical rank)");
    syn->add_option("--output", syn_output, "tensor file and factor file")->required()->expected(2);

    // verify
    auto* ver = app.add_subcommand("verify", "relative error of a factor file against a tensor file");
    std::string ver_tensor, ver_factors, ver_truth;
    double ver_tol = 1e-8;
    ver->add_option("--tensor", ver_tensor, "tensor file")->required();
    ver->add_option("--factors", ver_factors, "factor file")->required();
    ver->add_option("--truth", ver_truth, "ground-truth factor file for component matching");
    ver->add_option("--tol", ver_tol, "pass threshold on the relative error");

    // experiment
    auto* exp = app.add_subcommand("experiment", "noise sweep, CSV output");
    std::string exp_shape = "3x3x6r4", exp_output;
    std::vector<double> exp_noise{1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
    int exp_trials = 20;
    std::uint64_t exp_seed = 0;
    unsigned exp_threads = 1;
    exp->add_option("--shape", exp_shape, "3x3x6r4 | 3x3x4x30r28 | IxJxK[xL]rR");
    exp->add_option("--noise-levels", exp_noise, "list of theta values");
    exp->add_option("--trials", exp_trials, "trials per theta");
    exp->add_option("--seed", exp_seed, "base seed; trial i uses seed + i");
    exp->add_option("--threads", exp_threads, "trials run concurrently (0 = all cores)");
    exp->add_option("--output", exp_output, "CSV file (stdout if omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*dec) {
            DecomposeRequest req;
            req.tensor = read_tensor_file(dec_input);
            req.rank = parse_rank(dec_rank);
            req.seed = dec_seed;
            req.trunc_tol = dec_trunc;
            req.tracker = dec_tracker.config(dec_seed);
            const DecompositionReport rep = decompose(req);
            if (!dec_output.empty()) write_factor_file(dec_output, rep.factors);
            const std::string text = dec_report == "json" ? report_to_json(rep).dump(2) + "\n" : report_to_text(rep);
            if (dec_report_file.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(dec_report_file);
                if (!out) throw Error(ErrorKind::Io, "cannot open '" + dec_report_file + "' for writing");
                out << text;
            }
            return 0;
        }
        if (*syn) {
            Synthesized data;
            if (syn_model == "rank4-3x3x6") {
                data = synthesize_from(rank4_3x3x6_model(), syn_noise, syn_seed);
            } else {
                if (syn_dims.empty()) throw Error(ErrorKind::InvalidInput, "--dims is required without --model");
                data = synthesize(Dims(syn_dims.begin(), syn_dims.end()), syn_rank, syn_noise, syn_seed, syn_allow);
            }
            write_tensor_file(syn_output[0], data.noisy);
            write_factor_file(syn_output[1], data.truth);
            return 0;
        }
        if (*ver) {
            const DenseTensor t = read_tensor_file(ver_tensor);
            const FactorSet f = read_factor_file(ver_factors);
            if (f.dims() != t.dims()) {
                std::cerr << "error: factor shapes do not match the tensor\n";
                return 1;
            }
            // Summed term by term so all-zero factor columns are accepted.
            DenseTensor approx(t.dims());
            for (Index r = 0; r < f.rank(); ++r) {
                std::vector<Eigen::VectorXd> cols;
                for (const auto& m : f.factors) cols.push_back(m.col(r));
                approx.data() += outer_rank1(cols).data();
            }
            const double ref = frobenius_norm(t);
            const double diff = (t.data() - approx.data()).norm();
            const double err = ref > 0 ? diff / ref : diff;
            std::cout << "relative_error " << format_real(err) << '\n';
            if (!ver_truth.empty()) {
                const FactorSet truth = read_factor_file(ver_truth);
                const MatchReport m = match_components(f, truth);
                std::cout << "component truth relative_error\n";
                for (std::size_t r = 0; r < m.errors.size(); ++r)
                    std::cout << r << ' ' << m.permutation[r] << ' ' << format_real(m.errors[r]) << '\n';
                std::cout << "max_component_error " << format_real(m.max_error) << '\n';
            }
            return err <= ver_tol ? 0 : 4;
        }
        if (*exp) {
            const ShapeSpec shape = parse_shape(exp_shape);
            SweepConfig cfg;
            cfg.noise_levels = exp_noise;
            cfg.trials = exp_trials;
            cfg.seed = exp_seed;
            cfg.threads = exp_threads;
            const auto rows = run_experiment(shape, cfg);
            if (exp_output.empty()) {
                write_csv(std::cout, rows, exp_noise);
            } else {
                std::ofstream out(exp_output);
                if (!out) throw Error(ErrorKind::Io, "cannot open '" + exp_output + "' for writing");
                write_csv(out, rows, exp_noise);
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    }
    return 1;
}
