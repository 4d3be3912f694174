#pragma once

// Noise sweeps: relative error of decompose() against the clean tensor as a
// function of the noise level θ.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cphom/pipeline.hpp"

namespace cphom {

struct ShapeSpec {
    std::string name; // as given, e.g. "3x3x6r4"
    Dims dims;
    Index rank = 0;
    /// Fixed generating model; unset means fresh N(0,1) factors per trial.
    std::optional<FactorSet> model;
};

/// "IxJxK[xL]rR". "3x3x6r4" uses the fixed rank-4 3x3x6 model.
ShapeSpec parse_shape(const std::string& spec);

struct TrialRow {
    std::string shape;
    double theta = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    double relative_error = 0.0;
    Index s_real = 0;
    Index converged_paths = 0;
    double wall_ms = 0.0;
    std::string status; // "ok" or an error kind
};

struct SweepConfig {
    std::vector<double> noise_levels;
    int trials = 1;
    std::uint64_t seed = 0;
    unsigned threads = 1; // trials run concurrently
};

/// Trial seeds are seed + trial index. Rows come back in (theta, trial) order.
std::vector<TrialRow> run_experiment(const ShapeSpec& shape, const SweepConfig& cfg);

/// Median relative error over the successful trials at one θ (NaN if none).
double median_error(const std::vector<TrialRow>& rows, double theta);

/// Header, one row per trial, and a "median" summary row per θ.
void write_csv(std::ostream& out, const std::vector<TrialRow>& rows, const std::vector<double>& noise_levels,
               bool include_timing = true);

} // namespace cphom
