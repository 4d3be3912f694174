#pragma once

#include <stdexcept>
#include <string>

namespace cphom {

enum class ErrorKind {
    InvalidInput,
    UnsupportedOrder,
    RankZero,
    EmptyNullspace,
    UnderdeterminedRank,
    DegenerateRandomness,
    InsufficientRealSolutions,
    IllConditionedW,
    OutOfRegime,
    Io,
    Parse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::UnsupportedOrder: return "unsupported-order";
    case ErrorKind::RankZero: return "rank-zero";
    case ErrorKind::EmptyNullspace: return "empty-nullspace";
    case ErrorKind::UnderdeterminedRank: return "underdetermined-rank";
    case ErrorKind::DegenerateRandomness: return "degenerate-randomness";
    case ErrorKind::InsufficientRealSolutions: return "insufficient-real-solutions";
    case ErrorKind::IllConditionedW: return "ill-conditioned-W";
    case ErrorKind::OutOfRegime: return "out-of-regime";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    }
    return "unknown";
}

} // namespace cphom
