#pragma once

#include <stdexcept>
#include <string>

namespace oomcraft {

/// Bad user input: dimension mismatches, non-finite values, empty data,
/// malformed configuration. Maps to CLI exit code 2.
class InvalidInputError : public std::runtime_error {
public:
    explicit InvalidInputError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: rank deficiency, divergence, singular covariance.
/// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Rank of an empirical cross-moment matrix fell below the requested model
/// dimension after singular-value filtering.
class RankDeficiencyError : public NumericalError {
public:
    RankDeficiencyError(const std::string& what, int observed, int requested)
        : NumericalError(what), observed_rank(observed), requested_rank(requested) {}

    int observed_rank;
    int requested_rank;
};

/// File and parse errors. Maps to CLI exit code 4.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace oomcraft
