#pragma once

#include <stdexcept>
#include <string>

namespace volterra {

/// Malformed or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation could not reach its requested accuracy (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Noise covariance violates the Hilbert-Schmidt admissibility condition
/// for the requested rate parameter (CLI exit code 4).
class InadmissibleNoise : public std::runtime_error {
public:
    InadmissibleNoise(const std::string& what, double nu_max)
        : std::runtime_error(what), nu_max_(nu_max) {}

    double nu_max() const noexcept { return nu_max_; }

private:
    double nu_max_;
};

} // namespace volterra
