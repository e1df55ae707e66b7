#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ope {

/// Invalid dimensions, probabilities or parameters supplied by a caller.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The target policy puts mass on an action the behavior policy never takes.
class OverlapError : public std::runtime_error {
public:
    OverlapError(std::size_t t, int x, int a);
    explicit OverlapError(const std::string& what) : std::runtime_error(what) {}

    std::size_t step = 0;
    int covariate = -1;
    int action = -1;
};

/// Power iteration did not reach the requested residual.
class MixingError : public std::runtime_error {
public:
    MixingError(std::vector<double> last_iterate, double residual);

    std::vector<double> last_iterate;
    double residual;
};

} // namespace ope
