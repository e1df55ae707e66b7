#include "ope/errors.hpp"

#include <utility>

namespace ope {

OverlapError::OverlapError(std::size_t t, int x, int a)
    : std::runtime_error("overlap violation at t=" + std::to_string(t) + ", x=" +
                         std::to_string(x) + ", a=" + std::to_string(a) +
                         ": target probability is positive but behavior probability is zero"),
      step(t), covariate(x), action(a) {}

MixingError::MixingError(std::vector<double> last, double res)
    : std::runtime_error("stationary distribution did not converge (residual " +
                         std::to_string(res) + ")"),
      last_iterate(std::move(last)), residual(res) {}

} // namespace ope
