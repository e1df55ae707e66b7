#include "ope/pomdp.hpp"
#include "ope/rng.hpp"

namespace ope {

namespace {

// Cumulative rows for inverse-CDF categorical sampling.
class CumulativeTable {
public:
    explicit CumulativeTable(const Eigen::MatrixXd& probs)
        : cols_(static_cast<int>(probs.cols())),
          cum_(static_cast<std::size_t>(probs.rows() * probs.cols())),
          last_(static_cast<std::size_t>(probs.rows()), 0) {
        for (Eigen::Index r = 0; r < probs.rows(); ++r) {
            double acc = 0.0;
            for (Eigen::Index c = 0; c < probs.cols(); ++c) {
                acc += probs(r, c);
                cum_[static_cast<std::size_t>(r * cols_ + c)] = acc;
                if (probs(r, c) > 0.0) {
                    last_[static_cast<std::size_t>(r)] = static_cast<int>(c);
                }
            }
        }
    }

    int sample(int row, double u) const noexcept {
        const double* begin = cum_.data() + static_cast<std::ptrdiff_t>(row) * cols_;
        const int last = last_[static_cast<std::size_t>(row)];
        for (int c = 0; c < last; ++c) {
            if (u < begin[c]) {
                return c;
            }
        }
        // rounding in the running sum must never select a zero-probability column
        return last;
    }

private:
    int cols_;
    std::vector<double> cum_;
    std::vector<int> last_;
};

} // namespace

Trajectory simulate(const PomdpModel& model, const Policy& behavior, std::size_t T,
                    std::size_t burn_in, std::uint64_t seed) {
    check_compatible(model, behavior);
    if (T < 1) {
        throw ConfigError("simulate needs T >= 1");
    }
    const CumulativeTable action_table(behavior.probs());
    std::vector<CumulativeTable> next_state;
    next_state.reserve(static_cast<std::size_t>(model.num_actions()));
    for (const auto& k : model.transitions()) {
        next_state.emplace_back(k);
    }

    Trajectory traj;
    traj.seed = seed;
    traj.burn_in = burn_in;
    traj.x.resize(T);
    traj.h.resize(T);
    traj.w.resize(T);
    traj.y.resize(T);

    Rng rng(seed);
    const int n = model.num_states();
    int s = std::min(static_cast<int>(rng.uniform() * n), n - 1);
    const std::size_t total = burn_in + T;
    for (std::size_t step = 0; step < total; ++step) {
        const int x = model.x_of(s);
        const int a = action_table.sample(x, rng.uniform());
        const RewardDist& r = model.reward(s, a);
        const double y = r.kind == RewardDist::Kind::gaussian ? rng.normal(r.mean, r.sd) : r.mean;
        if (step >= burn_in) {
            const std::size_t t = step - burn_in;
            traj.x[t] = x;
            traj.h[t] = model.h_of(s);
            traj.w[t] = a;
            traj.y[t] = y;
        }
        s = next_state[static_cast<std::size_t>(a)].sample(s, rng.uniform());
    }
    return traj;
}

} // namespace ope
