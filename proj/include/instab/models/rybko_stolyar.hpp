#pragma once

#include <array>
#include <stdexcept>

#include "instab/model.hpp"

namespace instab::models {

/// Transition rates of the two-station priority network at state
/// x = [class-1 stage-1, class-1 stage-2, class-2 stage-1, class-2 stage-2].
/// Stage-1 queues sit at the left (class 1) and right (class 2) stations;
/// stage-2 queues at the opposite station and preempt stage-1 work there.
/// Entries: {class-1 arrival, class-2 arrival, left completion, right
/// completion}.
inline std::array<double, 4> rybko_stolyar_rates(const ChainState& x,
                                                 double lambda, double mu_l,
                                                 double mu_r) {
    const bool left_busy = x[0] > 0.0 || x[3] > 0.0;
    const bool right_busy = x[1] > 0.0 || x[2] > 0.0;
    return {lambda, lambda, left_busy ? mu_l : 0.0, right_busy ? mu_r : 0.0};
}

/// Applies transition `event` (index into rybko_stolyar_rates) in place.
/// Completions serve the stage-2 queue when present, else stage 1.
inline void rybko_stolyar_apply(ChainState& x, int event) {
    switch (event) {
    case 0:
        x[0] += 1.0;
        break;
    case 1:
        x[2] += 1.0;
        break;
    case 2:
        if (x[3] > 0.0) {
            x[3] -= 1.0;  // class-2 job departs
        } else {
            x[0] -= 1.0;
            x[1] += 1.0;  // class-1 job moves to the right station
        }
        break;
    default:
        if (x[1] > 0.0) {
            x[1] -= 1.0;  // class-1 job departs
        } else {
            x[2] -= 1.0;
            x[3] += 1.0;  // class-2 job moves to the left station
        }
        break;
    }
}

/// Two-class, two-station network with second-stage priority, embedded jump
/// chain. Both classes arrive at rate lambda; the left station serves at
/// rate mu_l, the right at rate mu_r. Parameter: mu_l; lambda and mu_r are
/// model constants.
class RybkoStolyar final : public ChainModel {
public:
    explicit RybkoStolyar(double lambda = 1.0, double mu_r = 4.0)
        : lambda_(lambda), mu_r_(mu_r) {
        if (!(lambda_ > 0.0) || !(mu_r_ > 0.0)) {
            throw std::invalid_argument(
                "rybko-stolyar: lambda and mu_r must be positive");
        }
    }

    std::string id() const override { return "rybko-stolyar"; }
    ChainState initial_state() const override { return {0.0, 0.0, 0.0, 0.0}; }
    int param_dim() const override { return 1; }
    double phi_f() const override { return 1.0; }
    double f(const ChainState& x) const override {
        return x[0] + x[1] + x[2] + x[3];
    }

    void step(ChainState& x, const Param& p, Rng& rng) const override {
        const double mu_l = p[0];
        if (!(mu_l > 0.0)) {
            throw std::invalid_argument("rybko-stolyar: mu_l must be positive");
        }
        const auto r = rybko_stolyar_rates(x, lambda_, mu_l, mu_r_);
        const double total = r[0] + r[1] + r[2] + r[3];
        double u = rng.uniform() * total;
        int event = 0;
        while (event < 3 && u >= r[event]) {
            u -= r[event];
            ++event;
        }
        rybko_stolyar_apply(x, event);
    }

    double lambda() const { return lambda_; }
    double mu_r() const { return mu_r_; }

private:
    double lambda_;
    double mu_r_;
};

} // namespace instab::models
