#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "instab/model.hpp"

namespace instab::models {

/// Transition rates of the tandem CTMC at state x with service means
/// (mu1, mu2): {arrival, station-1 completion, station-2 completion}.
inline std::array<double, 3> tandem_mm1_rates(const ChainState& x, double mu1,
                                              double mu2) {
    return {1.0, x[0] > 0.0 ? 1.0 / mu1 : 0.0, x[1] > 0.0 ? 1.0 / mu2 : 0.0};
}

/// Two M/M/1 queues in series, embedded jump chain. Poisson arrivals at rate
/// one, exponential service with means mu1 and mu2. Parameters: (mu1, mu2).
class TandemMM1 final : public ChainModel {
public:
    std::string id() const override { return "tandem-mm1"; }
    ChainState initial_state() const override { return {0.0, 0.0}; }
    int param_dim() const override { return 2; }
    double phi_f() const override { return 1.0; }
    double f(const ChainState& x) const override { return x[0] + x[1]; }

    void step(ChainState& x, const Param& mu, Rng& rng) const override {
        if (!(mu[0] > 0.0) || !(mu[1] > 0.0)) {
            // Zero service mean: the station empties instantly, which the
            // embedded chain cannot represent. Treat the rate as dominant.
            if (mu[0] <= 0.0 && x[0] > 0.0) { x[0] -= 1.0; x[1] += 1.0; return; }
            if (mu[1] <= 0.0 && x[1] > 0.0) { x[1] -= 1.0; return; }
        }
        const auto r = tandem_mm1_rates(x, mu[0], mu[1]);
        const double total = r[0] + r[1] + r[2];
        const double u = rng.uniform() * total;
        if (u < r[0]) {
            x[0] += 1.0;
        } else if (u < r[0] + r[1]) {
            x[0] -= 1.0;
            x[1] += 1.0;
        } else {
            x[1] -= 1.0;
        }
    }
};

/// Interarrival draw: Erlang with shape 2 pinned to mean one (two
/// exponential stages of rate 2).
inline double tandem_interarrival(Rng& rng) {
    return rng.exponential(2.0) + rng.exponential(2.0);
}

/// Service draw: Weibull with shape 2 and scale mu, mean 0.8862 mu.
inline double tandem_weibull_service(double mu, Rng& rng) {
    return mu * std::sqrt(-std::log(rng.uniform_open()));
}

/// Tandem with renewal input and Weibull service, advanced epoch to epoch.
/// State: [x1, x2, arrival residual, station-1 residual, station-2 residual].
/// A zero residual on an active clock means "not yet drawn". f reads only
/// the queue lengths, so phi_f = 1 as for the Markov tandem.
class TandemRenewal final : public ChainModel {
public:
    std::string id() const override { return "tandem-renewal"; }
    ChainState initial_state() const override {
        return {0.0, 0.0, 0.0, 0.0, 0.0};
    }
    int param_dim() const override { return 2; }
    double phi_f() const override { return 1.0; }
    double f(const ChainState& x) const override { return x[0] + x[1]; }

    void step(ChainState& s, const Param& mu, Rng& rng) const override {
        if (!(mu[0] > 0.0) || !(mu[1] > 0.0)) {
            throw std::invalid_argument("tandem-renewal: scales must be positive");
        }
        double& x1 = s[0];
        double& x2 = s[1];
        double& ra = s[2];
        double& r1 = s[3];
        double& r2 = s[4];

        if (ra <= 0.0) ra = tandem_interarrival(rng);
        if (x1 > 0.0 && r1 <= 0.0) r1 = tandem_weibull_service(mu[0], rng);
        if (x2 > 0.0 && r2 <= 0.0) r2 = tandem_weibull_service(mu[1], rng);

        double dt = ra;
        int event = 0;
        if (x1 > 0.0 && r1 < dt) { dt = r1; event = 1; }
        if (x2 > 0.0 && r2 < dt) { dt = r2; event = 2; }

        ra -= dt;
        if (x1 > 0.0) r1 -= dt;
        if (x2 > 0.0) r2 -= dt;

        switch (event) {
        case 0:
            x1 += 1.0;
            ra = 0.0;
            break;
        case 1:
            x1 -= 1.0;
            x2 += 1.0;
            r1 = 0.0;
            break;
        default:
            x2 -= 1.0;
            r2 = 0.0;
            break;
        }
        if (x1 <= 0.0) r1 = 0.0;
        if (x2 <= 0.0) r2 = 0.0;
    }
};

} // namespace instab::models
