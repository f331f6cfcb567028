#pragma once

#include <string>
#include <vector>

#include "instab/rng.hpp"

namespace instab {

/// Chain state: nonnegative counts for discrete models; continuous-time
/// models may append residual clocks (ignored by f).
using ChainState = std::vector<double>;

/// A point in the parameter set L.
using Param = std::vector<double>;

/// Black-box simulator interface: one embedded step of the chain under a
/// parameter point, plus the Lyapunov value f and its increment bound.
class ChainModel {
public:
    virtual ~ChainModel() = default;

    virtual std::string id() const = 0;
    virtual ChainState initial_state() const = 0;

    /// Advance the state by one embedded step under parameter lambda.
    virtual void step(ChainState& x, const Param& lambda, Rng& rng) const = 0;

    /// Lyapunov value; reads only the queue-length part of the state.
    virtual double f(const ChainState& x) const = 0;

    /// Bound on |f(x') - f(x)| over any single step.
    virtual double phi_f() const = 0;

    virtual int param_dim() const = 0;
};

} // namespace instab
