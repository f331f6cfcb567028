#include "instab/dominating.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace instab {

namespace {
constexpr double kSupportTail = 1e-12;  // support truncation level
constexpr double kBisectTol = 1e-9;     // absolute tolerance in z
} // namespace

void DominatingConfig::validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("dominating: delta must be positive");
    if (sigma < 1) throw std::invalid_argument("dominating: sigma must be >= 1");
    if (kappa < 0.0) throw std::invalid_argument("dominating: kappa must be >= 0");
    if (!(phi > 0.0)) throw std::invalid_argument("dominating: phi must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("dominating: alpha must be in (0,1)");
    }
    if (!(tau.c > 0.0) || !(tau.d > 0.0)) {
        throw std::invalid_argument("dominating: tau schedule requires c > 0 and d > 0");
    }
}

ZCoefficients z_coefficients(double w, const DominatingConfig& cfg) {
    const double sigma = static_cast<double>(cfg.sigma);
    const long n = static_cast<long>(std::ceil(cfg.tau.value(w) / sigma));
    ZCoefficients co;
    co.n = n < 1 ? 1 : n;
    const double dn = static_cast<double>(co.n);
    co.a1 = sigma * cfg.phi - sigma * dn * cfg.delta;
    co.a2 = (cfg.phi + cfg.delta) * (cfg.phi + cfg.delta) * sigma * sigma * dn;
    co.a3 = sigma * cfg.phi - w + cfg.kappa;
    co.a4 = cfg.phi * cfg.phi * sigma * sigma * dn;
    return co;
}

namespace {

// The two Gaussian bumps of the tail bound, evaluated at z.
inline double bump1(const ZCoefficients& co, double z) {
    const double r = z - co.a1;
    return std::exp(-r * r / (2.0 * co.a2));
}

inline double bump2(const ZCoefficients& co, double z) {
    const double r = z - co.a3;
    return static_cast<double>(co.n) * std::exp(-r * r / (2.0 * co.a4));
}

// Monotone envelope at z >= 0 given precomputed values at z = 0. The
// running minimum of a unimodal bump over (0, z] is the smaller of its two
// endpoint values, so the envelope is exactly non-increasing with no grid.
inline double envelope(const ZCoefficients& co, double b1_at0, double b2_at0,
                       double z) {
    const double e1 = std::min(b1_at0, bump1(co, z));
    const double e2 = std::min(b2_at0, bump2(co, z));
    return std::min(1.0, e1 + e2);
}

} // namespace

double z_tail(double w, double z, const DominatingConfig& cfg) {
    if (z <= 0.0) return 1.0;
    const ZCoefficients co = z_coefficients(w, cfg);
    return std::min(1.0, bump1(co, z) + bump2(co, z));
}

double z_tail_monotone(double w, double z, const DominatingConfig& cfg) {
    if (z <= 0.0) return 1.0;
    const ZCoefficients co = z_coefficients(w, cfg);
    return envelope(co, bump1(co, 0.0), bump2(co, 0.0), z);
}

double w_star(const DominatingConfig& cfg) {
    // a3(w) <= 0 at w >= sigma*phi + kappa; a1 is piecewise constant in w
    // through n(w), so scan upward from that point.
    double w = std::max(0.0, static_cast<double>(cfg.sigma) * cfg.phi + cfg.kappa);
    ZCoefficients co = z_coefficients(w, cfg);
    if (co.a1 <= 0.0 && co.a3 <= 0.0) return w;
    // Smallest n with a1 <= 0, then smallest w with that n and a3 <= 0.
    const double sigma = static_cast<double>(cfg.sigma);
    const double n_req = std::ceil(cfg.phi / cfg.delta);
    // n(w) >= n_req  <=>  tau(w) > sigma*(n_req - 1)  <=>  w > (sigma*(n_req-1) - d)/c
    double w_for_n = (sigma * (n_req - 1.0) - cfg.tau.d) / cfg.tau.c;
    w = std::max(w, std::nextafter(w_for_n, std::numeric_limits<double>::infinity()));
    w = std::max(w, sigma * cfg.phi + cfg.kappa);
    return w;
}

namespace {

struct ZSampler {
    const DominatingConfig* cfg;
    ZCoefficients co;
    double b1_at0, b2_at0;
    double tail0;  // envelope at 0+

    explicit ZSampler(double w, const DominatingConfig& c) : cfg(&c) {
        co = z_coefficients(w, c);
        b1_at0 = bump1(co, 0.0);
        b2_at0 = bump2(co, 0.0);
        tail0 = std::min(1.0, b1_at0 + b2_at0);
    }

    double tail(double z) const { return envelope(co, b1_at0, b2_at0, z); }

    // Upper bracket: grow past both peaks until the envelope is below the
    // truncation level.
    double support_max() const {
        double hi = std::max({1.0, co.a1, co.a3});
        while (tail(hi) >= kSupportTail) hi *= 2.0;
        double lo = 0.0;
        while (hi - lo > kBisectTol) {
            double mid = 0.5 * (lo + hi);
            if (tail(mid) < kSupportTail) hi = mid; else lo = mid;
        }
        return hi;
    }

    double sample(double u) const {
        if (u >= tail0) return 0.0;  // atom at zero
        double hi = std::max({1.0, co.a1, co.a3});
        while (tail(hi) > u) {
            hi *= 2.0;
            if (tail(hi) < kSupportTail) break;  // support truncation
        }
        double lo = 0.0;
        while (hi - lo > kBisectTol) {
            double mid = 0.5 * (lo + hi);
            if (tail(mid) <= u) hi = mid; else lo = mid;
        }
        return hi;
    }
};

} // namespace

double sample_z(double w, const DominatingConfig& cfg, double u) {
    if (!(u > 0.0 && u < 1.0)) {
        throw std::invalid_argument("sample_z: u must lie in (0,1)");
    }
    return ZSampler(w, cfg).sample(u);
}

WPath simulate_w(double w0, long k_max, const DominatingConfig& cfg, Rng& rng,
                 bool double_increment) {
    if (w0 < 0.0 || k_max < 0) {
        throw std::invalid_argument("simulate_w: w0 >= 0 and k_max >= 0 required");
    }
    WPath path;
    path.values.reserve(static_cast<std::size_t>(k_max) + 1);
    double w = w0;
    path.values.push_back(w);
    for (long k = 0; k < k_max; ++k) {
        w += ZSampler(w, cfg).sample(rng.uniform_open());
        if (double_increment) {
            w += ZSampler(w, cfg).sample(rng.uniform_open());
        }
        path.values.push_back(w);
    }
    return path;
}

std::vector<double> estimate_quantiles(double w0, long k_max,
                                       const DominatingConfig& cfg,
                                       long n_reps, std::uint64_t seed,
                                       bool double_increment, int workers) {
    cfg.validate();
    if (n_reps < 100) {
        throw std::invalid_argument(
            "estimate_quantiles: n_reps must be >= 100 (quantile too noisy)");
    }
    if (k_max < 0) throw std::invalid_argument("estimate_quantiles: k_max >= 0");

    const std::size_t n = static_cast<std::size_t>(n_reps);
    const long rank = static_cast<long>(std::ceil((1.0 - cfg.alpha) * static_cast<double>(n_reps)));
    const std::size_t rank_idx = static_cast<std::size_t>(std::clamp<long>(rank, 1, n_reps)) - 1;

    std::vector<double> q(static_cast<std::size_t>(k_max) + 1);
    q[0] = w0;
    if (k_max == 0) return q;

    std::vector<double> w(n, w0);
    std::vector<Rng> rngs;
    rngs.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        rngs.emplace_back(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    }

    const int nw = std::max(1, workers);
    // Window of iterations buffered per pass; column-contiguous so the
    // per-k selection runs on a contiguous slice.
    const long window = std::clamp<long>(4'000'000 / n_reps, 64, 8192);
    std::vector<double> buf(n * static_cast<std::size_t>(window));

    auto advance_block = [&](std::size_t lo, std::size_t hi, long k0, long k1) {
        for (std::size_t r = lo; r < hi; ++r) {
            double wr = w[r];
            Rng& rng = rngs[r];
            for (long k = k0; k < k1; ++k) {
                wr += ZSampler(wr, cfg).sample(rng.uniform_open());
                if (double_increment) {
                    wr += ZSampler(wr, cfg).sample(rng.uniform_open());
                }
                buf[static_cast<std::size_t>(k - k0) * n + r] = wr;
            }
            w[r] = wr;
        }
    };

    for (long k0 = 1; k0 <= k_max; k0 += window) {
        const long k1 = std::min(k_max + 1, k0 + window);
        if (nw == 1) {
            advance_block(0, n, k0, k1);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(nw));
            for (int t = 0; t < nw; ++t) {
                std::size_t lo = n * static_cast<std::size_t>(t) / nw;
                std::size_t hi = n * static_cast<std::size_t>(t + 1) / nw;
                pool.emplace_back(advance_block, lo, hi, k0, k1);
            }
            for (auto& th : pool) th.join();
        }
        for (long k = k0; k < k1; ++k) {
            double* col = buf.data() + static_cast<std::size_t>(k - k0) * n;
            std::nth_element(col, col + rank_idx, col + n);
            q[static_cast<std::size_t>(k)] = col[rank_idx];
        }
    }

    // Isotonic in k: W is pathwise nondecreasing, so the true quantile is.
    for (std::size_t k = 1; k < q.size(); ++k) {
        q[k] = std::max(q[k], q[k - 1]);
    }
    return q;
}

// ---------------------------------------------------------------------------
// Quantile cache

struct QuantileCache::Impl {
    using Key = std::tuple<double, long, double, double, double, double, double,
                           double, bool, long>;
    std::mutex mu;
    std::map<Key, std::shared_ptr<const std::vector<double>>> tables;
};

std::shared_ptr<QuantileCache::Impl> QuantileCache::make_impl() {
    return std::make_shared<Impl>();
}

QuantileCache& QuantileCache::instance() {
    static QuantileCache cache;
    return cache;
}

void QuantileCache::clear() {
    std::lock_guard lock(impl_->mu);
    impl_->tables.clear();
}

std::shared_ptr<const std::vector<double>> QuantileCache::get(
    const DominatingConfig& cfg, double w0, bool double_increment,
    long n_reps, long k_max, int workers) {
    Impl::Key key{cfg.delta, cfg.sigma, cfg.kappa, cfg.phi,
                  cfg.tau.c, cfg.tau.d, cfg.alpha, w0, double_increment, n_reps};
    {
        std::lock_guard lock(impl_->mu);
        auto it = impl_->tables.find(key);
        if (it != impl_->tables.end() &&
            static_cast<long>(it->second->size()) > k_max) {
            return it->second;
        }
    }
    // Table seed is a fixed constant mixed with the key, independent of the
    // experiment root seed, so results do not depend on evaluation order.
    std::uint64_t seed = derive_seed(
        0x71b3a5u,
        {std::hash<double>{}(cfg.delta) ^ static_cast<std::uint64_t>(cfg.sigma),
         std::hash<double>{}(cfg.kappa) ^ std::hash<double>{}(cfg.phi),
         std::hash<double>{}(cfg.tau.c) ^ std::hash<double>{}(cfg.tau.d),
         std::hash<double>{}(cfg.alpha) ^ std::hash<double>{}(w0),
         static_cast<std::uint64_t>(double_increment) ^
             static_cast<std::uint64_t>(n_reps)});
    auto table = std::make_shared<std::vector<double>>(
        estimate_quantiles(w0, k_max, cfg, n_reps, seed, double_increment,
                           workers));
    std::lock_guard lock(impl_->mu);
    auto& slot = impl_->tables[key];
    if (!slot || slot->size() < table->size()) slot = table;
    return slot;
}

// ---------------------------------------------------------------------------
// Instability test

Verdict instability_test(const ChainModel& model, const ParameterSet& set,
                         const EngineConfig& engine_cfg,
                         const DominatingConfig& dom_cfg,
                         const TestOptions& options, Trajectory* out_trajectory) {
    dom_cfg.validate();
    // The W-transition monotonicity argument needs n(w) <= w above w*,
    // which fails when the asymptotic slope c/sigma reaches 1.
    if (dom_cfg.tau.c / static_cast<double>(dom_cfg.sigma) >= 1.0) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true)) {
            std::cerr << "warning: tau slope c >= sigma; the W-transition "
                         "monotonicity precondition (n(w) <= w above w*) fails\n";
        }
    }

    Annealer ann(model, set, engine_cfg);
    const double w0 = ann.f();  // W_0 = f(Y_0)
    auto record = [&]() {
        if (!out_trajectory) return;
        const AnnealerState& st = ann.state();
        out_trajectory->records.push_back(
            {st.k, st.t, ann.f(), st.lambda, st.accepted});
    };
    record();
    while (!ann.budget_exhausted()) {
        ann.step();
        record();
    }
    const AnnealerState& s = ann.state();
    if (out_trajectory) out_trajectory->total_sim_steps = s.sim_steps;

    const bool double_inc = engine_cfg.algorithm == Algorithm::local;
    // tau >= 1 per iteration, so the comparison index is at most k_star.
    const long k_max = engine_cfg.k_star;

    double quantile;
    if (options.use_cache) {
        auto table = QuantileCache::instance().get(
            dom_cfg, w0, double_inc, options.n_reps, k_max, options.workers);
        quantile = (*table)[static_cast<std::size_t>(s.k)];
    } else {
        auto q = estimate_quantiles(w0, k_max, dom_cfg, options.n_reps,
                                    derive_seed(engine_cfg.seed, {0x7157u}),
                                    double_inc, options.workers);
        quantile = q[static_cast<std::size_t>(s.k)];
    }

    Verdict v;
    v.k = s.k;
    v.t = s.t;
    v.f_value = model.f(s.y);
    v.quantile = quantile;
    v.alpha = dom_cfg.alpha;
    v.k_star = engine_cfg.k_star;
    v.seed = engine_cfg.seed;
    v.unstable = v.f_value > quantile;
    return v;
}

void write_quantiles_csv(std::ostream& os, const std::vector<double>& q) {
    os << "k,q_alpha\n";
    char buf[64];
    for (std::size_t k = 0; k < q.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", q[k]);
        os << k << ',' << buf << '\n';
    }
}

void write_verdict_csv(std::ostream& os, const Verdict& v) {
    os << "decision,k,f_Y,q,alpha,k_star,seed\n";
    char fbuf[64], qbuf[64], abuf[64];
    std::snprintf(fbuf, sizeof(fbuf), "%.17g", v.f_value);
    std::snprintf(qbuf, sizeof(qbuf), "%.17g", v.quantile);
    std::snprintf(abuf, sizeof(abuf), "%.17g", v.alpha);
    os << (v.unstable ? "unstable" : "not-rejected") << ',' << v.k << ','
       << fbuf << ',' << qbuf << ',' << abuf << ',' << v.k_star << ','
       << v.seed << '\n';
}

} // namespace instab
