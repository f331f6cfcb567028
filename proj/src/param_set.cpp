#include "instab/param_set.hpp"

#include <algorithm>
#include <cmath>

namespace instab {

ParameterSet ParameterSet::box(std::vector<double> lo, std::vector<double> hi) {
    ParameterSet s;
    s.kind = Kind::box;
    s.lower = std::move(lo);
    s.upper = std::move(hi);
    s.validate();
    return s;
}

ParameterSet ParameterSet::grid(std::vector<double> lo, std::vector<double> hi,
                                double resolution, int r_nbhd) {
    ParameterSet s;
    s.kind = Kind::grid;
    s.lower = std::move(lo);
    s.upper = std::move(hi);
    s.h = resolution;
    s.r_nbhd = r_nbhd;
    s.validate();
    return s;
}

void ParameterSet::validate() const {
    if (lower.empty() || lower.size() != upper.size()) {
        throw std::invalid_argument("parameter set: bounds must be nonempty and of equal dimension");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] <= upper[i])) {
            throw std::invalid_argument("parameter set: lower bound exceeds upper bound");
        }
    }
    if (kind == Kind::grid) {
        if (!(h > 0.0)) {
            throw std::invalid_argument("parameter set: grid resolution h must be positive");
        }
        if (r_nbhd < 1) {
            throw std::invalid_argument("parameter set: neighborhood radius must be >= 1");
        }
    }
}

long ParameterSet::axis_points(int i) const {
    // Lattice lower + j*h for j = 0..m, last point <= upper (with slack for
    // rounding so that e.g. [0,1] at h=0.05 has 21 points).
    double span = upper[i] - lower[i];
    long m = static_cast<long>(std::floor(span / h + 1e-9));
    return m + 1;
}

Param ParameterSet::grid_point(const std::vector<long>& idx) const {
    Param p(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        p[i] = lower[i] + static_cast<double>(idx[i]) * h;
    }
    return p;
}

std::vector<long> ParameterSet::grid_index(const Param& p) const {
    std::vector<long> idx(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        idx[i] = std::lround((p[i] - lower[i]) / h);
    }
    return idx;
}

bool ParameterSet::contains(const Param& p) const {
    if (p.size() != lower.size()) return false;
    double tol = (kind == Kind::grid) ? h * 1e-6 : 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < lower[i] - tol || p[i] > upper[i] + tol) return false;
    }
    if (kind == Kind::grid) {
        auto idx = grid_index(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= axis_points(static_cast<int>(i))) return false;
            double snapped = lower[i] + static_cast<double>(idx[i]) * h;
            if (std::abs(p[i] - snapped) > h * 1e-6) return false;
        }
    }
    return true;
}

Param ParameterSet::sample_uniform(Rng& rng) const {
    Param p(lower.size());
    if (kind == Kind::box) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            p[i] = rng.uniform(lower[i], upper[i]);
        }
    } else {
        for (std::size_t i = 0; i < p.size(); ++i) {
            long m = axis_points(static_cast<int>(i));
            p[i] = lower[i] + static_cast<double>(rng.uniform_index(m)) * h;
        }
    }
    return p;
}

std::vector<Param> ParameterSet::neighborhood(const Param& lambda) const {
    if (kind != Kind::grid) {
        throw std::invalid_argument("neighborhood requires a grid parameter set");
    }
    auto center = grid_index(lambda);
    std::vector<Param> out;
    // Enumerate index offsets with L1 norm <= r_nbhd, clipped to the lattice.
    std::vector<long> offset(center.size(), 0);
    auto rec = [&](auto&& self, std::size_t axis, int budget) -> void {
        if (axis == center.size()) {
            std::vector<long> idx(center.size());
            for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = center[i] + offset[i];
            for (std::size_t i = 0; i < idx.size(); ++i) {
                if (idx[i] < 0 || idx[i] >= axis_points(static_cast<int>(i))) return;
            }
            out.push_back(grid_point(idx));
            return;
        }
        for (int o = -budget; o <= budget; ++o) {
            offset[axis] = o;
            self(self, axis + 1, budget - std::abs(o));
        }
        offset[axis] = 0;
    };
    rec(rec, 0, r_nbhd);
    return out;
}

Param ParameterSet::sample_neighborhood(const Param& lambda, Rng& rng) const {
    auto nbhd = neighborhood(lambda);
    return nbhd[rng.uniform_index(nbhd.size())];
}

} // namespace instab
