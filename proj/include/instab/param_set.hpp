#pragma once

#include <stdexcept>
#include <vector>

#include "instab/model.hpp"
#include "instab/rng.hpp"

namespace instab {

/// The search set L. Global search uses a continuous axis-aligned box;
/// local search requires a finite grid with neighborhoods B_lambda.
struct ParameterSet {
    enum class Kind { box, grid };

    Kind kind = Kind::box;
    std::vector<double> lower;
    std::vector<double> upper;
    double h = 0.0;   // grid resolution (grid only)
    int r_nbhd = 1;   // neighborhood radius in grid cells (grid only)

    static ParameterSet box(std::vector<double> lo, std::vector<double> hi);
    static ParameterSet grid(std::vector<double> lo, std::vector<double> hi,
                             double resolution, int r_nbhd = 1);

    int dim() const { return static_cast<int>(lower.size()); }

    /// Throws std::invalid_argument on malformed bounds.
    void validate() const;

    bool contains(const Param& p) const;

    /// Uniform over the box, or uniform over the lattice points for a grid.
    Param sample_uniform(Rng& rng) const;

    /// Uniform over B_lambda (grid only; lambda must be a grid point).
    Param sample_neighborhood(const Param& lambda, Rng& rng) const;

    /// B_lambda: grid points within L1 cell distance r_nbhd (includes lambda).
    std::vector<Param> neighborhood(const Param& lambda) const;

    /// Number of lattice points along axis i.
    long axis_points(int i) const;

    Param grid_point(const std::vector<long>& idx) const;
    std::vector<long> grid_index(const Param& p) const;
};

} // namespace instab
