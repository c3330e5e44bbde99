// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#pragma once

#include "chsteer/trig_poly.hpp"

#include <vector>

namespace chsteer {

/// Sampled periodic state on the uniform grid x_j = 2*pi*j/n.
struct GridField {
    int n = 0;
    std::vector<double> values;

    static GridField zeros(int n);
    bool all_finite() const;
    double linf() const;
};

/// Checks n >= 16 and n a power of two; throws std::invalid_argument otherwise.
void validate_grid_size(int n);

GridField operator+(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField scaled(const GridField& a, double c);

/// Samples an exact trig polynomial on the grid. Requires n > 2*deg(p).
GridField to_grid(const TrigPoly& p, int n);

struct FromGridResult {
    TrigPoly poly;
    /// Largest |coefficient - rationalized coefficient| over all modes.
    double rationalization_error = 0.0;
};

/// Discrete Fourier analysis up to max_degree (< n/2) followed by
/// continued-fraction rationalization of each coefficient (denominators
/// capped; the rounding is reported). Content above max_degree is dropped.
FromGridResult from_grid(const GridField& g, int max_degree,
                         long long denominator_cap = 1'000'000);

}  // namespace chsteer
