// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/grid_field.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace chsteer {

void validate_grid_size(int n) {
    if (n < 16 || (n & (n - 1)) != 0)
        throw std::invalid_argument("GridField: n must be a power of two >= 16");
}

GridField GridField::zeros(int n) {
    validate_grid_size(n);
    return GridField{n, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
}

bool GridField::all_finite() const {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

double GridField::linf() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

GridField operator+(const GridField& a, const GridField& b) {
    if (a.n != b.n) throw std::invalid_argument("GridField: size mismatch");
    GridField out = a;
    for (int i = 0; i < a.n; ++i) out.values[i] += b.values[i];
    return out;
}

GridField operator-(const GridField& a, const GridField& b) {
    if (a.n != b.n) throw std::invalid_argument("GridField: size mismatch");
    GridField out = a;
    for (int i = 0; i < a.n; ++i) out.values[i] -= b.values[i];
    return out;
}

GridField scaled(const GridField& a, double c) {
    GridField out = a;
    for (double& v : out.values) v *= c;
    return out;
}

GridField to_grid(const TrigPoly& p, int n) {
    validate_grid_size(n);
    if (n <= 2 * p.degree())
        throw std::invalid_argument("to_grid: polynomial degree too high for grid size");
    GridField g = GridField::zeros(n);
    const double h = 2.0 * std::numbers::pi / n;
    for (int j = 0; j < n; ++j) g.values[j] = p.eval(j * h);
    return g;
}

FromGridResult from_grid(const GridField& g, int max_degree, long long denominator_cap) {
    validate_grid_size(g.n);
    if (max_degree < 0 || 2 * max_degree >= g.n)
        throw std::invalid_argument("from_grid: field must be band-limited below n/2");
    const int n = g.n;
    const double h = 2.0 * std::numbers::pi / n;
    FromGridResult out;
    auto put = [&](double coef, auto&& setter) {
        auto approx = rationalize(coef, denominator_cap);
        out.rationalization_error = std::max(out.rationalization_error, approx.error);
        setter(approx.value);
    };
    double a0 = 0.0;
    for (int j = 0; j < n; ++j) a0 += g.values[j];
    a0 /= n;
    put(a0, [&](Rational r) { out.poly.set_const(std::move(r)); });
    for (int k = 1; k <= max_degree; ++k) {
        double ak = 0.0, bk = 0.0;
        for (int j = 0; j < n; ++j) {
            ak += g.values[j] * std::cos(k * j * h);
            bk += g.values[j] * std::sin(k * j * h);
        }
        ak *= 2.0 / n;
        bk *= 2.0 / n;
        put(ak, [&](Rational r) { out.poly.add_cos(k, r); });
        put(bk, [&](Rational r) { out.poly.add_sin(k, r); });
    }
    return out;
}

}  // namespace chsteer
