#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "mdisp/grid.hpp"

namespace mdisp {

/// Symmetric 2x2 tensor [[a11, a12], [a12, a22]].
struct SymTensor2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    static SymTensor2 identity() { return {1.0, 0.0, 1.0}; }
    static SymTensor2 zero() { return {0.0, 0.0, 0.0}; }

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a12; }

    Vec2 apply(Vec2 v) const
    {
        return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y};
    }

    /// Eigenvalues in ascending order.
    std::array<double, 2> eigenvalues() const
    {
        const double mean = 0.5 * (a11 + a22);
        const double disc = std::hypot(0.5 * (a11 - a22), a12);
        return {mean - disc, mean + disc};
    }

    /// Spectral norm (largest |eigenvalue|).
    double operator_norm() const
    {
        auto ev = eigenvalues();
        return std::max(std::abs(ev[0]), std::abs(ev[1]));
    }

    double frobenius_norm() const
    {
        return std::sqrt(a11 * a11 + 2.0 * a12 * a12 + a22 * a22);
    }
};

inline SymTensor2 operator+(SymTensor2 a, SymTensor2 b)
{
    return {a.a11 + b.a11, a.a12 + b.a12, a.a22 + b.a22};
}

inline SymTensor2 operator-(SymTensor2 a, SymTensor2 b)
{
    return {a.a11 - b.a11, a.a12 - b.a12, a.a22 - b.a22};
}

inline SymTensor2 operator*(double s, SymTensor2 a)
{
    return {s * a.a11, s * a.a12, s * a.a22};
}

/// Projection onto the flow direction, E(u)_ij = u_i u_j / |u|^2.
/// Idempotent with unit trace. Undefined at u = 0.
inline SymTensor2 flow_projection(Vec2 u)
{
    const double n2 = u.x * u.x + u.y * u.y;
    if (n2 == 0.0)
        throw std::invalid_argument("zero-velocity projection undefined");
    return {u.x * u.x / n2, u.x * u.y / n2, u.y * u.y / n2};
}

/// Positive semidefinite square root via the closed 2x2 form
/// sqrt(T) = (T + sqrt(det) I) / sqrt(trace + 2 sqrt(det)).
/// Eigenvalues below -1e-12 * max(1, |T|) are rejected; smaller
/// negative round-off is clamped.
inline SymTensor2 tensor_sqrt(const SymTensor2& t)
{
    const double scale = std::max(1.0, t.operator_norm());
    if (t.eigenvalues()[0] < -1e-12 * scale)
        throw std::invalid_argument(
            "tensor_sqrt: matrix has a negative eigenvalue beyond tolerance");

    const double s = std::sqrt(std::max(t.det(), 0.0));
    const double tr = std::max(t.trace(), 0.0);
    const double denom = std::sqrt(tr + 2.0 * s);
    if (denom == 0.0) return SymTensor2::zero();
    const double inv = 1.0 / denom;
    return {(t.a11 + s) * inv, t.a12 * inv, (t.a22 + s) * inv};
}

}  // namespace mdisp
