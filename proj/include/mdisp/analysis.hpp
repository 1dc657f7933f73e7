#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdisp/coefficients.hpp"
#include "mdisp/grid.hpp"

namespace mdisp {

/// Least-squares cell gradient over face neighbors. On a uniform grid this
/// reduces to central differences in the interior and one-sided differences
/// at the boundary; exact for affine fields.
inline VectorField least_squares_gradient(const ScalarField& f, const Grid& g)
{
    VectorField grad(g.num_cells());
    for (int c = 0; c < g.num_cells(); ++c) {
        const auto& cf = g.cell_faces[static_cast<size_t>(c)];
        double sxx = 0.0, sxf = 0.0, syy = 0.0, syf = 0.0;
        auto acc = [&](int face_id, double dx, double dy, int nb) {
            if (face_id < 0) return;
            const double df = f[nb] - f[c];
            sxx += dx * dx;
            sxf += dx * df;
            syy += dy * dy;
            syf += dy * df;
        };
        const int i = g.cell_i(c), j = g.cell_j(c);
        if (cf[0] >= 0) acc(cf[0], -g.hx(), 0.0, g.cell_index(i - 1, j));
        if (cf[1] >= 0) acc(cf[1], g.hx(), 0.0, g.cell_index(i + 1, j));
        if (cf[2] >= 0) acc(cf[2], 0.0, -g.hy(), g.cell_index(i, j - 1));
        if (cf[3] >= 0) acc(cf[3], 0.0, g.hy(), g.cell_index(i, j + 1));
        grad[c] = {sxx > 0.0 ? sxf / sxx : 0.0, syy > 0.0 ? syf / syy : 0.0};
    }
    return grad;
}

/// Smooth cutoff built as a product of quintic smoothstep ramps of the
/// distance to the domain boundary and to each excluded entity: zero
/// within `margin`, one beyond 2*margin.
struct CutoffField {
    ScalarField theta;
    double margin = 0.0;
    std::vector<Vec2> excluded_points;
    std::vector<Segment> excluded_segments;
};

namespace detail {

inline double smoothstep_quintic(double t)
{
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

inline double ramp(double dist, double margin)
{
    return smoothstep_quintic((dist - margin) / margin);
}

inline double point_segment_distance(Vec2 p, const Segment& s)
{
    const Vec2 d = s.b - s.a;
    const double len2 = d.dot(d);
    double t = len2 > 0.0 ? (p - s.a).dot(d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 proj = s.a + t * d;
    return (p - proj).norm();
}

}  // namespace detail

inline CutoffField build_cutoff(const Grid& g,
                                const std::vector<Vec2>& excluded_points,
                                const std::vector<Segment>& excluded_segments,
                                double margin)
{
    if (!(margin > 2.0 * g.cell_diagonal()))
        throw std::invalid_argument(
            "build_cutoff: margin too small relative to the grid");

    CutoffField cut;
    cut.margin = margin;
    cut.excluded_points = excluded_points;
    cut.excluded_segments = excluded_segments;
    cut.theta = make_cell_field(g);
    for (int c = 0; c < g.num_cells(); ++c) {
        const Vec2 x = g.cell_center(c);
        double th = detail::ramp(x.x, margin) * detail::ramp(g.Lx - x.x, margin) *
                    detail::ramp(x.y, margin) * detail::ramp(g.Ly - x.y, margin);
        for (const Vec2& p : excluded_points)
            th *= detail::ramp((x - p).norm(), margin);
        for (const Segment& s : excluded_segments)
            th *= detail::ramp(detail::point_segment_distance(x, s), margin);
        cut.theta[c] = th;
    }
    return cut;
}

/// (sum_c |grad f|^q w_c vol_c)^(1/q) with least-squares gradients;
/// `weight` may be null for the unweighted norm.
inline double lq_gradient_norm(const ScalarField& f, const Grid& g, double q,
                               const CutoffField* weight = nullptr)
{
    if (!(q >= 1.0))
        throw std::invalid_argument("lq_gradient_norm: exponent must be >= 1");
    const VectorField grad = least_squares_gradient(f, g);
    const double vol = g.cell_volume();
    double s = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) {
        const double w = weight ? weight->theta[c] : 1.0;
        s += std::pow(grad[c].norm(), q) * w * vol;
    }
    return std::pow(s, 1.0 / q);
}

/// H1 norm sqrt(||f||_L2^2 + ||grad f||_L2^2).
inline double h1_norm(const ScalarField& f, const Grid& g)
{
    const VectorField grad = least_squares_gradient(f, g);
    const double vol = g.cell_volume();
    double s = 0.0;
    for (int c = 0; c < g.num_cells(); ++c)
        s += (f[c] * f[c] + grad[c].dot(grad[c])) * vol;
    return std::sqrt(s);
}

inline double l2_norm(const ScalarField& f, const Grid& g)
{
    double s = 0.0;
    for (int c = 0; c < g.num_cells(); ++c) s += f[c] * f[c];
    return std::sqrt(s * g.cell_volume());
}

/// Dissipation functional sum_m dt sum_c D(x,u) grad c . grad c vol,
/// with the tensor family evaluated at `eps` and velocities truncated at
/// `trunc_k` (infinity disables truncation).
inline double energy_functional(const std::vector<ScalarField>& c_history,
                                const std::vector<VectorField>& u_history,
                                const Grid& g, const RockModel& rock,
                                const FluidModel& f, double dt,
                                double trunc_k =
                                    std::numeric_limits<double>::infinity())
{
    if (c_history.size() != u_history.size())
        throw std::invalid_argument("energy_functional: misaligned histories");
    const double vol = g.cell_volume();
    double total = 0.0;
    for (size_t m = 0; m < c_history.size(); ++m) {
        const VectorField grad = least_squares_gradient(c_history[m], g);
        double step = 0.0;
        for (int c = 0; c < g.num_cells(); ++c) {
            const Vec2 u = truncate_velocity(u_history[m][c], trunc_k);
            const SymTensor2 d = dispersion_tensor(c, u, rock, f);
            step += d.apply(grad[c]).dot(grad[c]) * vol;
        }
        total += dt * step;
    }
    return total;
}

/// Total variation sum |F(t_{m+1}) - F(t_m)| of a scalar series.
inline double bv_time_seminorm(const std::vector<double>& series)
{
    if (series.size() < 2)
        throw std::invalid_argument("bv_time_seminorm: need >= 2 samples");
    double s = 0.0;
    for (size_t m = 0; m + 1 < series.size(); ++m)
        s += std::abs(series[m + 1] - series[m]);
    return s;
}

/// Time series of sum Phi mu(c) psi vol and sum (Phi / mu(c)) psi vol.
struct ViscosityAverages {
    std::vector<double> mu_series;
    std::vector<double> inv_mu_series;
};

inline ViscosityAverages viscosity_average_series(
    const std::vector<ScalarField>& c_history, const Grid& g,
    const RockModel& rock, const FluidModel& f, const ScalarField& psi)
{
    ViscosityAverages out;
    out.mu_series.reserve(c_history.size());
    out.inv_mu_series.reserve(c_history.size());
    const double vol = g.cell_volume();
    for (const ScalarField& c : c_history) {
        double smu = 0.0, sinv = 0.0;
        for (int i = 0; i < g.num_cells(); ++i) {
            const double mu = koval_viscosity(c[i], f);
            smu += rock.phi[i] * mu * psi[i] * vol;
            sinv += rock.phi[i] / mu * psi[i] * vol;
        }
        out.mu_series.push_back(smu);
        out.inv_mu_series.push_back(sinv);
    }
    return out;
}

/// Geometric threshold ladder eta_i = eta_0 2^{-i} with eta_0 the median
/// speed sample; candidates that are attained exactly by some discrete
/// speed value are nudged up by ulp steps until the level set is empty.
inline std::vector<double> select_thresholds(
    const std::vector<ScalarField>& speed_history, int count)
{
    if (count < 1)
        throw std::invalid_argument("select_thresholds: count must be >= 1");

    std::vector<double> samples;
    for (const ScalarField& s : speed_history)
        samples.insert(samples.end(), s.v.begin(), s.v.end());
    if (samples.empty())
        throw std::invalid_argument("select_thresholds: empty speed history");

    std::sort(samples.begin(), samples.end());
    const double max_speed = samples.back();
    if (max_speed == 0.0)
        throw std::runtime_error(
            "select_thresholds: stagnant field, no thresholds");
    double eta0 = samples[samples.size() / 2];
    if (eta0 == 0.0) {
        // Mostly stagnant field: anchor on the smallest positive sample.
        eta0 = *std::upper_bound(samples.begin(), samples.end(), 0.0);
    }

    const double ulp =
        std::nextafter(max_speed, std::numeric_limits<double>::infinity()) -
        max_speed;
    auto attained = [&samples](double v) {
        return std::binary_search(samples.begin(), samples.end(), v);
    };

    std::vector<double> etas;
    double eta = eta0;
    for (int i = 0; i < count; ++i) {
        double candidate = eta;
        while (attained(candidate)) candidate += ulp;
        etas.push_back(candidate);
        eta *= 0.5;
    }
    return etas;
}

/// Least-squares gradient masked to the superlevel set {speed > eta}:
/// exactly zero where speed <= eta.
inline VectorField masked_gradient(const ScalarField& c,
                                   const ScalarField& speed, double eta,
                                   const Grid& g)
{
    VectorField grad = least_squares_gradient(c, g);
    for (int i = 0; i < g.num_cells(); ++i)
        if (!(speed[i] > eta)) grad[i] = {0.0, 0.0};
    return grad;
}

/// Smooth bump vanishing on the domain boundary, usable on any grid.
inline ScalarField sine_bump(const Grid& g)
{
    ScalarField psi(g.num_cells());
    for (int c = 0; c < g.num_cells(); ++c) {
        const Vec2 x = g.cell_center(c);
        psi[c] = std::sin(kPi * x.x / g.Lx) * std::sin(kPi * x.y / g.Ly);
    }
    return psi;
}

/// Ordered family of space-time fields indexed by a ladder label (eps),
/// sharing one grid and one uniform time axis.
struct SpaceTimeSequence {
    Grid grid;
    std::vector<double> times;
    std::vector<double> labels;
    std::vector<std::vector<ScalarField>> members;  // per label: one field per time

    void check() const
    {
        if (labels.size() != members.size())
            throw std::invalid_argument("SpaceTimeSequence: label/member mismatch");
        for (const auto& m : members)
            if (m.size() != times.size())
                throw std::invalid_argument(
                    "SpaceTimeSequence: member not aligned with time axis");
    }

    double dt() const
    {
        return times.size() > 1 ? times[1] - times[0] : 1.0;
    }
};

namespace detail {

inline double spacetime_triple_product(const SpaceTimeSequence& seq,
                                       const std::vector<ScalarField>& a,
                                       const std::vector<ScalarField>& b,
                                       const std::vector<ScalarField>& phi)
{
    const double vol = seq.grid.cell_volume();
    const double dt = seq.dt();
    double s = 0.0;
    for (size_t m = 0; m < seq.times.size(); ++m) {
        double st = 0.0;
        for (int c = 0; c < seq.grid.num_cells(); ++c)
            st += a[m][c] * b[m][c] * phi[m][c] * vol;
        s += dt * st;
    }
    return s;
}

/// Cesaro estimate of a weak time limit: the time average of the finest
/// member, broadcast over the axis.
inline std::vector<ScalarField> cesaro_limit(const SpaceTimeSequence& seq)
{
    const auto& finest = seq.members.back();
    ScalarField avg(seq.grid.num_cells(), 0.0);
    for (const ScalarField& f : finest)
        for (int c = 0; c < seq.grid.num_cells(); ++c) avg[c] += f[c];
    for (int c = 0; c < seq.grid.num_cells(); ++c)
        avg[c] /= static_cast<double>(finest.size());
    return std::vector<ScalarField>(seq.times.size(), avg);
}

/// Fixed bank of boundary-vanishing test functions for BV probes.
inline std::vector<ScalarField> test_function_bank(const Grid& g)
{
    const ScalarField base = sine_bump(g);
    std::vector<ScalarField> bank;
    ScalarField psi_x = base, psi_y = base;
    for (int c = 0; c < g.num_cells(); ++c) {
        const Vec2 x = g.cell_center(c);
        psi_x[c] *= x.x / g.Lx;
        psi_y[c] *= x.y / g.Ly;
    }
    bank.push_back(base);
    bank.push_back(psi_x);
    bank.push_back(psi_y);
    return bank;
}

}  // namespace detail

struct CcReport {
    std::vector<double> labels;
    std::vector<double> gaps;       // G per label
    std::vector<double> bv_bounds;  // B per label
    std::string verdict;
};

/// Compensated-compactness probe: per label computes the product gap
/// G = |iint a_e b_e phi - iint a b phi| and the BV bound
/// B = max over the test bank of BV(int b_e psi). Weak limits default to
/// Cesaro time averages of the finest member.
inline CcReport cc_product_test(
    const SpaceTimeSequence& alpha, const SpaceTimeSequence& beta,
    const std::vector<ScalarField>& phi,
    const std::vector<ScalarField>* alpha_limit = nullptr,
    const std::vector<ScalarField>* beta_limit = nullptr)
{
    alpha.check();
    beta.check();
    if (alpha.labels != beta.labels || alpha.times != beta.times)
        throw std::invalid_argument("cc_product_test: misaligned sequences");

    const std::vector<ScalarField> alim =
        alpha_limit ? *alpha_limit : detail::cesaro_limit(alpha);
    const std::vector<ScalarField> blim =
        beta_limit ? *beta_limit : detail::cesaro_limit(beta);
    const double limit_product =
        detail::spacetime_triple_product(alpha, alim, blim, phi);

    const std::vector<ScalarField> bank =
        detail::test_function_bank(alpha.grid);
    const double vol = alpha.grid.cell_volume();

    CcReport rep;
    rep.labels = alpha.labels;
    for (size_t k = 0; k < alpha.labels.size(); ++k) {
        rep.gaps.push_back(std::abs(detail::spacetime_triple_product(
                               alpha, alpha.members[k], beta.members[k], phi) -
                           limit_product));
        double bmax = 0.0;
        for (const ScalarField& psi : bank) {
            std::vector<double> series;
            series.reserve(alpha.times.size());
            for (const ScalarField& bfield : beta.members[k]) {
                double s = 0.0;
                for (int c = 0; c < alpha.grid.num_cells(); ++c)
                    s += bfield[c] * psi[c] * vol;
                series.push_back(s);
            }
            bmax = std::max(bmax, bv_time_seminorm(series));
        }
        rep.bv_bounds.push_back(bmax);
    }

    const double g0 = rep.gaps.front(), gN = rep.gaps.back();
    const double b0 = rep.bv_bounds.front(), bN = rep.bv_bounds.back();
    const bool b_grows = b0 > 0.0 ? bN >= 2.0 * b0 : bN > 0.0;
    bool g_decreasing = true;
    for (size_t k = 0; k + 1 < rep.gaps.size(); ++k)
        if (rep.gaps[k + 1] > 1.1 * rep.gaps[k]) g_decreasing = false;
    const bool g_to_zero = g0 == 0.0 || (g_decreasing && gN <= 0.1 * g0);
    const bool g_stagnates = gN > 0.0 && gN >= 0.5 * g0;

    if (b_grows && g_stagnates)
        rep.verdict = "counterexample-behavior";
    else if (b_grows)
        rep.verdict = "hypothesis-violated";
    else if (g_to_zero)
        rep.verdict = "theorem-consistent";
    else
        rep.verdict = "inconclusive";
    return rep;
}

/// Weak-strong product gaps |iint w_e v_e phi - iint w v phi| per label.
inline std::vector<double> weak_strong_product_check(
    const SpaceTimeSequence& strong, const SpaceTimeSequence& weak,
    const std::vector<ScalarField>& phi,
    const std::vector<ScalarField>* strong_limit = nullptr,
    const std::vector<ScalarField>* weak_limit = nullptr)
{
    strong.check();
    weak.check();
    if (strong.labels != weak.labels || strong.times != weak.times)
        throw std::invalid_argument(
            "weak_strong_product_check: misaligned sequences");

    const std::vector<ScalarField> wlim =
        strong_limit ? *strong_limit : detail::cesaro_limit(strong);
    const std::vector<ScalarField> vlim =
        weak_limit ? *weak_limit : detail::cesaro_limit(weak);
    const double limit_product =
        detail::spacetime_triple_product(strong, wlim, vlim, phi);

    std::vector<double> gaps;
    for (size_t k = 0; k < strong.labels.size(); ++k)
        gaps.push_back(std::abs(
            detail::spacetime_triple_product(strong, strong.members[k],
                                             weak.members[k], phi) -
            limit_product));
    return gaps;
}

}  // namespace mdisp
