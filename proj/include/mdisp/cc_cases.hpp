#pragma once

#include <cmath>
#include <vector>

#include "mdisp/analysis.hpp"
#include "mdisp/grid.hpp"

namespace mdisp {

/// Built-in compensated-compactness cases on a small grid with a time
/// axis fine enough to resolve the fastest oscillation.
struct CcDemoCase {
    CcReport report;
    double half_iint_phi = 0.0;  // oracle for the negative case
};

namespace detail {

struct CcDemoSetup {
    Grid grid;
    std::vector<double> times;
    std::vector<double> labels;
    std::vector<ScalarField> phi;  // time-constant spatial bump
};

inline CcDemoSetup cc_demo_setup()
{
    CcDemoSetup s;
    s.grid = build_grid(4, 4, 1.0, 1.0);
    const int nt = 40000;
    const double T = 1.0;
    s.times.reserve(nt);
    for (int m = 0; m < nt; ++m) s.times.push_back((m + 0.5) * T / nt);
    s.labels = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};

    s.phi.assign(s.times.size(), sine_bump(s.grid));
    return s;
}

}  // namespace detail

/// Positive case: alpha_eps = a(x) sin(t/eps) (weak limit 0) against a
/// fixed smooth beta = b(x) (T - t)/T. The gap decays like eps.
inline CcDemoCase cc_demo_positive()
{
    const detail::CcDemoSetup s = detail::cc_demo_setup();
    const double T = 1.0;

    SpaceTimeSequence alpha, beta;
    alpha.grid = beta.grid = s.grid;
    alpha.times = beta.times = s.times;
    alpha.labels = beta.labels = s.labels;

    ScalarField a(s.grid.num_cells()), b(s.grid.num_cells());
    for (int c = 0; c < s.grid.num_cells(); ++c) {
        const Vec2 x = s.grid.cell_center(c);
        a[c] = 1.0 + x.x + x.y;
        b[c] = 1.0 + 0.5 * x.x;
    }

    std::vector<ScalarField> beta_member;
    beta_member.reserve(s.times.size());
    for (double t : s.times) {
        ScalarField f = b;
        for (int c = 0; c < s.grid.num_cells(); ++c) f[c] *= (T - t) / T;
        beta_member.push_back(std::move(f));
    }

    for (double eps : s.labels) {
        std::vector<ScalarField> member;
        member.reserve(s.times.size());
        for (double t : s.times) {
            ScalarField f = a;
            const double osc = std::sin(t / eps);
            for (int c = 0; c < s.grid.num_cells(); ++c) f[c] *= osc;
            member.push_back(std::move(f));
        }
        alpha.members.push_back(std::move(member));
        beta.members.push_back(beta_member);
    }

    const std::vector<ScalarField> alpha_limit(
        s.times.size(), ScalarField(s.grid.num_cells(), 0.0));
    const std::vector<ScalarField>& beta_limit = beta_member;

    CcDemoCase out;
    out.report = cc_product_test(alpha, beta, s.phi, &alpha_limit, &beta_limit);
    return out;
}

/// Negative case: alpha_eps = beta_eps = sin(t/eps). The product converges
/// to 1/2, not to the product of the (zero) weak limits, and the BV bound
/// blows up like 1/eps.
inline CcDemoCase cc_demo_negative()
{
    const detail::CcDemoSetup s = detail::cc_demo_setup();

    SpaceTimeSequence alpha;
    alpha.grid = s.grid;
    alpha.times = s.times;
    alpha.labels = s.labels;
    for (double eps : s.labels) {
        std::vector<ScalarField> member;
        member.reserve(s.times.size());
        for (double t : s.times)
            member.push_back(
                ScalarField(s.grid.num_cells(), std::sin(t / eps)));
        alpha.members.push_back(std::move(member));
    }

    const std::vector<ScalarField> zero_limit(
        s.times.size(), ScalarField(s.grid.num_cells(), 0.0));

    CcDemoCase out;
    out.report = cc_product_test(alpha, alpha, s.phi, &zero_limit, &zero_limit);

    const double dt = s.times[1] - s.times[0];
    double iint_phi = 0.0;
    for (const ScalarField& f : s.phi) {
        double st = 0.0;
        for (int c = 0; c < s.grid.num_cells(); ++c) st += f[c];
        iint_phi += dt * st * s.grid.cell_volume();
    }
    out.half_iint_phi = 0.5 * iint_phi;
    return out;
}

}  // namespace mdisp
