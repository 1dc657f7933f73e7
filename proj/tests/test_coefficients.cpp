#include <catch2/catch.hpp>

#include <cmath>
#include <random>

#include "mdisp/coefficients.hpp"
#include "mdisp/tensor.hpp"

using namespace mdisp;

namespace {

RockModel uniform_rock(const Grid& g, double phi, double k)
{
    return build_rock(g, std::min(phi, 1.0 / phi),
                      {{0.0, 0.0, g.Lx, g.Ly, phi, k, k}});
}

}  // namespace

TEST_CASE("Koval viscosity", "[coefficients]")
{
    FluidModel f;
    f.mu0 = 1.0;
    f.M = 16.0;
    REQUIRE(koval_viscosity(0.0, f) == Approx(1.0));
    REQUIRE(koval_viscosity(1.0, f) == Approx(1.0 / 16.0).epsilon(1e-14));
    // (1 + (16^{1/4} - 1) * 0.5)^{-4} = 1.5^{-4}
    REQUIRE(koval_viscosity(0.5, f) ==
            Approx(0.19753086419753086).epsilon(1e-13));

    SECTION("bounds mu0/M <= mu <= mu0")
    {
        for (int i = 0; i <= 100; ++i) {
            const double mu = koval_viscosity(i / 100.0, f);
            REQUIRE(mu >= f.mu_min() - 1e-15);
            REQUIRE(mu <= f.mu_max() + 1e-15);
        }
    }
    SECTION("out-of-range inputs are clamped and logged")
    {
        ClampStats log;
        REQUIRE(koval_viscosity(-0.2, f, &log) == koval_viscosity(0.0, f));
        REQUIRE(koval_viscosity(1.3, f, &log) == koval_viscosity(1.0, f));
        REQUIRE(log.count == 2);
        REQUIRE(log.worst == Approx(0.3));
        koval_viscosity(0.5, f, &log);
        REQUIRE(log.count == 2);
    }
}

TEST_CASE("viscosity hypothesis checker", "[coefficients]")
{
    SECTION("Koval with M = 2 passes at 1e4 samples")
    {
        FluidModel f;
        f.M = 2.0;
        const auto rep = check_viscosity_hypotheses(f, 10000);
        REQUIRE(rep.pass);
        REQUIRE(rep.margin_mu > 0.0);
        REQUIRE(rep.margin_inv_mu > 0.0);
    }
    SECTION("constant viscosity (M = 1) fails and is flagged degenerate")
    {
        FluidModel f;
        f.M = 1.0;
        const auto rep = check_viscosity_hypotheses(f, 10000);
        REQUIRE_FALSE(rep.pass);
        REQUIRE(rep.degenerate);
        REQUIRE(rep.margin_mu == Approx(0.0).margin(1e-18));
    }
    SECTION("linear viscosity fails (mu'' = 0)")
    {
        const auto rep = check_viscosity_hypotheses(
            [](double c) { return c + 1.0; }, 1000);
        REQUIRE_FALSE(rep.pass);
    }
    SECTION("too few samples rejected")
    {
        FluidModel f;
        REQUIRE_THROWS_AS(check_viscosity_hypotheses(f, 2),
                          std::invalid_argument);
    }
}

TEST_CASE("dispersion tensor family", "[coefficients]")
{
    const Grid g = build_grid(2, 2, 1.0, 1.0);

    SECTION("stagnant cell: Phi eps I")
    {
        const RockModel rock = uniform_rock(g, 0.2, 1.0);
        FluidModel f;
        f.d_l = 1.0;
        f.d_t = 0.1;
        f.eps = 0.01;
        const SymTensor2 d = dispersion_tensor(0, {0.0, 0.0}, rock, f);
        REQUIRE(d.a11 == Approx(0.002));
        REQUIRE(d.a12 == 0.0);
        REQUIRE(d.a22 == Approx(0.002));
    }
    SECTION("isotropic collapse when d_l = d_t")
    {
        const RockModel rock = uniform_rock(g, 0.5, 1.0);
        FluidModel f;
        f.d_l = 0.3;
        f.d_t = 0.3;
        f.eps = 0.05;
        const Vec2 u{1.0, -2.0};
        const SymTensor2 d = dispersion_tensor(0, u, rock, f);
        const double expected = 0.5 * (0.05 + 0.3 * u.norm());
        REQUIRE(d.a12 == 0.0);  // exact: the projection cancels
        REQUIRE(d.a11 == Approx(expected).epsilon(1e-14));
        REQUIRE(d.a22 == Approx(expected).epsilon(1e-14));
    }
    SECTION("hand-evaluated anisotropic case")
    {
        const RockModel rock = uniform_rock(g, 1.0, 1.0);
        FluidModel f;
        f.d_l = 1.0;
        f.d_t = 0.1;
        f.eps = 0.0;
        const SymTensor2 d = dispersion_tensor(0, {2.0, 0.0}, rock, f);
        REQUIRE(d.a11 == Approx(2.0).epsilon(1e-14));
        REQUIRE(d.a12 == 0.0);
        REQUIRE(d.a22 == Approx(0.2).epsilon(1e-14));
    }
}

TEST_CASE("mechanical dispersion", "[coefficients]")
{
    const Grid g = build_grid(2, 2, 1.0, 1.0);
    const RockModel rock = uniform_rock(g, 1.0, 1.0);

    SECTION("vanishes at u = 0")
    {
        FluidModel f;
        f.d_l = 1.0;
        f.d_t = 0.5;
        const SymTensor2 d = mechanical_dispersion(0, {0.0, 0.0}, rock, f);
        REQUIRE(d.a11 == 0.0);
        REQUIRE(d.a12 == 0.0);
        REQUIRE(d.a22 == 0.0);
    }
    SECTION("matches dispersion_tensor with eps forced to zero, bit for bit")
    {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> dist(-3.0, 3.0);
        FluidModel f;
        f.d_l = 0.7;
        f.d_t = 0.2;
        f.eps = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const Vec2 u{dist(rng), dist(rng)};
            const SymTensor2 a = mechanical_dispersion(0, u, rock, f);
            const SymTensor2 b = dispersion_tensor(0, u, rock, f);
            REQUIRE(a.a11 == b.a11);
            REQUIRE(a.a12 == b.a12);
            REQUIRE(a.a22 == b.a22);
        }
    }
    SECTION("isotropic evaluation at |u| = 3")
    {
        FluidModel f;
        f.d_l = 1.0;
        f.d_t = 1.0;
        const SymTensor2 d = mechanical_dispersion(0, {0.0, 3.0}, rock, f);
        REQUIRE(d.a11 == Approx(3.0));
        REQUIRE(d.a22 == Approx(3.0));
        REQUIRE(d.a12 == 0.0);
    }
}

TEST_CASE("velocity truncation", "[coefficients]")
{
    SECTION("no-op below the level")
    {
        const Vec2 u{1.0, 2.0};
        const Vec2 t = truncate_velocity(u, 5.0);
        REQUIRE(t.x == u.x);
        REQUIRE(t.y == u.y);
    }
    SECTION("clamps magnitude")
    {
        const Vec2 t = truncate_velocity({3.0, 4.0}, 2.5);
        REQUIRE(t.x == Approx(1.5));
        REQUIRE(t.y == Approx(2.0));
    }
    SECTION("zero stays zero")
    {
        const Vec2 t = truncate_velocity({0.0, 0.0}, 1.0);
        REQUIRE(t.x == 0.0);
        REQUIRE(t.y == 0.0);
    }
    SECTION("nonpositive level rejected")
    {
        REQUIRE_THROWS_AS(truncate_velocity({1.0, 0.0}, 0.0),
                          std::invalid_argument);
    }
    SECTION("|truncate(u,k)| <= k always")
    {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> dist(-10.0, 10.0);
        std::uniform_real_distribution<double> kd(0.1, 5.0);
        for (int i = 0; i < 1000; ++i) {
            const double k = kd(rng);
            const Vec2 t = truncate_velocity({dist(rng), dist(rng)}, k);
            REQUIRE(t.norm() <= k * (1.0 + 1e-14));
        }
    }
}

TEST_CASE("coercivity and boundedness of the tensor family", "[coefficients]")
{
    const Grid g = build_grid(2, 2, 1.0, 1.0);
    const double phi = 0.25;
    const RockModel rock = uniform_rock(g, phi, 1.0);
    FluidModel f;
    f.d_l = 0.8;
    f.d_t = 0.1;
    f.eps = 0.02;
    const double dmin = std::min(f.d_l, f.d_t), dmax = std::max(f.d_l, f.d_t);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    for (int i = 0; i < 10000; ++i) {
        const Vec2 zeta{dist(rng), dist(rng)};
        const Vec2 xi{dist(rng), dist(rng)};
        const SymTensor2 d = dispersion_tensor(0, zeta, rock, f);
        const double quad = d.apply(xi).dot(xi);
        const double lower = phi * (f.eps + dmin * zeta.norm()) * xi.dot(xi);
        REQUIRE(quad >= lower * (1.0 - 1e-12));
        // spectral bound with phi <= 1/phi_star
        const double upper = (1.0 / rock.phi_star) * (f.eps + dmax * zeta.norm());
        REQUIRE(d.operator_norm() <= upper * (1.0 + 1e-12));
        // square-root bound
        const SymTensor2 s = tensor_sqrt(d);
        REQUIRE(s.operator_norm() <=
                std::sqrt(upper) * (1.0 + 1e-12));
    }
}

TEST_CASE("truncation consistency", "[coefficients]")
{
    const Grid g = build_grid(2, 2, 1.0, 1.0);
    const RockModel rock = uniform_rock(g, 0.5, 1.0);
    FluidModel f;
    f.d_l = 0.6;
    f.d_t = 0.2;
    f.eps = 0.01;

    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const Vec2 u{dist(rng), dist(rng)};
        const double k = u.norm() + 0.5;
        const SymTensor2 a =
            dispersion_tensor(0, truncate_velocity(u, k), rock, f);
        const SymTensor2 b = dispersion_tensor(0, u, rock, f);
        REQUIRE(a.a11 == b.a11);
        REQUIRE(a.a12 == b.a12);
        REQUIRE(a.a22 == b.a22);
    }
}

TEST_CASE("square-root continuity along a vanishing-diffusion sequence",
          "[coefficients]")
{
    const Grid g = build_grid(2, 2, 1.0, 1.0);
    const RockModel rock = uniform_rock(g, 0.4, 1.0);
    FluidModel f;
    f.d_l = 0.5;
    f.d_t = 0.1;

    const Vec2 u{0.3, -0.4};
    f.eps = 0.0;
    const SymTensor2 limit = tensor_sqrt(mechanical_dispersion(0, u, rock, f));

    double prev_err = -1.0;
    for (int j = 1; j <= 8; ++j) {
        const double eps_j = 0.1 * std::pow(0.5, j);
        const Vec2 u_j = u + std::pow(0.5, j) * Vec2{0.1, 0.05};
        const SymTensor2 s =
            tensor_sqrt(dispersion_tensor_eps(0, u_j, rock, f, eps_j));
        const double err = (s - limit).frobenius_norm();
        if (prev_err >= 0.0) REQUIRE(err <= 0.75 * prev_err);
        prev_err = err;
    }
    REQUIRE(prev_err <= 1e-3);
}
