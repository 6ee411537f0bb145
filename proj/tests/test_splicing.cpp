#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "scfred/errors.hpp"
#include "scfred/splicing.hpp"

using namespace scfred;
using namespace scfred::splicing;
using scspace::DomainSpec;
using scspace::GridFunction;
using scspace::ScaleSpace;
using scspace::make_scale_space;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd scalar(double x) {
    VectorXd v(1);
    v << x;
    return v;
}

ScaleSpace line_space() { return make_scale_space(DomainSpec::line(10.0, 0.1), 0, {0.0, 0.5}, 1); }

GridFunction from_line(const ScaleSpace& sp, const std::function<double(double)>& f) {
    return GridFunction::from_line(
        sp,
        [&](double s) {
            VectorXd v(1);
            v << f(s);
            return v;
        },
        1);
}

GridFunction random_decaying(const ScaleSpace& sp, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    double a0 = amp(rng), a1 = amp(rng), a2 = amp(rng), ph = amp(rng);
    auto g = from_line(sp, [&](double s) {
        return a0 * std::exp(-0.1 * s * s) + a1 * std::tanh(s + ph) * std::exp(-0.05 * s * s) +
               a2 * std::sin(0.7 * s) * std::exp(-0.2 * s * s);
    });
    g.set_asymptotics(scalar(g.values()(0, 0)), scalar(g.values()(g.values().rows() - 1, 0)));
    return g;
}

}  // namespace

TEST_CASE("cutoff identities") {
    CHECK(beta(-2.0) == 1.0);
    CHECK(beta(2.0) == 0.0);
    CHECK(beta(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(beta(0.3) + beta(-0.3) == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i <= 6000; ++i) {
        double s = -3.0 + i * 0.001;
        CHECK(std::abs(beta(s) + beta(-s) - 1.0) <= 1e-12);
    }
    for (double s = -0.99; s < 1.0; s += 0.01) CHECK(beta_prime(s) < 0.0);
    // Smoothness at the matching points: one-sided finite differences of the
    // value agree with the (vanishing) derivative.
    for (double s0 : {-1.0, 1.0}) {
        double eps = 1e-4;
        double inner = (beta(s0) - beta(s0 - eps)) / eps;
        double outer = (beta(s0 + eps) - beta(s0)) / eps;
        CHECK(std::abs(inner - outer) < 1e-3);
        CHECK(std::abs(beta_prime(s0)) < 1e-10);
    }
}

TEST_CASE("gluing profiles") {
    auto expo = GluingProfile::exponential();
    auto loga = GluingProfile::logarithmic();
    CHECK(profile_length(expo, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(profile_length(expo, 0.5) == doctest::Approx(std::exp(2.0) - std::numbers::e));
    CHECK(profile_length(loga, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(profile_length(expo, 0.0), DomainError);
    CHECK_THROWS_AS(profile_length(expo, 1.5), DomainError);
    for (double r = 0.05; r <= 1.0; r += 0.05) {
        CHECK(profile_parameter(expo, profile_length(expo, r)) == doctest::Approx(r).epsilon(1e-10));
        CHECK(profile_parameter(loga, profile_length(loga, r)) == doctest::Approx(r).epsilon(1e-10));
    }
}

TEST_CASE("glue_line formula and special cases") {
    auto sp = line_space();

    SUBCASE("constants glue to the same constant") {
        auto c = from_line(sp, [](double) { return 2.0; });
        for (double R : {0.0, 1.0, 4.0, 9.0}) {
            auto g = glue_line(c, c, R);
            CHECK((g.values().array() - 2.0).abs().maxCoeff() < 1e-14);
        }
    }

    SUBCASE("glued equals u where beta is 1") {
        double R = 6.0;
        auto u = from_line(sp, [](double s) { return std::tanh(s) + 1.0; });
        u.set_asymptotics(scalar(0.0), scalar(2.0));
        auto v = from_line(sp, [](double s) { return std::tanh(s) + 3.0; });
        v.set_asymptotics(scalar(2.0), scalar(4.0));
        auto g = glue_line(u, v, R);
        for (int i = 0; i < sp.n_s(); ++i)
            if (sp.s_coord(i) <= R / 2.0 - 1.0)
                CHECK(g.values()(i, 0) == doctest::Approx(u.values()(i, 0)).epsilon(1e-14));
    }

    SUBCASE("matched tanh pair reproduces the closed formula") {
        double R = 6.0;
        auto u = from_line(sp, [](double s) { return std::tanh(s) + 1.0; });
        u.set_asymptotics(scalar(0.0), scalar(2.0));
        auto v = from_line(sp, [](double s) { return std::tanh(s) + 3.0; });
        v.set_asymptotics(scalar(2.0), scalar(4.0));
        auto g = glue_line(u, v, R);
        for (int i = 0; i < sp.n_s(); ++i) {
            double s = sp.s_coord(i);
            double b = beta(s - 3.0);
            double vv = s - R < -10.0 ? 2.0 : std::tanh(s - R) + 3.0;
            CHECK(g.values()(i, 0) == doctest::Approx(b * (std::tanh(s) + 1.0) + (1 - b) * vv)
                                          .epsilon(1e-12));
        }
    }

    SUBCASE("incompatible interfaces are rejected") {
        auto u = from_line(sp, [](double s) { return std::tanh(s); });
        u.set_asymptotics(scalar(-1.0), scalar(1.0));
        auto v = from_line(sp, [](double s) { return std::tanh(s) + 5.0; });
        v.set_asymptotics(scalar(4.0), scalar(6.0));
        CHECK_THROWS_AS(glue_line(u, v, 3.0), InterfaceMismatchError);
    }
}

TEST_CASE("antiglue_line formula") {
    auto sp = line_space();

    SUBCASE("equal constants produce c (2 beta - 1) with midpoint zero") {
        double c = 1.7, R = 4.0;
        auto cc = from_line(sp, [&](double) { return c; });
        auto a = antiglue_line(cc, cc, R);
        for (int i = 0; i < sp.n_s(); ++i) {
            double s = sp.s_coord(i);
            CHECK(a.values()(i, 0) ==
                  doctest::Approx(c * (2.0 * beta(s - R / 2.0) - 1.0)).epsilon(1e-12));
        }
        int mid = static_cast<int>(std::lround((R / 2.0 - sp.domain().s_lo) / sp.domain().h));
        CHECK(std::abs(a.values()(mid, 0)) < 1e-12);
    }

    SUBCASE("vanishes left of the cutover when h is supported there and k = 0") {
        double R = 6.0;
        auto h = from_line(sp, [&](double s) { return std::exp(-(s + 3.0) * (s + 3.0)); });
        h.set_asymptotics(scalar(0.0), scalar(0.0));
        auto k = GridFunction::zero(sp, 1);
        auto a = antiglue_line(h, k, R);
        for (int i = 0; i < sp.n_s(); ++i)
            if (sp.s_coord(i) <= R / 2.0 - 1.0) CHECK(std::abs(a.values()(i, 0)) < 1e-12);
    }

    SUBCASE("independent evaluation oracle on random smooth pairs") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 20; ++trial) {
            auto h = random_decaying(sp, rng);
            auto k = random_decaying(sp, rng);
            VectorXd shared = 0.5 * (h.asym_right() + k.asym_left());
            h.set_asymptotics(h.asym_left(), shared);
            k.set_asymptotics(shared, k.asym_right());
            double R = 4.2;  // node-aligned (42 steps of 0.1)
            auto a = antiglue_line(h, k, R);
            for (int i = 0; i < sp.n_s(); ++i) {
                double s = sp.s_coord(i);
                double b = beta(s - R / 2.0);
                double spos = s - R;
                double kval;
                if (spos < sp.domain().s_lo - 1e-12) {
                    kval = shared(0);
                } else {
                    int j = static_cast<int>(std::lround((spos - sp.domain().s_lo) / 0.1));
                    kval = k.values()(j, 0);
                }
                CHECK(a.values()(i, 0) ==
                      doctest::Approx(-(1.0 - b) * h.values()(i, 0) + b * kval).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("total gluing is invertible") {
    auto sp = line_space();
    std::mt19937_64 rng(123);

    SUBCASE("zero maps to zero and the map is linear") {
        auto z = GridFunction::zero(sp, 1);
        auto p = total_glue(z, z, 5.0);
        CHECK(scspace::level_norm(p.glued, 0) == 0.0);
        CHECK(scspace::level_norm(p.antiglued, 0) == 0.0);

        auto x1 = random_decaying(sp, rng);
        auto x2 = random_decaying(sp, rng);
        auto y1 = random_decaying(sp, rng);
        auto y2 = random_decaying(sp, rng);
        double al = 1.37;
        auto lhs = total_glue(x1 * al + y1, x2 * al + y2, 5.0, ShiftMode::Rounded, 1e9);
        auto ga = total_glue(x1, x2, 5.0, ShiftMode::Rounded, 1e9);
        auto gb = total_glue(y1, y2, 5.0, ShiftMode::Rounded, 1e9);
        CHECK((lhs.glued.values() - (ga.glued.values() * al + gb.glued.values()))
                  .lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK((lhs.antiglued.values() - (ga.antiglued.values() * al + gb.antiglued.values()))
                  .lpNorm<Eigen::Infinity>() < 1e-10);
    }

    SUBCASE("pointwise determinant attains its minimum 1/2 on the grid") {
        auto h = random_decaying(sp, rng);
        auto k = random_decaying(sp, rng);
        VectorXd shared = 0.5 * (h.asym_right() + k.asym_left());
        h.set_asymptotics(h.asym_left(), shared);
        k.set_asymptotics(shared, k.asym_right());
        auto p = total_glue(h, k, 4.0);  // R/2 = 2.0 lies on the grid
        CHECK(p.min_determinant == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(p.min_determinant >= 0.5 - 1e-12);
    }

    SUBCASE("200 random pairs round-trip on the overlap to 1e-10") {
        const double R = 4.0;
        const int n = 40;
        double worst = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            auto h = random_decaying(sp, rng);
            auto k = random_decaying(sp, rng);
            VectorXd shared = 0.5 * (h.asym_right() + k.asym_left());
            h.set_asymptotics(h.asym_left(), shared);
            k.set_asymptotics(shared, k.asym_right());
            auto p = total_glue(h, k, R);
            auto back = total_unglue(p.glued, p.antiglued, R);
            worst = std::max(worst,
                             (back.h.values() - h.values()).lpNorm<Eigen::Infinity>());
            // overlap region of k: nodes that pair with a window node
            for (int j = 0; j < sp.n_s() - n; ++j)
                worst = std::max(worst, std::abs(back.k.values()(j, 0) - k.values()(j, 0)));
        }
        CHECK(worst <= 1e-10);
    }

    SUBCASE("unglue of a glued constant with zero antigluing returns the constant") {
        auto c = from_line(sp, [](double) { return 3.0; });
        auto z = GridFunction::zero(sp, 1);
        // (c, 0) as (glued, antiglued): the unique preimage is h = k = c... up
        // to the 2x2 algebra at every node.
        auto back = total_unglue(c, z, 5.0);
        double b0 = beta(0.0 - 2.5);
        double det = b0 * b0 + (1 - b0) * (1 - b0);
        (void)det;
        for (int i = 0; i < sp.n_s(); ++i) {
            double s = sp.s_coord(i);
            double b = beta(s - 2.5);
            double expect_h = 3.0 * b / (b * b + (1 - b) * (1 - b));
            CHECK(back.h.values()(i, 0) == doctest::Approx(expect_h).epsilon(1e-12));
        }
    }

    SUBCASE("nontrivial kernel of the gluing for finite R") {
        auto w = random_decaying(sp, rng);
        auto z = GridFunction::zero(sp, 1);
        w.set_asymptotics(scalar(0.0), scalar(0.0));
        auto pair = total_unglue(z, w, 4.0);
        auto forward = total_glue(pair.h, pair.k, 4.0, ShiftMode::Rounded, 1e9);
        CHECK(forward.glued.values().lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK(scspace::level_norm(pair.h, 0) + scspace::level_norm(pair.k, 0) > 1e-3);
    }
}

TEST_CASE("splicing projection") {
    auto sp = line_space();
    SplicingKernel kernel{SpliceVariant::MorseLine, Cutoff::standard(),
                          GluingProfile::logarithmic(), sp};
    std::mt19937_64 rng(77);

    SUBCASE("r = 0 is the identity") {
        auto e = PairField{random_decaying(sp, rng), random_decaying(sp, rng)};
        auto p = splicing_projection(kernel, 0.0, e);
        CHECK((p.h.values() - e.h.values()).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK((p.k.values() - e.k.values()).lpNorm<Eigen::Infinity>() == 0.0);
    }

    SUBCASE("idempotent to 1e-9 across the parameter range") {
        double worst = 0.0;
        for (int ri = 1; ri <= 9; ++ri) {
            double r = 0.1 * ri;
            for (int trial = 0; trial < 12; ++trial) {
                auto e = PairField{random_decaying(sp, rng), random_decaying(sp, rng)};
                auto p1 = splicing_projection(kernel, r, e);
                auto p2 = splicing_projection(kernel, r, p1);
                worst = std::max(worst,
                                 (p1.h.values() - p2.h.values()).lpNorm<Eigen::Infinity>());
                worst = std::max(worst,
                                 (p1.k.values() - p2.k.values()).lpNorm<Eigen::Infinity>());
            }
        }
        CHECK(worst <= 1e-9);
    }

    SUBCASE("fixes elements of its range and kills ker(glue)") {
        double r = 0.3;
        auto e = PairField{random_decaying(sp, rng), random_decaying(sp, rng)};
        auto p = splicing_projection(kernel, r, e);
        CHECK(splicing_core_contains(kernel, r, p, 1e-8));
        CHECK(splicing_core_contains(kernel, r, PairField{GridFunction::zero(sp, 1),
                                                          GridFunction::zero(sp, 1)},
                                     1e-12));
        // an element of ker(glue) built by inverting (0, w)
        auto w = random_decaying(sp, rng);
        w.set_asymptotics(scalar(0.0), scalar(0.0));
        double R = line_projection_info(sp, kernel.profile, r).effective_length;
        auto kerel = total_unglue(GridFunction::zero(sp, 1), w, R);
        CHECK_FALSE(splicing_core_contains(kernel, r, kerel, 1e-6));
        // at r = 0 every element lies in the core
        CHECK(splicing_core_contains(kernel, 0.0, kerel, 1e-12));
        CHECK(splicing_core_contains(kernel, 0.0, e, 1e-12));
    }

    SUBCASE("rank bookkeeping on a coarse grid") {
        auto coarse = make_scale_space(DomainSpec::line(4.0, 0.5), 0, {0.0, 1.0}, 1);
        for (double r : {0.2, 0.5, 0.8}) {
            MatrixXd P = line_projection_matrix(coarse, GluingProfile::logarithmic(), r);
            const int dim = P.rows();
            MatrixXd I = MatrixXd::Identity(dim, dim);
            Eigen::FullPivLU<MatrixXd> lu_p(P), lu_q(I - P);
            lu_p.setThreshold(1e-8);
            lu_q.setThreshold(1e-8);
            CHECK(lu_p.rank() + lu_q.rank() == dim);
            CHECK((P * P - P).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }

    SUBCASE("parameter domain errors") {
        auto e = PairField{GridFunction::zero(sp, 1), GridFunction::zero(sp, 1)};
        CHECK_THROWS_AS(splicing_projection(kernel, 1.0, e), DomainError);
        CHECK_THROWS_AS(splicing_projection(kernel, -0.1, e), DomainError);
    }
}

TEST_CASE("cylinder gluing") {
    const int nt = 16;
    const double h = 0.125;
    auto plus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(0.0, 6.0, h, nt), 0, {0.0, 1.0}, 1);
    auto minus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(-6.0, 0.0, h, nt), 0, {0.0, 1.0}, 1);
    auto expo = GluingProfile::exponential();

    auto mk = [&](const ScaleSpace& sp, const std::function<double(double, double)>& f,
                  double al, double ar) {
        auto g = GridFunction::from_cylinder(
            sp,
            [&](double s, double t) {
                VectorXd v(1);
                v << f(s, t);
                return v;
            },
            1);
        g.set_asymptotics(scalar(al), scalar(ar));
        return g;
    };

    SUBCASE("a = 0 returns the pair unchanged") {
        CylinderPair u{mk(plus, [](double, double) { return 1.0; }, 1.0, 1.0),
                       mk(minus, [](double, double) { return 1.0; }, 1.0, 1.0)};
        auto g = glue_cylinder(u, 0.0, expo);
        CHECK(g.noded);
        REQUIRE(g.pair.has_value());
        CHECK((g.pair->plus.values() - u.plus.values()).lpNorm<Eigen::Infinity>() == 0.0);
    }

    SUBCASE("constants glue to the constant") {
        CylinderPair u{mk(plus, [](double, double) { return 2.5; }, 2.5, 2.5),
                       mk(minus, [](double, double) { return 2.5; }, 2.5, 2.5)};
        auto g = glue_cylinder(u, std::complex<double>(0.5, 0.0), expo);
        REQUIRE(g.glued.has_value());
        CHECK((g.glued->values().array() - 2.5).abs().maxCoeff() < 1e-13);
    }

    SUBCASE("closed-form reference at |a| = 0.5") {
        auto f = [](double s, double t) {
            return std::exp(-s) * std::cos(2.0 * std::numbers::pi * t);
        };
        CylinderPair u{mk(plus, f, f(0, 0), 0.0), mk(minus, [](double, double) { return 0.0; },
                                                     0.0, 0.0)};
        u.plus.set_asymptotics(scalar(0.0), scalar(0.0));
        auto g = glue_cylinder(u, std::complex<double>(0.5, 0.0), expo);
        REQUIRE(g.glued.has_value());
        double R = g.datum.R;
        CHECK(R == doctest::Approx(std::exp(2.0) - std::numbers::e).epsilon(0.05));
        const auto& gs = g.glued->space();
        for (int i = 0; i < gs.n_s(); ++i)
            for (int j = 0; j < gs.n_t(); ++j) {
                double s = gs.s_coord(i), t = gs.t_coord(j);
                double expect = beta(s - R / 2.0) * f(s, t);
                CHECK(g.glued->values()(gs.node_index(i, j), 0) ==
                      doctest::Approx(expect).epsilon(1e-10));
            }
    }

    SUBCASE("modulus above 1/2 is rejected") {
        CylinderPair u{mk(plus, [](double, double) { return 0.0; }, 0.0, 0.0),
                       mk(minus, [](double, double) { return 0.0; }, 0.0, 0.0)};
        CHECK_THROWS_AS(glue_cylinder(u, std::complex<double>(0.7, 0.0), expo),
                        ParameterOutOfRangeError);
    }
}

TEST_CASE("cylinder anti-gluing") {
    const int nt = 16;
    const double h = 0.125;
    auto plus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(0.0, 6.0, h, nt), 0, {0.0, 1.0}, 1);
    auto minus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(-6.0, 0.0, h, nt), 0, {0.0, 1.0}, 1);
    auto expo = GluingProfile::exponential();

    auto mk = [&](const ScaleSpace& sp, const std::function<double(double, double)>& f,
                  double al, double ar) {
        auto g = GridFunction::from_cylinder(
            sp,
            [&](double s, double t) {
                VectorXd v(1);
                v << f(s, t);
                return v;
            },
            1);
        g.set_asymptotics(scalar(al), scalar(ar));
        return g;
    };

    SUBCASE("equal constants annihilate") {
        CylinderPair hh{mk(plus, [](double, double) { return 1.3; }, 1.3, 1.3),
                        mk(minus, [](double, double) { return 1.3; }, 1.3, 1.3)};
        auto a = antiglue_cylinder(hh, std::complex<double>(0.4, 0.1), expo);
        REQUIRE(a.anti.has_value());
        CHECK(a.average(0) == doctest::Approx(1.3).epsilon(1e-12));
        CHECK(a.anti->values().lpNorm<Eigen::Infinity>() < 1e-12);
    }

    SUBCASE("a = 0 gives zero") {
        CylinderPair hh{mk(plus, [](double s, double t) { return s + t; }, 0.0, 0.0),
                        mk(minus, [](double s, double t) { return s - t; }, 0.0, 0.0)};
        auto a = antiglue_cylinder(hh, 0.0, expo, 1e9);
        CHECK(a.zero);
    }

    SUBCASE("antipodal relation at the two ends") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> amp(-1.0, 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            double c = amp(rng);
            double a1 = amp(rng), a2 = amp(rng);
            CylinderPair hh{
                mk(plus,
                   [&](double s, double t) {
                       return c + a1 * std::exp(-s) * std::sin(2.0 * std::numbers::pi * t);
                   },
                   0.0, c),
                mk(minus,
                   [&](double s, double t) {
                       return c + a2 * std::exp(s) * std::cos(2.0 * std::numbers::pi * t);
                   },
                   c, 0.0)};
            hh.plus.set_asymptotics(scalar(c), scalar(c));
            hh.minus.set_asymptotics(scalar(c), scalar(c));
            auto a = antiglue_cylinder(hh, std::complex<double>(0.35, 0.2), expo);
            CHECK((a.end_x + a.end_y).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }
}

TEST_CASE("cylinder total gluing round-trips with the average correction") {
    const int nt = 16;
    const double h = 0.125;
    auto plus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(0.0, 6.0, h, nt), 0, {0.0, 1.0}, 1);
    auto minus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(-6.0, 0.0, h, nt), 0, {0.0, 1.0}, 1);
    // reciprocal profile keeps the glued window inside the half-windows
    auto prof = GluingProfile::reciprocal();
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);

    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        double c = amp(rng);
        double a1 = amp(rng), b1 = amp(rng), a2 = amp(rng), b2 = amp(rng);
        auto fp = [&](double s, double t) {
            return c + a1 * std::exp(-0.8 * s) * std::sin(2.0 * std::numbers::pi * t) +
                   b1 * std::exp(-s) * std::cos(4.0 * std::numbers::pi * t);
        };
        auto fm = [&](double s, double t) {
            return c + a2 * std::exp(0.9 * s) * std::sin(2.0 * std::numbers::pi * t) +
                   b2 * std::exp(s) * std::cos(2.0 * std::numbers::pi * t);
        };
        CylinderPair pr{GridFunction::from_cylinder(
                            plus,
                            [&](double s, double t) {
                                VectorXd v(1);
                                v << fp(s, t);
                                return v;
                            },
                            1),
                        GridFunction::from_cylinder(
                            minus,
                            [&](double s, double t) {
                                VectorXd v(1);
                                v << fm(s, t);
                                return v;
                            },
                            1)};
        pr.plus.set_asymptotics(scalar(c), scalar(c));
        pr.minus.set_asymptotics(scalar(c), scalar(c));

        // |a| = 0.25 -> R = 3, grid aligned; theta = 4/16 aligned.
        std::complex<double> a = std::polar(0.25, -2.0 * std::numbers::pi * 0.25);
        auto g = glue_cylinder(pr, a, prof);
        auto w = antiglue_cylinder(pr, a, prof);
        REQUIRE(g.glued.has_value());
        REQUIRE(w.anti.has_value());
        auto back = total_unglue_cylinder(*g.glued, *w.anti, g.datum, plus, minus);

        // overlap region: plus nodes with s <= R, minus nodes with s >= -R
        int nR = static_cast<int>(std::lround(g.datum.R / h));
        for (int i = 0; i <= nR; ++i)
            for (int j = 0; j < nt; ++j) {
                worst = std::max(worst, std::abs(back.plus.values()(plus.node_index(i, j), 0) -
                                                 pr.plus.values()(plus.node_index(i, j), 0)));
                int im = minus.n_s() - 1 - i;
                worst = std::max(worst, std::abs(back.minus.values()(minus.node_index(im, j), 0) -
                                                 pr.minus.values()(minus.node_index(im, j), 0)));
            }
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("cylinder projection is idempotent and the identity at a = 0") {
    const int nt = 16;
    const double h = 0.125;
    auto plus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(0.0, 6.0, h, nt), 0, {0.0, 1.0}, 1);
    auto minus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(-6.0, 0.0, h, nt), 0, {0.0, 1.0}, 1);
    auto prof = GluingProfile::reciprocal();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);

    double c = 0.4;
    CylinderPair pr{GridFunction::from_cylinder(
                        plus,
                        [&](double s, double t) {
                            VectorXd v(1);
                            v << c + amp(rng) * std::exp(-s) *
                                         std::sin(2.0 * std::numbers::pi * t);
                            return v;
                        },
                        1),
                    GridFunction::from_cylinder(
                        minus,
                        [&](double s, double t) {
                            VectorXd v(1);
                            v << c + amp(rng) * std::exp(s) *
                                         std::cos(2.0 * std::numbers::pi * t);
                            return v;
                        },
                        1)};
    pr.plus.set_asymptotics(scalar(c), scalar(c));
    pr.minus.set_asymptotics(scalar(c), scalar(c));

    auto id = splicing_projection_cylinder(pr, 0.0, prof);
    CHECK((id.plus.values() - pr.plus.values()).lpNorm<Eigen::Infinity>() == 0.0);

    std::complex<double> a = std::polar(0.25, -2.0 * std::numbers::pi * 0.125);
    auto p1 = splicing_projection_cylinder(pr, a, prof);
    auto p2 = splicing_projection_cylinder(p1, a, prof);
    CHECK((p1.plus.values() - p2.plus.values()).lpNorm<Eigen::Infinity>() < 1e-10);
    CHECK((p1.minus.values() - p2.minus.values()).lpNorm<Eigen::Infinity>() < 1e-10);
}
