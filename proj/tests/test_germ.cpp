#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "scfred/errors.hpp"
#include "scfred/germ.hpp"

using namespace scfred;
using namespace scfred::germ;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec1(double x) {
    VectorXd v(1);
    v << x;
    return v;
}

ContractionGerm linear_germ() {
    return make_contraction_germ(
        1, 0, 1,
        [](const VectorXd& v, const VectorXd& u, int) { return (0.5 * u + v).eval(); },
        {0.5, 0.5, 0.5});
}

ContractionGerm sine_germ() {
    return make_contraction_germ(
        1, 0, 1,
        [](const VectorXd& v, const VectorXd& u, int) {
            VectorXd out(1);
            out << v(0) + 0.3 * std::sin(u(0));
            return out;
        },
        {0.31, 0.31});
}

// High-precision oracle for u = v + 0.3 sin(u) by Newton iteration.
double sine_fixed_point(double v) {
    double u = v;
    for (int it = 0; it < 100; ++it) {
        double f = u - v - 0.3 * std::sin(u);
        double fp = 1.0 - 0.3 * std::cos(u);
        double step = f / fp;
        u -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return u;
}

}  // namespace

TEST_CASE("linear germ: exact fixed point and rate 1/2") {
    auto g = linear_germ();
    for (double v : {0.25, -0.125, 0.4}) {
        auto res = solve_germ(g, vec1(v), 0, 1e-15, 400);
        CHECK(std::abs(res.u(0) - 2.0 * v) <= 1e-14 * std::max(1.0, std::abs(v)));
        CHECK(res.observed_rate == doctest::Approx(0.5).epsilon(1e-3));
        CHECK(res.observed_rate <= 0.5 + 0.05);
    }
    // geometric decay of the residual log
    auto res = solve_germ(g, vec1(0.3), 1, 1e-12, 200);
    for (size_t i = 1; i < res.residuals.size(); ++i)
        if (res.residuals[i] > 1e-12)
            CHECK(res.residuals[i] / res.residuals[i - 1] <= 0.5 + 1e-3);
}

TEST_CASE("germ anchored at zero: delta(0) = 0") {
    auto g = sine_germ();
    auto res = solve_germ(g, vec1(0.0), 0, 1e-15, 200);
    CHECK(res.u.norm() == 0.0);  // iteration starts at 0 and stays
}

TEST_CASE("sine germ matches the scalar Newton oracle to 1e-12") {
    auto g = sine_germ();
    for (double v : {0.05, -0.21, 0.37, 0.49}) {
        auto res = solve_germ(g, vec1(v), 0, 1e-14, 500);
        CHECK(std::abs(res.u(0) - sine_fixed_point(v)) <= 1e-12);
        CHECK(res.observed_rate <= 0.31 + 0.05);
    }
}

TEST_CASE("expansion and non-convergence are reported") {
    // |dB/du| = 1.5 > 1: the factory's sampled check must refuse it.
    CHECK_THROWS_AS(
        make_contraction_germ(
            1, 0, 1,
            [](const VectorXd& v, const VectorXd& u, int) { return (v + 1.5 * u).eval(); },
            {0.5}),
        NotAContractionError);

    // bypass the factory to exercise the in-solve expansion guard
    ContractionGerm bad;
    bad.param_dim = 1;
    bad.cone_dim = 0;
    bad.u_dim = 1;
    bad.theta = {0.5};
    bad.trust_radii = {1.0};
    bad.B = [](const VectorXd& v, const VectorXd& u, int) { return (v + 1.5 * u).eval(); };
    CHECK_THROWS_AS(solve_germ(bad, vec1(0.2), 0, 1e-12, 500), NotAContractionError);

    ContractionGerm slow;
    slow.param_dim = 1;
    slow.cone_dim = 0;
    slow.u_dim = 1;
    slow.theta = {0.999};
    slow.trust_radii = {1.0};
    slow.B = [](const VectorXd& v, const VectorXd& u, int) { return (v + 0.999 * u).eval(); };
    CHECK_THROWS_AS(solve_germ(slow, vec1(0.5), 0, 1e-14, 10), ConvergenceFailureError);
    try {
        solve_germ(slow, vec1(0.5), 0, 1e-14, 10);
    } catch (const ConvergenceFailureError& e) {
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("cone parameters must stay nonnegative") {
    auto g = make_contraction_germ(
        1, 1, 1,
        [](const VectorXd& v, const VectorXd& u, int) { return (0.5 * u + v).eval(); }, {0.5});
    CHECK_NOTHROW(solve_germ(g, vec1(0.25), 0, 1e-12, 200));
    CHECK_THROWS_AS(solve_germ(g, vec1(-0.25), 0, 1e-12, 200), DomainError);
}

TEST_CASE("smoothness diagnostic") {
    std::vector<double> steps = {0.04, 0.02, 0.01, 0.005};

    SUBCASE("linear germ: second differences vanish") {
        SolutionGerm delta(linear_germ(), 0, 1e-15, 400);
        auto rep = germ_smoothness_diagnostic(delta, vec1(0.1), vec1(1.0), 2, steps);
        REQUIRE(rep.sweeps.size() == 2);
        for (double n : rep.sweeps[1].estimate_norms) CHECK(n < 1e-9);
        CHECK(std::abs(rep.sweeps[0].estimates.back()(0) - 2.0) < 1e-9);
        CHECK(rep.pass);
    }

    SUBCASE("sine germ: derivative matches the implicit formula") {
        SolutionGerm delta(sine_germ(), 0, 1e-14, 500);
        auto rep = germ_smoothness_diagnostic(delta, vec1(0.2), vec1(1.0), 2, steps);
        double d = sine_fixed_point(0.2);
        double expect = 1.0 / (1.0 - 0.3 * std::cos(d));
        CHECK(rep.sweeps[0].estimates.back()(0) == doctest::Approx(expect).epsilon(2e-5));
        // centered differences converge at second order
        CHECK(rep.sweeps[0].observed_order > 1.7);
        CHECK(rep.sweeps[0].observed_order < 2.3);
        CHECK(rep.sweeps[0].stabilized);
    }
}

TEST_CASE("Morse filler") {
    using scspace::DomainSpec;
    using scspace::make_scale_space;

    SUBCASE("identity Hessian annihilates e^s pointwise") {
        auto sp = make_scale_space(DomainSpec::line(3.0, 0.05), 0, {0.0, 0.5}, 1);
        MatrixXd H = MatrixXd::Identity(1, 1);
        MorseFiller filler(H, sp);
        MatrixXd vals(sp.n_s(), 1);
        for (int i = 0; i < sp.n_s(); ++i) vals(i, 0) = std::exp(sp.s_coord(i));
        MatrixXd r = filler.apply_interior(vals);
        // relative residual per row is O(h^2)
        for (int i = 0; i < r.rows(); ++i) {
            double scale = std::exp(0.5 * (sp.s_coord(i) + sp.s_coord(i + 1)));
            CHECK(std::abs(r(i, 0)) / scale < 1e-3);
        }
    }

    SUBCASE("zero section maps to zero") {
        auto sp = make_scale_space(DomainSpec::line(3.0, 0.1), 0, {0.0, 0.5}, 1);
        MorseFiller filler(-MatrixXd::Identity(1, 1), sp);
        MatrixXd z = MatrixXd::Zero(sp.n_s(), 1);
        CHECK(filler.apply_interior(z).lpNorm<Eigen::Infinity>() == 0.0);
    }

    SUBCASE("random hyperbolic Hessians give a bounded-below weighted minimum") {
        auto sp = make_scale_space(DomainSpec::line(6.0, 0.2), 0, {0.0, 0.4}, 2);
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> mag(0.7, 2.0);
        for (int trial = 0; trial < 5; ++trial) {
            // random orthogonal conjugation of a split spectrum
            double ang = std::uniform_real_distribution<double>(0.0, 3.1)(rng);
            MatrixXd Q(2, 2);
            Q << std::cos(ang), -std::sin(ang), std::sin(ang), std::cos(ang);
            MatrixXd D = MatrixXd::Zero(2, 2);
            D(0, 0) = mag(rng);
            D(1, 1) = -mag(rng);
            MatrixXd H = Q * D * Q.transpose();
            MorseFiller filler(H, sp);
            double smin = filler.weighted_min_singular_value(0.4);
            CHECK(smin > 0.05);
        }
    }

    SUBCASE("near-singular Hessian is rejected") {
        auto sp = make_scale_space(DomainSpec::line(3.0, 0.1), 0, {0.0, 0.5}, 1);
        MatrixXd H = MatrixXd::Zero(1, 1);
        H(0, 0) = 1e-12;
        CHECK_THROWS_AS(MorseFiller(H, sp), DegenerateCriticalPointError);
    }
}

TEST_CASE("filled sections do not change the zero set") {
    // Fiber R^3; the core is spanned by e1, e2 rotated by the parameter, the
    // complement by the remaining direction. The base section vanishes iff
    // the core part matches a target depending on v.
    const int d = 3;
    auto rot = [](double v) {
        MatrixXd Q = MatrixXd::Identity(3, 3);
        Q(0, 0) = std::cos(v);
        Q(0, 2) = -std::sin(v);
        Q(2, 0) = std::sin(v);
        Q(2, 2) = std::cos(v);
        return Q;
    };
    FilledSection fs;
    fs.param_dim = 1;
    fs.fiber_dim = d;
    fs.proj0 = [rot](const VectorXd& v) {
        MatrixXd P0 = MatrixXd::Zero(3, 3);
        P0(0, 0) = P0(1, 1) = 1.0;
        MatrixXd Q = rot(v(0));
        return (Q * P0 * Q.transpose()).eval();
    };
    fs.proj1 = fs.proj0;
    fs.base = [rot](const VectorXd& v, const VectorXd& u_core) {
        // vanishes iff u_core equals v * (first core direction)
        MatrixXd Q = rot(v(0));
        VectorXd target = Q.col(0) * v(0);
        return (u_core - target).eval();
    };
    fs.filler = [rot](const VectorXd& v, const VectorXd&, const VectorXd& u_comp) {
        return ((2.0 + std::sin(v(0))) * u_comp).eval();
    };

    SUBCASE("filler block is a linear isomorphism across the parameter range") {
        for (double v = -1.0; v <= 1.0; v += 0.1)
            CHECK(fs.filler_min_singular_value(vec1(v)) > 1.0);
    }

    SUBCASE("zero-set equivalence on constructed samples") {
        std::vector<std::pair<VectorXd, VectorXd>> samples;
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        for (int i = 0; i < 30; ++i) {
            double v = unit(rng);
            MatrixXd Q = rot(v);
            VectorXd u;
            if (i % 3 == 0) {
                u = Q.col(0) * v;  // exact solution in the core
            } else if (i % 3 == 1) {
                u = Q.col(0) * v + Q.col(2) * unit(rng);  // complement noise
            } else {
                VectorXd w(3);
                w << unit(rng), unit(rng), unit(rng);
                u = w;
            }
            samples.emplace_back(vec1(v), u);
        }
        auto rep = filled_zero_set_check(fs, samples);
        CHECK(rep.pass);
        int solutions = 0;
        for (const auto& row : rep.rows)
            if (row.filled_zero) {
                ++solutions;
                CHECK(row.complement_norm <= 1e-9);
                CHECK(row.base_norm <= 1e-9);
            }
        CHECK(solutions == 10);

        // samples with nonzero complement part are never classified solutions
        for (const auto& row : rep.rows)
            if (row.complement_norm > 1e-6) CHECK_FALSE(row.filled_zero);
    }

    SUBCASE("zero sample is a solution when the base target vanishes") {
        auto rep = filled_zero_set_check(fs, {{vec1(0.0), VectorXd::Zero(3)}});
        CHECK(rep.rows[0].filled_zero);
        CHECK(rep.pass);
    }
}
