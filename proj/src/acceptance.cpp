#include "scfred/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "scfred/algebra.hpp"
#include "scfred/degen.hpp"
#include "scfred/errors.hpp"
#include "scfred/germ.hpp"
#include "scfred/morse.hpp"
#include "scfred/scspace.hpp"
#include "scfred/sftsym.hpp"
#include "scfred/splicing.hpp"

namespace scfred::acceptance {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using scspace::DomainSpec;
using scspace::GridFunction;
using scspace::ScaleSpace;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << "FAILED: " << what << "; ";
        }
    }
    void note(const std::string& what) { detail << what << "; "; }
};

VectorXd vec1(double x) {
    VectorXd v(1);
    v << x;
    return v;
}

GridFunction random_decaying(const ScaleSpace& sp, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    double a0 = amp(rng), a1 = amp(rng), a2 = amp(rng), ph = amp(rng);
    auto g = GridFunction::from_line(
        sp,
        [&](double s) {
            VectorXd v(1);
            v << a0 * std::exp(-0.1 * s * s) +
                     a1 * std::tanh(s + ph) * std::exp(-0.05 * s * s) +
                     a2 * std::sin(0.7 * s) * std::exp(-0.2 * s * s);
            return v;
        },
        1);
    g.set_asymptotics(vec1(g.values()(0, 0)), vec1(g.values()(g.values().rows() - 1, 0)));
    return g;
}

CriterionResult criterion_1(unsigned seed) {
    Check c;
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> ss(-5.0, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double s = ss(rng);
        worst = std::max(worst, std::abs(splicing::beta(s) + splicing::beta(-s) - 1.0));
    }
    c.require(worst <= 1e-12, "cutoff identity within 1e-12");
    c.note("max |beta(s)+beta(-s)-1| = " + std::to_string(worst));

    auto expo = splicing::GluingProfile::exponential();
    auto loga = splicing::GluingProfile::logarithmic();
    c.require(std::abs(splicing::profile_length(expo, 1.0)) <= 1e-12, "phi_exp(1) = 0");
    // e^(1/r) leaves the double range below r = 1/709, so the sampled grid
    // covers the representable part of (0, 1].
    double worst_rt = 0.0;
    for (int i = 0; i < 1000; ++i) {
        double r = 1.0 / 700.0 + (1.0 - 1.0 / 700.0) * i / 999.0;
        worst_rt = std::max(worst_rt,
                            std::abs(splicing::profile_parameter(
                                         expo, splicing::profile_length(expo, r)) -
                                     r));
        worst_rt = std::max(worst_rt,
                            std::abs(splicing::profile_parameter(
                                         loga, splicing::profile_length(loga, r)) -
                                     r));
    }
    c.require(worst_rt <= 1e-10, "profile round trip within 1e-10");
    return {1, "cutoff and profile identities", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_2(unsigned seed) {
    Check c;
    std::mt19937_64 rng(seed + 2);
    // line variant
    auto sp = scspace::make_scale_space(DomainSpec::line(10.0, 0.1), 0, {0.0, 0.5}, 1);
    const double R = 4.0;
    const int shift = 40;
    double worst = 0.0, min_det = 1.0;
    for (int trial = 0; trial < 200; ++trial) {
        auto h = random_decaying(sp, rng);
        auto k = random_decaying(sp, rng);
        VectorXd shared = 0.5 * (h.asym_right() + k.asym_left());
        h.set_asymptotics(h.asym_left(), shared);
        k.set_asymptotics(shared, k.asym_right());
        auto pair = splicing::total_glue(h, k, R);
        min_det = std::min(min_det, pair.min_determinant);
        auto back = splicing::total_unglue(pair.glued, pair.antiglued, R);
        worst = std::max(worst, (back.h.values() - h.values()).lpNorm<Eigen::Infinity>());
        for (int j = 0; j < sp.n_s() - shift; ++j)
            worst = std::max(worst, std::abs(back.k.values()(j, 0) - k.values()(j, 0)));
    }
    c.require(worst <= 1e-10, "line round trip within 1e-10");
    c.require(min_det >= 0.5 - 1e-12, "pointwise determinant >= 1/2");
    c.note("line max error " + std::to_string(worst) + ", min det " + std::to_string(min_det));

    // cylinder variant with the average correction
    const int nt = 16;
    const double hs = 0.125;
    auto plus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(0.0, 6.0, hs, nt), 0, {0.0, 1.0}, 1);
    auto minus = scspace::make_scale_space_unchecked(
        DomainSpec::cylinder_window(-6.0, 0.0, hs, nt), 0, {0.0, 1.0}, 1);
    auto prof = splicing::GluingProfile::reciprocal();
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    double worst_cyl = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        double cc = amp(rng), a1 = amp(rng), a2 = amp(rng), b1 = amp(rng), b2 = amp(rng);
        splicing::CylinderPair pr{
            GridFunction::from_cylinder(
                plus,
                [&](double s, double t) {
                    VectorXd v(1);
                    v << cc + a1 * std::exp(-0.8 * s) * std::sin(2.0 * std::numbers::pi * t) +
                             b1 * std::exp(-s) * std::cos(4.0 * std::numbers::pi * t);
                    return v;
                },
                1),
            GridFunction::from_cylinder(
                minus,
                [&](double s, double t) {
                    VectorXd v(1);
                    v << cc + a2 * std::exp(0.9 * s) * std::sin(2.0 * std::numbers::pi * t) +
                             b2 * std::exp(s) * std::cos(2.0 * std::numbers::pi * t);
                    return v;
                },
                1)};
        pr.plus.set_asymptotics(vec1(cc), vec1(cc));
        pr.minus.set_asymptotics(vec1(cc), vec1(cc));
        std::complex<double> a = std::polar(0.25, -2.0 * std::numbers::pi * 0.25);
        auto g = splicing::glue_cylinder(pr, a, prof);
        auto w = splicing::antiglue_cylinder(pr, a, prof);
        auto back = splicing::total_unglue_cylinder(*g.glued, *w.anti, g.datum, plus, minus);
        int nR = static_cast<int>(std::lround(g.datum.R / hs));
        for (int i = 0; i <= nR; ++i)
            for (int j = 0; j < nt; ++j) {
                worst_cyl = std::max(
                    worst_cyl, std::abs(back.plus.values()(plus.node_index(i, j), 0) -
                                        pr.plus.values()(plus.node_index(i, j), 0)));
                int im = minus.n_s() - 1 - i;
                worst_cyl = std::max(
                    worst_cyl, std::abs(back.minus.values()(minus.node_index(im, j), 0) -
                                        pr.minus.values()(minus.node_index(im, j), 0)));
            }
    }
    c.require(worst_cyl <= 1e-10, "cylinder round trip within 1e-10");
    c.note("cylinder max error " + std::to_string(worst_cyl));
    return {2, "total gluing invertibility", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_3(unsigned seed) {
    Check c;
    std::mt19937_64 rng(seed + 3);
    auto sp = scspace::make_scale_space(DomainSpec::line(10.0, 0.1), 0, {0.0, 0.5}, 1);
    splicing::SplicingKernel kernel{splicing::SpliceVariant::MorseLine,
                                    splicing::Cutoff::standard(),
                                    splicing::GluingProfile::logarithmic(), sp};
    double worst = 0.0;
    for (int ri = 1; ri <= 9; ++ri) {
        double r = 0.1 * ri;
        for (int trial = 0; trial < 100; ++trial) {
            splicing::PairField e{random_decaying(sp, rng), random_decaying(sp, rng)};
            auto p1 = splicing_projection(kernel, r, e);
            auto p2 = splicing_projection(kernel, r, p1);
            worst = std::max(worst, (p1.h.values() - p2.h.values()).lpNorm<Eigen::Infinity>());
            worst = std::max(worst, (p1.k.values() - p2.k.values()).lpNorm<Eigen::Infinity>());
        }
    }
    c.require(worst <= 1e-9, "idempotence within 1e-9");
    c.note("max |pi(pi(e)) - pi(e)| = " + std::to_string(worst));

    splicing::PairField e{random_decaying(sp, rng), random_decaying(sp, rng)};
    auto p0 = splicing_projection(kernel, 0.0, e);
    c.require((p0.h.values() - e.h.values()).lpNorm<Eigen::Infinity>() == 0.0 &&
                  (p0.k.values() - e.k.values()).lpNorm<Eigen::Infinity>() == 0.0,
              "pi_0 is the identity");

    auto coarse = scspace::make_scale_space(DomainSpec::line(4.0, 0.5), 0, {0.0, 1.0}, 1);
    bool ranks_ok = true;
    for (double r : {0.2, 0.5, 0.8}) {
        MatrixXd P =
            splicing::line_projection_matrix(coarse, splicing::GluingProfile::logarithmic(), r);
        const int dim = static_cast<int>(P.rows());
        Eigen::FullPivLU<MatrixXd> lu_p(P),
            lu_q(MatrixXd::Identity(dim, dim) - P);
        lu_p.setThreshold(1e-8);
        lu_q.setThreshold(1e-8);
        ranks_ok = ranks_ok && (lu_p.rank() + lu_q.rank() == dim);
    }
    c.require(ranks_ok, "rank(pi) + rank(1 - pi) = dim");
    return {3, "splicing projection", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_4(unsigned) {
    Check c;
    auto linear = germ::make_contraction_germ(
        1, 0, 1,
        [](const VectorXd& v, const VectorXd& u, int) { return (0.5 * u + v).eval(); },
        {0.5, 0.5});
    double worst_lin = 0.0, worst_rate = 0.0;
    for (double v : {0.25, -0.125, 0.4, 0.05}) {
        for (int level = 0; level < 2; ++level) {
            auto res = germ::solve_germ(linear, vec1(v), level, 1e-16, 400);
            worst_lin = std::max(worst_lin, std::abs(res.u(0) - 2.0 * v));
            worst_rate = std::max(worst_rate, res.observed_rate - 0.5);
        }
    }
    c.require(worst_lin <= 2e-15, "linear germ recovers delta(v) = 2v to round-off");
    c.require(worst_rate <= 0.05, "observed rate within declared theta + 0.05");
    c.note("max |delta - 2v| = " + std::to_string(worst_lin));

    auto sine = germ::make_contraction_germ(
        1, 0, 1,
        [](const VectorXd& v, const VectorXd& u, int) {
            VectorXd out(1);
            out << v(0) + 0.3 * std::sin(u(0));
            return out;
        },
        {0.31, 0.31});
    double worst_sin = 0.0, worst_sin_rate = 0.0;
    for (double v : {0.05, -0.21, 0.37, 0.49}) {
        for (int level = 0; level < 2; ++level) {
            auto res = germ::solve_germ(sine, vec1(v), level, 1e-14, 500);
            // scalar Newton oracle
            double u = v;
            for (int it = 0; it < 100; ++it) {
                double f = u - v - 0.3 * std::sin(u);
                double fp = 1.0 - 0.3 * std::cos(u);
                double step = f / fp;
                u -= step;
                if (std::abs(step) < 1e-15) break;
            }
            worst_sin = std::max(worst_sin, std::abs(res.u(0) - u));
            worst_sin_rate = std::max(worst_sin_rate, res.observed_rate - 0.31);
        }
    }
    c.require(worst_sin <= 1e-12, "nonlinear germ matches the root-finding oracle to 1e-12");
    c.require(worst_sin_rate <= 0.05, "nonlinear rate within declared theta + 0.05");
    c.note("max |delta - oracle| = " + std::to_string(worst_sin));
    return {4, "contraction germ solver", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_5(unsigned) {
    Check c;
    auto p = morse::cubic_1d();
    morse::TrajectoryOptions opts;
    opts.L = 12.0;
    opts.h = 0.02;
    auto sp = morse::trajectory_space(p, opts);
    auto guess = GridFunction::from_line(
        sp,
        [](double s) {
            VectorXd v(1);
            v << std::tanh(0.7 * s) + 0.05 * std::exp(-s * s);
            return v;
        },
        1);
    guess.set_asymptotics(vec1(-1.0), vec1(1.0));
    auto traj = morse::solve_trajectory(p, vec1(-1.0), vec1(1.0), guess, opts);
    double worst = 0.0;
    for (int i = 0; i < sp.n_s(); ++i)
        worst = std::max(worst, std::abs(traj.u.values()(i, 0) - std::tanh(sp.s_coord(i))));
    c.require(worst <= 1e-8, "sup distance to tanh within 1e-8");
    c.note("sup |u - tanh| = " + std::to_string(worst));
    c.require(std::abs(traj.phase_value) <= 1e-9, "phase normalization at the midlevel");
    return {5, "Morse connecting orbit", c.ok, c.detail.str(), 0.0};
}

morse::EnumerationOptions suite_enum_options() {
    morse::EnumerationOptions opts;
    opts.trajectory.L = 12.0;
    opts.trajectory.h = 0.04;
    return opts;
}

CriterionResult criterion_6(unsigned) {
    Check c;
    auto dw = morse::double_well();
    morse::locate_critical_points(dw);
    auto counting = morse::counting_function(dw, suite_enum_options());
    auto lbl = degen::PairStructure::pair_label;
    c.require(counting.Q.value(lbl("p0", "p2")) == 1 && counting.Q.value(lbl("p1", "p2")) == 1,
              "Q(min1, saddle) = Q(min2, saddle) = 1");
    c.require(convolve(counting.Q, counting.Q).is_zero(), "Q * Q = 0 on the double well");
    c.require(!counting.transversality_warning, "no transversality warnings");

    auto chain = morse::chain_problem();
    morse::locate_critical_points(chain);
    auto chain_counting = morse::counting_function(chain, suite_enum_options());
    c.require(convolve(chain_counting.Q, chain_counting.Q).is_zero(), "Q * Q = 0 on the chain");
    auto elements = morse::solution_elements(chain_counting);
    degen::OperationTable table{chain_counting.pairs.structure};
    c.require(degen::master_equation_check(table, elements).pass,
              "master equation on the full solution set");
    c.note("solution set size " + std::to_string(elements.size()));
    bool deletions_fail = !elements.empty();
    for (size_t drop = 0; drop < elements.size(); ++drop) {
        std::vector<degen::Element> smaller;
        for (size_t i = 0; i < elements.size(); ++i)
            if (i != drop) smaller.push_back(elements[i]);
        deletions_fail = deletions_fail && !degen::master_equation_check(table, smaller).pass;
    }
    c.require(deletions_fail, "every single deletion breaks the master equation");
    return {6, "counting and master equation", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_7(unsigned) {
    Check c;
    auto dw = morse::double_well();
    morse::locate_critical_points(dw);
    auto counting = morse::counting_function(dw, suite_enum_options());
    std::vector<int> indices;
    for (const auto& label : counting.pairs.point_labels)
        indices.push_back(dw.point(label).index);
    auto complex = algebra::representation_complex(counting.pairs, counting.Q, indices);
    auto betti = algebra::homology_f2(complex);
    c.require(betti == std::vector<int>{1, 0}, "double well Betti (1, 0)");

    // hand-coded four-critical-point sphere datum
    auto ps = degen::value_order_structure({{"n", 0.0}, {"s", 1.0}, {"M1", 2.0}, {"M2", 2.5}});
    auto Q = algebra::CountingFunction::zeros(ps.structure, algebra::Ring::Z2);
    Q.set(degen::PairStructure::pair_label("s", "M1"), 1);
    Q.set(degen::PairStructure::pair_label("s", "M2"), 1);
    auto sphere = algebra::representation_complex(ps, Q, {0, 1, 2, 2});
    auto sphere_betti = algebra::homology_f2(sphere);
    c.require(sphere_betti == std::vector<int>{1, 0, 1}, "sphere datum Betti (1, 0, 1)");

    // independent simplicial oracle: the octahedron
    {
        std::vector<std::array<int, 2>> edges;
        std::vector<std::array<int, 3>> faces;
        for (int k = 0; k < 4; ++k) {
            int a = 1 + k, b = 1 + (k + 1) % 4;
            edges.push_back({0, a});
            edges.push_back({5, a});
            edges.push_back({a, b});
            faces.push_back({0, a, b});
            faces.push_back({5, a, b});
        }
        auto edge_index = [&](int a, int b) {
            for (size_t e = 0; e < edges.size(); ++e)
                if ((edges[e][0] == a && edges[e][1] == b) ||
                    (edges[e][0] == b && edges[e][1] == a))
                    return static_cast<int>(e);
            return -1;
        };
        algebra::MatrixXi d1 = algebra::MatrixXi::Zero(6, static_cast<int>(edges.size()));
        for (size_t e = 0; e < edges.size(); ++e) {
            d1(edges[e][0], static_cast<int>(e)) = 1;
            d1(edges[e][1], static_cast<int>(e)) = 1;
        }
        algebra::MatrixXi d2 =
            algebra::MatrixXi::Zero(static_cast<int>(edges.size()), static_cast<int>(faces.size()));
        for (size_t f = 0; f < faces.size(); ++f) {
            auto [a, b, cc] = faces[f];
            d2(edge_index(a, b), static_cast<int>(f)) = 1;
            d2(edge_index(b, cc), static_cast<int>(f)) = 1;
            d2(edge_index(a, cc), static_cast<int>(f)) = 1;
        }
        int r1 = algebra::gf2_rank(d1);
        int r2 = algebra::gf2_rank(d2);
        int b0 = 6 - r1;
        int b1 = static_cast<int>(edges.size()) - r1 - r2;
        int b2 = static_cast<int>(faces.size()) - r2;
        c.require(b0 == sphere_betti[0] && b1 == sphere_betti[1] && b2 == sphere_betti[2],
                  "sphere Betti matches the simplicial oracle");
    }

    // the height-function datum: one even generator with Q = 0
    degen::DegenerationStructure point;
    point.labels = {"*"};
    auto Qpt = algebra::CountingFunction::zeros(point, algebra::Ring::Z2);
    auto dq = algebra::dq_operator(Qpt);
    auto hom = algebra::dq_homology(dq, Qpt.parity);
    c.require(Qpt.is_zero() && hom.total == 1 && hom.even == 1,
              "height-function datum has Q = 0 and one even generator");
    return {7, "homology representations", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_8(unsigned) {
    Check c;
    auto chain_points = [](int n) {
        std::vector<std::pair<std::string, double>> pts;
        for (int i = 0; i < n; ++i)
            pts.emplace_back("c" + std::to_string(i), static_cast<double>(i));
        return pts;
    };
    const std::vector<long> expected = {1, 2, 6, 24, 120};
    bool counts_ok = true;
    for (int n = 1; n <= 5; ++n) {
        int k = n + 2;
        auto ps = degen::morse_structure(chain_points(k));
        std::string src = degen::PairStructure::pair_label("c0", "c" + std::to_string(k - 1));
        std::vector<std::string> target;
        for (int i = 0; i + 1 < k; ++i)
            target.push_back(degen::PairStructure::pair_label("c" + std::to_string(i),
                                                              "c" + std::to_string(i + 1)));
        counts_ok =
            counts_ok &&
            static_cast<long>(degen::enumerate_sequences(ps.structure, src, target).size()) ==
                expected[n - 1];
    }
    c.require(counts_ok, "sequence counts (1, 2, 6, 24, 120)");

    bool validations_ok = true;
    for (int n = 2; n <= 8; ++n)
        validations_ok =
            validations_ok && degen::validate_structure(degen::morse_structure(chain_points(n)).structure)
                                  .all_pass();
    c.require(validations_ok, "all axioms on Morse structures up to 8 points");

    auto cyc = degen::validate_structure(
        degen::DegenerationStructure::from_labels({"A", "B"}, {{"A", "B", "A"}}));
    c.require(!cyc.finiteness.pass && !cyc.finiteness.witnesses.empty(),
              "finiteness fixture fails with a witness");
    auto minimal = degen::validate_structure(degen::DegenerationStructure::from_labels(
        {"A", "B", "B2", "C"}, {{"A", "B", "C"}, {"A", "B2", "C"}}));
    c.require(!minimal.minimality.pass && !minimal.minimality.witnesses.empty(),
              "minimality fixture fails with a witness");
    auto assoc = degen::validate_structure(degen::DegenerationStructure::from_labels(
        {"Z", "A", "B", "I", "E"}, {{"A", "B", "Z"}, {"I", "E", "B"}}));
    c.require(!assoc.associativity.pass && !assoc.associativity.witnesses.empty(),
              "associativity fixture fails with a witness");
    return {8, "degeneration combinatorics", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_9(unsigned) {
    Check c;
    auto p = morse::chain_problem();
    morse::locate_critical_points(p);
    morse::EnumerationOptions eopts;
    eopts.trajectory.L = 14.0;
    eopts.trajectory.h = 0.04;
    auto left = morse::enumerate_trajectories_index1(p, "p0", "p2", eopts);
    auto right = morse::enumerate_trajectories_index1(p, "p2", "p3", eopts);
    if (left.orbits.size() != 1 || right.orbits.size() != 1) {
        c.require(false, "chain legs enumerate to single orbits");
        return {9, "pregluing convergence", c.ok, c.detail.str(), 0.0};
    }
    morse::BrokenTrajectory broken{{left.orbits[0], right.orbits[0]}};
    auto profile = splicing::GluingProfile::reciprocal();
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true, residual_ok = true;
    for (double r : {0.3, 0.2, 0.1}) {
        auto pg = morse::preglue_broken(p, broken, r, profile);
        auto corr = morse::correct_pregluing(p, broken, pg, r, profile);
        residual_ok = residual_ok && corr.residual <= 1e-9;
        monotone = monotone && corr.distance_to_broken < prev;
        c.note("r = " + std::to_string(r) + ": residual " + std::to_string(corr.residual) +
               ", distance " + std::to_string(corr.distance_to_broken));
        prev = corr.distance_to_broken;
    }
    c.require(residual_ok, "corrected residual within 1e-9 at each r");
    c.require(monotone, "shifted distance decreases monotonically");
    return {9, "pregluing convergence", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_10(unsigned seed) {
    Check c;
    sftsym::OrbitSymbolTable t;
    t.add({"a", 1, false, false});
    t.add({"b", 2, false, false});
    t.add({"c", 1, true, false});

    std::mt19937_64 rng(seed + 10);
    static const std::vector<std::string> orbits = {"a", "b", "c"};
    std::uniform_int_distribution<int> len(0, 8), pick(0, 2), kind(0, 1);
    bool confluent = true;
    for (int trial = 0; trial < 500; ++trial) {
        sftsym::SymbolWord w;
        int n = len(rng);
        for (int i = 0; i < n; ++i)
            w.letters.push_back({kind(rng) ? sftsym::Letter::Kind::P : sftsym::Letter::Kind::Q,
                                 orbits[pick(rng)]});
        auto ref = sftsym::normalize(t, w);
        confluent = confluent && sftsym::normalize(t, w, 1) == ref &&
                    sftsym::normalize(t, w, 2) == ref;
    }
    c.require(confluent, "confluence on 500 random words");

    sftsym::OrbitSymbolTable tk;
    tk.add({"g1", 1, false, false});
    tk.add({"g2", 2, false, false});
    tk.add({"g3", 3, false, false});
    bool contraction_ok = true;
    for (int k = 1; k <= 3; ++k) {
        std::string g = "g" + std::to_string(k);
        auto sum = sftsym::normalize(
            tk, sftsym::SymbolWord::p(g) * sftsym::SymbolWord::q(g));
        sftsym::StandardWord qp;
        qp.q_part = {{g, 1}};
        qp.p_part = {{g, 1}};
        sftsym::StandardWord hb;
        hb.hbar = 1;
        contraction_ok = contraction_ok && sum.terms().size() == 2 &&
                         sum.terms().at(qp) == 1 && sum.terms().at(hb) == k;
    }
    c.require(contraction_ok, "p q = q p + kappa hbar for kappa in {1,2,3}");

    bool assoc = true;
    for (int trial = 0; trial < 200; ++trial) {
        auto rand_word = [&]() {
            sftsym::SymbolWord w;
            int n = len(rng) / 2;
            for (int i = 0; i < n; ++i)
                w.letters.push_back(
                    {kind(rng) ? sftsym::Letter::Kind::P : sftsym::Letter::Kind::Q,
                     orbits[pick(rng)]});
            return sftsym::word_sum(t, w);
        };
        auto x = rand_word(), y = rand_word(), z = rand_word();
        assoc = assoc &&
                sftsym::multiply(t, sftsym::multiply(t, x, y), z) ==
                    sftsym::multiply(t, x, sftsym::multiply(t, y, z));
    }
    c.require(assoc, "multiplication associative on 200 random triples");

    sftsym::StandardWord q, pw, qp, hb;
    q.q_part = {{"a", 1}};
    pw.p_part = {{"a", 1}};
    qp.q_part = {{"a", 1}};
    qp.p_part = {{"a", 1}};
    hb.hbar = 1;
    auto induced = sftsym::induced_degeneration_structure(t, {q, pw, qp, hb});
    c.require(induced.report.all_pass(), "induced structure passes the validator");
    return {10, "symbol calculus", c.ok, c.detail.str(), 0.0};
}

CriterionResult criterion_11(unsigned) {
    Check c;
    auto sp = scspace::make_scale_space(DomainSpec::line(5.0, 0.5), 0, {0.0, 1.0}, 1);
    auto rep = scspace::embedding_diagnostic(sp, 0, 1, 21, 5e-3);
    bool decaying = rep.compactness_consistent;
    for (size_t i = 0; i + 4 < rep.singular_values.size(); ++i)
        decaying = decaying && rep.singular_values[i + 4] < 0.9 * rep.singular_values[i];
    c.require(decaying, "strictly decaying singular values for increasing weights");

    auto degenerate =
        scspace::make_scale_space_unchecked(DomainSpec::line(5.0, 0.5), 0, {1.0, 1.0}, 1);
    auto flat = scspace::embedding_diagnostic(degenerate, 0, 1, 21, 5e-3, true);
    bool is_flat = !flat.compactness_consistent;
    for (double s : flat.singular_values) is_flat = is_flat && std::abs(s - 1.0) < 1e-9;
    c.require(is_flat, "flat profile for the degenerate control");

    auto line = scspace::make_scale_space(DomainSpec::line(5.0, 0.1), 0, {0.0, 1.0}, 1);
    auto gaussian = GridFunction::from_line(
        line,
        [](double s) {
            VectorXd v(1);
            v << std::exp(-s * s);
            return v;
        },
        1);
    gaussian.set_asymptotics(vec1(0.0), vec1(0.0));
    auto dir = GridFunction::from_line(
        line,
        [](double s) {
            VectorXd v(1);
            v << std::cos(s) * std::exp(-0.2 * s * s);
            return v;
        },
        1);
    std::vector<double> steps = {0.2, 0.1, 0.05, 0.025, 0.0125};
    auto affine = scspace::sc1_check(
        [](const GridFunction& u) { return u * 2.0 + u * 0.0; }, gaussian, dir, steps);
    c.require(affine.affine_zero, "affine maps have zero remainder");

    auto square = scspace::sc1_check(
        [](const GridFunction& u) {
            GridFunction r = u;
            r.values() = u.values().array().square().matrix();
            return r;
        },
        gaussian, dir, steps);
    c.require(!square.affine_zero && square.observed_order >= 1.0 - 0.05,
              "pointwise square has order >= 1");
    c.note("square order " + std::to_string(square.observed_order));

    auto cyl = scspace::make_scale_space(DomainSpec::cylinder(5.0, 0.05, 16), 0, {0.0, 1.0}, 1);
    auto u = GridFunction::from_cylinder(
        cyl,
        [](double s, double t) {
            VectorXd v(1);
            v << std::sin(2.0 * std::numbers::pi * t) * std::exp(-s * s);
            return v;
        },
        1);
    u.set_asymptotics(vec1(0.0), vec1(0.0));
    auto trans = scspace::sc1_check_ray(
        [&](double cc) { return scspace::translation_action(u, cc, 0.0); }, 1.0, steps);
    c.require(trans.observed_order >= 1.0 - 0.1, "translation action has order >= 1");
    c.note("translation order " + std::to_string(trans.observed_order));
    return {11, "sc-calculus diagnostics", c.ok, c.detail.str(), 0.0};
}

}  // namespace

SuiteResult run_suite(unsigned seed) {
    using Clock = std::chrono::steady_clock;
    SuiteResult out;
    std::vector<CriterionResult (*)(unsigned)> criteria = {
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
        criterion_7, criterion_8, criterion_9, criterion_10, criterion_11};
    for (auto* fn : criteria) {
        auto start = Clock::now();
        CriterionResult r;
        try {
            r = fn(seed);
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        if (r.number == 0) r.number = static_cast<int>(out.criteria.size()) + 1;
        out.criteria.push_back(std::move(r));
    }
    return out;
}

nlohmann::ordered_json to_json(const SuiteResult& result, unsigned seed,
                               const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["seed"] = seed;
    j["config_hash"] = config_hash;
    j["all_pass"] = result.all_pass();
    auto& arr = j["criteria"] = nlohmann::ordered_json::array();
    for (const auto& c : result.criteria) {
        nlohmann::ordered_json e;
        e["number"] = c.number;
        e["name"] = c.name;
        e["pass"] = c.pass;
        e["detail"] = c.detail;
        arr.push_back(std::move(e));
    }
    return j;
}

}  // namespace scfred::acceptance
