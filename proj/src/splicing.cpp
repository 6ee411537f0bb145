#include "scfred/splicing.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "scfred/errors.hpp"

namespace scfred::splicing {

using scspace::DomainKind;
using scspace::DomainSpec;
using scspace::eval_cylinder;
using scspace::eval_line;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bump(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }
double bump_prime(double x) { return x > 0.0 ? std::exp(-1.0 / x) / (x * x) : 0.0; }

/// Smooth step rising 0 -> 1 on [0, 1] with step(x) + step(1-x) = 1.
double step(double x) {
    double b = bump(x);
    return b / (b + bump(1.0 - x));
}

double step_prime(double x) {
    double b = bump(x), c = bump(1.0 - x);
    double denom = (b + c) * (b + c);
    if (denom == 0.0) return 0.0;
    return (bump_prime(x) * c + b * bump_prime(1.0 - x)) / denom;
}

int shift_nodes(double R, double h) { return static_cast<int>(std::lround(R / h)); }

void check_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!a.space().same_grid(b.space()))
        throw InvalidDomainError("the two factors live on different grids");
}

void check_interface(const VectorXd& left, const VectorXd& right, double tol) {
    if ((left - right).lpNorm<Eigen::Infinity>() > tol)
        throw InterfaceMismatchError("asymptotic interface values differ by " +
                                     std::to_string((left - right).lpNorm<Eigen::Infinity>()));
}

/// Value of v at s - R, reading exact nodes for rounded shifts.
VectorXd shifted_value(const GridFunction& v, double s, double R, ShiftMode mode) {
    const double h = v.space().domain().h;
    if (mode == ShiftMode::Rounded) {
        const int n = shift_nodes(R, h);
        return eval_line(v, s - n * h);
    }
    return eval_line(v, s - R);
}

}  // namespace

double beta(double s) {
    if (s <= -1.0) return 1.0;
    if (s >= 1.0) return 0.0;
    return step((1.0 - s) / 2.0);
}

double beta_prime(double s) {
    if (s <= -1.0 || s >= 1.0) return 0.0;
    return -0.5 * step_prime((1.0 - s) / 2.0);
}

Cutoff Cutoff::standard() {
    return Cutoff{[](double s) { return beta(s); }, [](double s) { return beta_prime(s); }};
}

GluingProfile GluingProfile::exponential() {
    return GluingProfile{Kind::Exponential, "exponential",
                         [](double r) { return std::exp(1.0 / r) - std::numbers::e; },
                         [](double R) { return 1.0 / std::log(R + std::numbers::e); }};
}

GluingProfile GluingProfile::logarithmic() {
    return GluingProfile{Kind::Logarithmic, "logarithmic",
                         [](double x) { return -std::log(x) / (2.0 * std::numbers::pi); },
                         [](double R) { return std::exp(-2.0 * std::numbers::pi * R); }};
}

GluingProfile GluingProfile::reciprocal() {
    return GluingProfile{Kind::Custom, "reciprocal", [](double r) { return 1.0 / r - 1.0; },
                         [](double R) { return 1.0 / (R + 1.0); }};
}

GluingProfile GluingProfile::custom(std::function<double(double)> fwd,
                                    std::function<double(double)> inv, std::string name) {
    return GluingProfile{Kind::Custom, std::move(name), std::move(fwd), std::move(inv)};
}

double profile_length(const GluingProfile& profile, double r) {
    if (!(r > 0.0) || r > 1.0)
        throw DomainError("gluing parameter " + std::to_string(r) + " outside (0, 1]");
    return profile.forward(r);
}

double profile_parameter(const GluingProfile& profile, double R) {
    if (R < 0.0) throw DomainError("gluing length must be nonnegative");
    return profile.inverse(R);
}

double total_glue_determinant(double s) {
    double b = beta(s);
    return b * b + (1.0 - b) * (1.0 - b);
}

GridFunction glue_line(const GridFunction& u, const GridFunction& v, double R, ShiftMode mode,
                       double interface_tol) {
    check_same_grid(u, v);
    check_interface(u.asym_right(), v.asym_left(), interface_tol);
    if (std::isinf(R)) return u;
    const ScaleSpace& sp = u.space();
    const double Reff = mode == ShiftMode::Rounded ? shift_nodes(R, sp.domain().h) * sp.domain().h : R;
    MatrixXd out(sp.node_count(), sp.target_dim());
    for (int i = 0; i < sp.n_s(); ++i) {
        const double s = sp.s_coord(i);
        const double b = beta(s - Reff / 2.0);
        out.row(i) = b * u.values().row(i) +
                     (1.0 - b) * shifted_value(v, s, Reff, mode).transpose();
    }
    GridFunction g(sp, std::move(out), std::min(u.declared_level(), v.declared_level()));
    g.set_asymptotics(u.asym_left(), v.asym_right());
    return g;
}

GridFunction antiglue_line(const GridFunction& h, const GridFunction& k, double R, ShiftMode mode,
                           double interface_tol) {
    check_same_grid(h, k);
    check_interface(h.asym_right(), k.asym_left(), interface_tol);
    const ScaleSpace& sp = h.space();
    if (std::isinf(R)) return GridFunction::zero(sp, h.declared_level());
    const double Reff = mode == ShiftMode::Rounded ? shift_nodes(R, sp.domain().h) * sp.domain().h : R;
    MatrixXd out(sp.node_count(), sp.target_dim());
    for (int i = 0; i < sp.n_s(); ++i) {
        const double s = sp.s_coord(i);
        const double b = beta(s - Reff / 2.0);
        out.row(i) = -(1.0 - b) * h.values().row(i) +
                     b * shifted_value(k, s, Reff, mode).transpose();
    }
    GridFunction a(sp, std::move(out), std::min(h.declared_level(), k.declared_level()));
    a.set_asymptotics(k.asym_left(), -h.asym_right());
    return a;
}

TotalGluePair total_glue(const GridFunction& h, const GridFunction& k, double R, ShiftMode mode,
                         double interface_tol) {
    TotalGluePair out{glue_line(h, k, R, mode, interface_tol),
                      antiglue_line(h, k, R, mode, interface_tol), 1.0};
    const ScaleSpace& sp = h.space();
    const double Reff =
        std::isinf(R) ? R
                      : (mode == ShiftMode::Rounded ? shift_nodes(R, sp.domain().h) * sp.domain().h : R);
    if (!std::isinf(Reff))
        for (int i = 0; i < sp.n_s(); ++i)
            out.min_determinant =
                std::min(out.min_determinant, total_glue_determinant(sp.s_coord(i) - Reff / 2.0));
    return out;
}

PairField total_unglue(const GridFunction& glued, const GridFunction& antiglued, double R,
                       ShiftMode /*mode*/) {
    check_same_grid(glued, antiglued);
    if (std::isinf(R))
        throw ParameterOutOfRangeError("total gluing is not invertible at infinite length");
    const ScaleSpace& sp = glued.space();
    const double hstep = sp.domain().h;
    const int n = shift_nodes(R, hstep);
    const double Reff = n * hstep;
    const int N = sp.n_s();
    MatrixXd hv(N, sp.target_dim()), kv(N, sp.target_dim());
    auto solve_at = [&](double b, const Eigen::RowVectorXd& g, const Eigen::RowVectorXd& a,
                       Eigen::RowVectorXd& h_out, Eigen::RowVectorXd& k_out) {
        const double det = b * b + (1.0 - b) * (1.0 - b);
        h_out = (b * g - (1.0 - b) * a) / det;
        k_out = ((1.0 - b) * g + b * a) / det;
    };
    for (int i = 0; i < N; ++i) {
        const double s = sp.s_coord(i);
        const double b = beta(s - Reff / 2.0);
        Eigen::RowVectorXd ho(sp.target_dim()), ko(sp.target_dim());
        solve_at(b, glued.values().row(i), antiglued.values().row(i), ho, ko);
        hv.row(i) = ho;
        const int j = i - n;
        if (j >= 0 && j < N) kv.row(j) = ko;
    }
    // Nodes of k the window never pairs with: reconstruct from the
    // asymptotic extensions of the inputs.
    for (int j = std::max(0, N - n); j < N; ++j) {
        const double s = sp.s_coord(j) + Reff;
        const double b = beta(s - Reff / 2.0);
        Eigen::RowVectorXd ho(sp.target_dim()), ko(sp.target_dim());
        solve_at(b, glued.asym_right().transpose(), antiglued.asym_right().transpose(), ho, ko);
        kv.row(j) = ko;
    }
    GridFunction h(sp, std::move(hv), glued.declared_level());
    GridFunction k(sp, std::move(kv), glued.declared_level());
    h.set_asymptotics(glued.asym_left(), -antiglued.asym_right());
    k.set_asymptotics(antiglued.asym_left(), glued.asym_right());
    return PairField{std::move(h), std::move(k)};
}

ProjectionInfo line_projection_info(const ScaleSpace& space, const GluingProfile& profile,
                                    double r) {
    if (r < 0.0 || r >= 1.0) throw DomainError("projection parameter must lie in [0, 1)");
    ProjectionInfo info;
    if (r == 0.0) {
        info.requested_length = kInf;
        info.effective_length = kInf;
        info.beyond_window = false;
        return info;
    }
    info.requested_length = profile_length(profile, r);
    const double h = space.domain().h;
    info.shift_nodes = shift_nodes(info.requested_length, h);
    info.effective_length = info.shift_nodes * h;
    const double R = info.effective_length;
    // Exact representability: unpaired nodes must sit where beta is constant.
    const double worst_left = space.domain().s_lo + (info.shift_nodes - 1) * h;
    const double worst_right = space.domain().s_hi + h;
    if (info.shift_nodes >= 1 && worst_left - R / 2.0 > -1.0) info.beyond_window = true;
    if (worst_right - R / 2.0 < 1.0) info.beyond_window = true;
    return info;
}

PairField splicing_projection(const SplicingKernel& kernel, double r, const PairField& e) {
    if (kernel.variant != SpliceVariant::MorseLine)
        throw InvalidDomainError("line projection called on a cylinder kernel");
    check_same_grid(e.h, e.k);
    ProjectionInfo info = line_projection_info(e.h.space(), kernel.profile, r);
    if (r == 0.0 || info.beyond_window) return e;  // fully broken state

    const ScaleSpace& sp = e.h.space();
    const int N = sp.n_s();
    const int n = info.shift_nodes;
    const double R = info.effective_length;
    MatrixXd hv(N, sp.target_dim()), kv(N, sp.target_dim());
    for (int j = std::max(0, N - n); j < N; ++j) kv.row(j) = e.k.values().row(j);
    for (int i = 0; i < N; ++i) {
        const double s = sp.s_coord(i);
        const double b = kernel.cutoff.value(s - R / 2.0);
        const int j = i - n;
        if (j < 0) {
            hv.row(i) = e.h.values().row(i);
            continue;
        }
        const double det = b * b + (1.0 - b) * (1.0 - b);
        const Eigen::RowVectorXd g =
            b * e.h.values().row(i) + (1.0 - b) * e.k.values().row(j);
        hv.row(i) = b * g / det;
        kv.row(j) = (1.0 - b) * g / det;
    }
    GridFunction h1(sp, std::move(hv), e.h.declared_level());
    GridFunction k1(sp, std::move(kv), e.k.declared_level());
    h1.set_asymptotics(e.h.asym_left(), VectorXd::Zero(sp.target_dim()));
    k1.set_asymptotics(VectorXd::Zero(sp.target_dim()), e.k.asym_right());
    return PairField{std::move(h1), std::move(k1)};
}

bool splicing_core_contains(const SplicingKernel& kernel, double r, const PairField& e,
                            double tol) {
    PairField p = splicing_projection(kernel, r, e);
    double dh = scspace::level_norm(p.h - e.h, 0);
    double dk = scspace::level_norm(p.k - e.k, 0);
    return std::sqrt(dh * dh + dk * dk) <= tol;
}

MatrixXd line_projection_matrix(const ScaleSpace& space, const GluingProfile& profile, double r) {
    SplicingKernel kernel{SpliceVariant::MorseLine, Cutoff::standard(), profile, space};
    const int N = space.n_s();
    const int d = space.target_dim();
    const int dim = 2 * N * d;
    MatrixXd P(dim, dim);
    for (int col = 0; col < dim; ++col) {
        MatrixXd hv = MatrixXd::Zero(N, d), kv = MatrixXd::Zero(N, d);
        const bool in_k = col >= N * d;
        const int flat = in_k ? col - N * d : col;
        (in_k ? kv : hv)(flat / d, flat % d) = 1.0;
        PairField e{GridFunction(space, hv, 0), GridFunction(space, kv, 0)};
        e.h.set_asymptotics(VectorXd::Zero(d), VectorXd::Zero(d));
        e.k.set_asymptotics(VectorXd::Zero(d), VectorXd::Zero(d));
        PairField out = splicing_projection(kernel, r, e);
        for (int i = 0; i < N; ++i)
            for (int c = 0; c < d; ++c) {
                P(i * d + c, col) = out.h.values()(i, c);
                P(N * d + i * d + c, col) = out.k.values()(i, c);
            }
    }
    return P;
}

// --- Cylinder variant ------------------------------------------------------

namespace {

void check_cylinder_pair(const GridFunction& plus, const GridFunction& minus) {
    const DomainSpec& dp = plus.space().domain();
    const DomainSpec& dm = minus.space().domain();
    if (dp.kind != DomainKind::Cylinder || dm.kind != DomainKind::Cylinder)
        throw InvalidDomainError("cylinder gluing needs cylinder halves");
    if (std::abs(dp.s_lo) > 1e-12 || std::abs(dm.s_hi) > 1e-12)
        throw InvalidDomainError("halves must be parameterized over [0, L] and [-L, 0]");
    if (std::abs(dp.h - dm.h) > 1e-12 || plus.space().n_t() != minus.space().n_t() ||
        plus.space().target_dim() != minus.space().target_dim())
        throw InvalidDomainError("cylinder halves have incompatible grids");
}

VectorXd circle_mean_at(const GridFunction& u, double s) {
    const int nt = u.space().n_t();
    VectorXd acc = VectorXd::Zero(u.space().target_dim());
    for (int j = 0; j < nt; ++j) acc += eval_cylinder(u, s, static_cast<double>(j) / nt);
    return acc / nt;
}

ScaleSpace glued_cylinder_space(const ScaleSpace& plus, double R) {
    DomainSpec d = DomainSpec::cylinder_window(0.0, R, plus.domain().h, plus.n_t());
    return scspace::make_scale_space_unchecked(d, plus.base_order(), plus.weights(),
                                               plus.target_dim());
}

}  // namespace

GluingDatum gluing_datum(std::complex<double> a, const GluingProfile& profile) {
    const double mod = std::abs(a);
    if (mod > 0.5) throw ParameterOutOfRangeError("gluing parameter modulus exceeds 1/2");
    if (mod == 0.0) return GluingDatum{kInf, 0.0};
    GluingDatum d;
    d.R = profile_length(profile, mod);
    d.theta = -std::arg(a) / (2.0 * std::numbers::pi);
    d.theta -= std::floor(d.theta);
    return d;
}

CylinderGlued glue_cylinder(const CylinderPair& u, std::complex<double> a,
                            const GluingProfile& profile, double interface_tol) {
    check_cylinder_pair(u.plus, u.minus);
    check_interface(u.plus.asym_right(), u.minus.asym_left(), interface_tol);
    CylinderGlued out;
    if (std::abs(a) == 0.0) {
        out.noded = true;
        out.pair = u;
        out.datum = GluingDatum{kInf, 0.0};
        return out;
    }
    out.datum = gluing_datum(a, profile);
    const double h = u.plus.space().domain().h;
    const int n = std::max(1, shift_nodes(out.datum.R, h));
    const double R = n * h;
    out.datum.R = R;
    ScaleSpace gsp = glued_cylinder_space(u.plus.space(), R);
    MatrixXd vals(gsp.node_count(), gsp.target_dim());
    const int nt = gsp.n_t();
    for (int i = 0; i <= n; ++i) {
        const double s = i * h;
        const double b = beta(s - R / 2.0);
        for (int j = 0; j < nt; ++j) {
            const double t = static_cast<double>(j) / nt;
            vals.row(gsp.node_index(i, j)) =
                (b * eval_cylinder(u.plus, s, t) +
                 (1.0 - b) * eval_cylinder(u.minus, s - R, t - out.datum.theta))
                    .transpose();
        }
    }
    out.glued = GridFunction(gsp, std::move(vals),
                             std::min(u.plus.declared_level(), u.minus.declared_level()));
    return out;
}

CylinderAntiglued antiglue_cylinder(const CylinderPair& h, std::complex<double> a,
                                    const GluingProfile& profile, double interface_tol) {
    check_cylinder_pair(h.plus, h.minus);
    check_interface(h.plus.asym_right(), h.minus.asym_left(), interface_tol);
    CylinderAntiglued out;
    const int d = h.plus.space().target_dim();
    if (std::abs(a) == 0.0) {
        out.zero = true;
        out.average = VectorXd::Zero(d);
        out.end_x = VectorXd::Zero(d);
        out.end_y = VectorXd::Zero(d);
        out.datum = GluingDatum{kInf, 0.0};
        return out;
    }
    out.datum = gluing_datum(a, profile);
    const double hs = h.plus.space().domain().h;
    const int n = std::max(1, shift_nodes(out.datum.R, hs));
    const double R = n * hs;
    out.datum.R = R;
    out.average =
        0.5 * (circle_mean_at(h.plus, R / 2.0) + circle_mean_at(h.minus, -R / 2.0));
    ScaleSpace gsp = glued_cylinder_space(h.plus.space(), R);
    MatrixXd vals(gsp.node_count(), gsp.target_dim());
    const int nt = gsp.n_t();
    for (int i = 0; i <= n; ++i) {
        const double s = i * hs;
        const double b = beta(s - R / 2.0);
        for (int j = 0; j < nt; ++j) {
            const double t = static_cast<double>(j) / nt;
            VectorXd hp = eval_cylinder(h.plus, s, t) - out.average;
            VectorXd hm = eval_cylinder(h.minus, s - R, t - out.datum.theta) - out.average;
            vals.row(gsp.node_index(i, j)) = (-(1.0 - b) * hp + b * hm).transpose();
        }
    }
    out.anti = GridFunction(gsp, std::move(vals),
                            std::min(h.plus.declared_level(), h.minus.declared_level()));
    out.end_x = -(h.plus.asym_right() - out.average);
    out.end_y = h.minus.asym_left() - out.average;
    return out;
}

CylinderPair total_unglue_cylinder(const GridFunction& glued, const GridFunction& antiglued,
                                   const GluingDatum& datum, const ScaleSpace& plus_space,
                                   const ScaleSpace& minus_space) {
    if (!glued.space().same_grid(antiglued.space()))
        throw InvalidDomainError("glued and antiglued live on different grids");
    if (std::isinf(datum.R))
        throw ParameterOutOfRangeError("cylinder total gluing is not invertible at a = 0");
    const ScaleSpace& gsp = glued.space();
    const double h = gsp.domain().h;
    const int n = gsp.n_s() - 1;
    const double R = n * h;
    const int nt = gsp.n_t();
    const int d = gsp.target_dim();
    const int mshift = static_cast<int>(std::lround(datum.theta * nt));

    // av_R is visible in the glued field: its circle mean at s = R/2.
    VectorXd av = circle_mean_at(glued, R / 2.0);

    MatrixXd pv(plus_space.node_count(), d), mv(minus_space.node_count(), d);
    for (int i = 0; i < plus_space.n_s(); ++i)
        for (int j = 0; j < nt; ++j) pv.row(plus_space.node_index(i, j)) = av.transpose();
    for (int i = 0; i < minus_space.n_s(); ++i)
        for (int j = 0; j < nt; ++j) mv.row(minus_space.node_index(i, j)) = av.transpose();

    for (int i = 0; i <= n; ++i) {
        const double s = i * h;
        const double b = beta(s - R / 2.0);
        const double det = b * b + (1.0 - b) * (1.0 - b);
        for (int j = 0; j < nt; ++j) {
            VectorXd g = glued.values().row(gsp.node_index(i, j)).transpose();
            VectorXd w = antiglued.values().row(gsp.node_index(i, j)).transpose() -
                         av * (1.0 - 2.0 * b);
            VectorXd hp = (b * g - (1.0 - b) * w) / det;
            VectorXd hm = ((1.0 - b) * g + b * w) / det;
            // plus node at s, minus node at s - R, circle index j - mshift.
            const int jp = ((j - 0) % nt + nt) % nt;
            if (i < plus_space.n_s()) pv.row(plus_space.node_index(i, jp)) = hp.transpose();
            const int im = minus_space.n_s() - 1 - (n - i);
            const int jm = ((j - mshift) % nt + nt) % nt;
            if (im >= 0) mv.row(minus_space.node_index(im, jm)) = hm.transpose();
        }
    }
    GridFunction plus(plus_space, std::move(pv), glued.declared_level());
    GridFunction minus(minus_space, std::move(mv), glued.declared_level());
    plus.set_asymptotics(av, av);
    minus.set_asymptotics(av, av);
    return CylinderPair{std::move(plus), std::move(minus)};
}

CylinderPair splicing_projection_cylinder(const CylinderPair& e, std::complex<double> a,
                                          const GluingProfile& profile) {
    if (std::abs(a) == 0.0) return e;  // antigluing vanishes at a = 0
    CylinderGlued g = glue_cylinder(e, a, profile, 1e6);
    GridFunction zero_anti = GridFunction::zero(g.glued->space(), g.glued->declared_level());
    return total_unglue_cylinder(*g.glued, zero_anti, g.datum, e.plus.space(), e.minus.space());
}

}  // namespace scfred::splicing
