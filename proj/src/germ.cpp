#include "scfred/germ.hpp"

#include <cmath>
#include <random>

#include "scfred/errors.hpp"

namespace scfred::germ {

ContractionGerm make_contraction_germ(
    int param_dim, int cone_dim, int u_dim,
    std::function<VectorXd(const VectorXd&, const VectorXd&, int)> B, std::vector<double> theta,
    double base_radius, int samples, unsigned seed,
    std::function<double(const VectorXd&, int)> level_norm) {
    if (theta.empty()) throw NotAContractionError("need at least one level");
    for (double t : theta)
        if (!(t > 0.0 && t < 1.0))
            throw NotAContractionError("contraction factors must lie in (0, 1)");
    ContractionGerm g;
    g.param_dim = param_dim;
    g.cone_dim = cone_dim;
    g.u_dim = u_dim;
    g.B = std::move(B);
    g.theta = std::move(theta);
    g.level_norm = std::move(level_norm);
    g.trust_radii.resize(g.theta.size());
    for (size_t m = 0; m < g.theta.size(); ++m) g.trust_radii[m] = base_radius * std::pow(0.5, m);

    VectorXd zero_v = VectorXd::Zero(param_dim);
    VectorXd zero_u = VectorXd::Zero(u_dim);
    double b00 = g.norm(g.B(zero_v, zero_u, 0), 0);
    if (b00 > 1e-12)
        throw NotAContractionError("germ is not anchored: |B(0,0)| = " + std::to_string(b00));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    for (int level = 0; level < g.levels(); ++level) {
        double rho = g.trust_radii[level];
        for (int trial = 0; trial < samples; ++trial) {
            VectorXd v(param_dim);
            for (int i = 0; i < param_dim; ++i)
                v(i) = (i < cone_dim ? pos(rng) : unit(rng)) * rho;
            VectorXd u(u_dim), up(u_dim);
            for (int i = 0; i < u_dim; ++i) u(i) = unit(rng) * rho;
            for (int i = 0; i < u_dim; ++i) up(i) = unit(rng) * rho;
            double lhs = g.norm(g.B(v, u, level) - g.B(v, up, level), level);
            double rhs = g.theta[level] * g.norm(u - up, level);
            if (lhs > rhs + 1e-12)
                throw NotAContractionError(
                    "sampled contraction bound violated at level " + std::to_string(level) +
                    ": |B(v,u)-B(v,u')| = " + std::to_string(lhs) +
                    " > theta |u-u'| = " + std::to_string(rhs));
        }
    }
    return g;
}

SolveResult solve_germ(const ContractionGerm& germ, const VectorXd& v, int level, double tol,
                       int max_iter) {
    if (level < 0 || level >= germ.levels())
        throw LevelOutOfRangeError("no such germ level: " + std::to_string(level));
    if (v.size() != germ.param_dim) throw DomainError("parameter dimension mismatch");
    for (int i = 0; i < germ.cone_dim; ++i)
        if (v(i) < 0.0) throw DomainError("cone coordinates must be nonnegative");

    SolveResult out;
    VectorXd u = VectorXd::Zero(germ.u_dim);
    int expanding = 0;
    for (int it = 0; it < max_iter; ++it) {
        VectorXd next = germ.B(v, u, level);
        double res = germ.norm(next - u, level);
        if (!std::isfinite(res)) throw EvaluationError("non-finite germ iteration");
        if (!out.residuals.empty()) {
            double prev = out.residuals.back();
            if (prev > 0.0 && res >= prev && res > tol) {
                if (++expanding >= 5)
                    throw NotAContractionError("iteration expanded over five steps, residual " +
                                               std::to_string(res));
            } else {
                expanding = 0;
            }
            if (prev > 1e-13 && res > 1e-15)
                out.observed_rate = std::max(out.observed_rate, res / prev);
        }
        out.residuals.push_back(res);
        u = next;
        out.iterations = it + 1;
        if (res <= tol) {
            out.u = u;
            return out;
        }
    }
    throw ConvergenceFailureError("germ iteration did not reach tolerance", out.residuals.back());
}

SmoothnessReport germ_smoothness_diagnostic(const SolutionGerm& delta, const VectorXd& center,
                                            const VectorXd& direction, int order,
                                            const std::vector<double>& steps) {
    if (order < 1 || order > 4) throw DomainError("supported derivative orders are 1..4");
    SmoothnessReport rep;
    static const std::vector<std::vector<std::pair<int, double>>> stencils = {
        {{-1, -0.5}, {1, 0.5}},
        {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
        {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
        {{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}},
    };
    const int out_dim = static_cast<int>(delta(center).size());
    for (int k = 1; k <= order; ++k) {
        SmoothnessReport::DerivativeSweep sweep;
        sweep.order = k;
        sweep.steps = steps;
        for (double t : steps) {
            VectorXd est = VectorXd::Zero(out_dim);
            bool finite = true;
            for (const auto& [off, coef] : stencils[k - 1]) {
                VectorXd val = delta(center + direction * (off * t));
                if (!val.allFinite()) finite = false;
                est += coef * val;
            }
            est /= std::pow(t, k);
            sweep.finite = sweep.finite && finite && est.allFinite();
            sweep.estimates.push_back(est);
            sweep.estimate_norms.push_back(est.norm());
        }
        if (sweep.estimates.size() >= 3 && sweep.finite) {
            std::vector<double> diffs;
            for (size_t i = 0; i + 1 < sweep.estimates.size(); ++i)
                diffs.push_back((sweep.estimates[i] - sweep.estimates[i + 1]).norm());
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int n = 0;
            for (size_t i = 0; i < diffs.size(); ++i) {
                if (diffs[i] <= 1e-14) continue;
                double x = std::log(steps[i]), y = std::log(diffs[i]);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++n;
            }
            if (n >= 2)
                sweep.observed_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            else
                sweep.observed_order = std::numeric_limits<double>::infinity();
            double last = diffs.back();
            double scale = std::max(1.0, sweep.estimate_norms.back());
            sweep.stabilized = last <= 1e-4 * scale;
        }
        rep.sweeps.push_back(std::move(sweep));
    }
    rep.pass = true;
    for (const auto& s : rep.sweeps) rep.pass = rep.pass && s.finite && s.stabilized;
    return rep;
}

MorseFiller::MorseFiller(MatrixXd hessian, scspace::ScaleSpace space, double eigen_tol)
    : hessian_(std::move(hessian)), space_(std::move(space)) {
    if (hessian_.rows() != hessian_.cols())
        throw DegenerateCriticalPointError("Hessian must be square");
    if (space_.domain().kind != scspace::DomainKind::Line)
        throw InvalidDomainError("the Morse filler lives on a line space");
    if (space_.target_dim() != hessian_.rows())
        throw InvalidDomainError("Hessian dimension must match target_dim");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (hessian_ + hessian_.transpose()));
    const VectorXd& ev = es.eigenvalues();
    int n_stable = 0, n_unstable = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) < eigen_tol)
            throw DegenerateCriticalPointError("Hessian eigenvalue " + std::to_string(ev(i)) +
                                               " within tolerance of zero");
        (ev(i) < 0 ? n_stable : n_unstable)++;
    }
    stable_basis_.resize(ev.size(), n_stable);
    unstable_basis_.resize(ev.size(), n_unstable);
    int is = 0, iu = 0;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < 0)
            stable_basis_.col(is++) = es.eigenvectors().col(i);
        else
            unstable_basis_.col(iu++) = es.eigenvectors().col(i);
    }
}

MatrixXd MorseFiller::apply_interior(const MatrixXd& values) const {
    const int N = space_.n_s();
    const int d = space_.target_dim();
    const double dx = space_.domain().h;
    MatrixXd out(N - 1, d);
    for (int i = 0; i + 1 < N; ++i) {
        VectorXd a = values.row(i).transpose(), b = values.row(i + 1).transpose();
        out.row(i) = ((b - a) / dx - hessian_ * (0.5 * (a + b))).transpose();
    }
    return out;
}

MatrixXd MorseFiller::system_matrix() const {
    const int N = space_.n_s();
    const int d = space_.target_dim();
    const double dx = space_.domain().h;
    MatrixXd A = MatrixXd::Zero(N * d, N * d);
    for (int i = 0; i + 1 < N; ++i)
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) {
                A(i * d + r, i * d + c) += -0.5 * hessian_(r, c);
                A(i * d + r, (i + 1) * d + c) += -0.5 * hessian_(r, c);
            }
            A(i * d + r, i * d + r) += -1.0 / dx;
            A(i * d + r, (i + 1) * d + r) += 1.0 / dx;
        }
    // Boundary rows: stable components vanish at the left end, unstable at
    // the right end.
    int row = (N - 1) * d;
    for (int c = 0; c < stable_basis_.cols(); ++c, ++row)
        for (int r = 0; r < d; ++r) A(row, r) = stable_basis_(r, c);
    for (int c = 0; c < unstable_basis_.cols(); ++c, ++row)
        for (int r = 0; r < d; ++r) A(row, (N - 1) * d + r) = unstable_basis_(r, c);
    return A;
}

double MorseFiller::weighted_min_singular_value(double delta) const {
    const int N = space_.n_s();
    const int d = space_.target_dim();
    const double dx = space_.domain().h;
    MatrixXd A = system_matrix();
    for (int i = 0; i + 1 < N; ++i) {
        double smid = 0.5 * (space_.s_coord(i) + space_.s_coord(i + 1));
        double w = std::exp(delta * std::abs(smid)) * std::sqrt(dx);
        A.middleRows(i * d, d) *= w;
    }
    for (int i = 0; i < N; ++i) {
        double w = std::exp(delta * std::abs(space_.s_coord(i))) * std::sqrt(dx);
        A.middleCols(i * d, d) /= w;
    }
    Eigen::JacobiSVD<MatrixXd> svd(A);
    return svd.singularValues().tail(1)(0);
}

VectorXd FilledSection::combined(const VectorXd& v, const VectorXd& u) const {
    MatrixXd P0 = proj0(v);
    VectorXd core = P0 * u;
    VectorXd comp = u - core;
    return base(v, core) + filler(v, core, comp);
}

double FilledSection::filler_min_singular_value(const VectorXd& v) const {
    MatrixXd P0 = proj0(v);
    MatrixXd P1 = proj1(v);
    const int d = fiber_dim;
    MatrixXd I = MatrixXd::Identity(d, d);
    Eigen::JacobiSVD<MatrixXd> s0(I - P0, Eigen::ComputeFullU);
    Eigen::JacobiSVD<MatrixXd> s1(I - P1, Eigen::ComputeFullU);
    int r0 = 0, r1 = 0;
    for (int i = 0; i < d; ++i) {
        if (s0.singularValues()(i) > 1e-10) ++r0;
        if (s1.singularValues()(i) > 1e-10) ++r1;
    }
    if (r0 == 0) return std::numeric_limits<double>::infinity();
    MatrixXd B0 = s0.matrixU().leftCols(r0);
    MatrixXd B1 = s1.matrixU().leftCols(std::max(r1, 1));
    VectorXd zero_core = VectorXd::Zero(d);
    MatrixXd F(d, r0);
    for (int c = 0; c < r0; ++c) F.col(c) = filler(v, zero_core, B0.col(c));
    MatrixXd block = B1.transpose() * F;
    Eigen::JacobiSVD<MatrixXd> svd(block);
    return svd.singularValues().tail(1)(0);
}

ZeroSetReport filled_zero_set_check(const FilledSection& filled,
                                    const std::vector<std::pair<VectorXd, VectorXd>>& samples,
                                    double tol) {
    ZeroSetReport rep;
    for (const auto& [v, u] : samples) {
        MatrixXd P0 = filled.proj0(v);
        VectorXd core = P0 * u;
        VectorXd comp = u - core;
        ZeroSetReport::Row row;
        row.v = v;
        row.u = u;
        row.filled_zero = filled.combined(v, u).norm() <= tol;
        row.complement_norm = comp.norm();
        row.base_norm = filled.base(v, core).norm();
        row.consistent = !row.filled_zero || (row.complement_norm <= tol && row.base_norm <= tol);
        if (!row.consistent) ++rep.violations;
        rep.rows.push_back(std::move(row));
    }
    rep.pass = rep.violations == 0;
    return rep;
}

}  // namespace scfred::germ
