#include "scfred/morse.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "scfred/errors.hpp"

namespace scfred::morse {

using scspace::DomainSpec;
using scspace::eval_line;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

namespace {

VectorXd vec2(double x, double y) {
    VectorXd v(2);
    v << x, y;
    return v;
}

MatrixXd stable_eigvecs(const MatrixXd& H, bool stable) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
    std::vector<int> cols;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if ((es.eigenvalues()(i) < 0) == stable) cols.push_back(i);
    MatrixXd out(H.rows(), static_cast<int>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) out.col(static_cast<int>(j)) = es.eigenvectors().col(cols[j]);
    return out;
}

int morse_index(const MatrixXd& H) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
    int idx = 0;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) < 0) ++idx;
    return idx;
}

}  // namespace

const CriticalPoint& MorseProblem::point(const std::string& label) const {
    for (const auto& p : critical_points)
        if (p.label == label) return p;
    throw DomainError("no critical point labeled '" + label + "'");
}

std::vector<std::string> MorseProblem::total_order(double tol) const {
    std::vector<const CriticalPoint*> pts;
    for (const auto& p : critical_points) pts.push_back(&p);
    std::sort(pts.begin(), pts.end(),
              [](const CriticalPoint* a, const CriticalPoint* b) { return a->value < b->value; });
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        if (std::abs(pts[i]->value - pts[i + 1]->value) <= tol)
            throw TotalOrderViolationError("critical values of " + pts[i]->label + " and " +
                                           pts[i + 1]->label + " coincide");
    std::vector<std::string> out;
    for (const auto* p : pts) out.push_back(p->label);
    return out;
}

MorseProblem cubic_1d() {
    MorseProblem p;
    p.name = "cubic_1d";
    p.dim = 1;
    p.value = [](const VectorXd& x) { return x(0) - x(0) * x(0) * x(0) / 3.0; };
    p.gradient = [](const VectorXd& x) {
        VectorXd g(1);
        g << 1.0 - x(0) * x(0);
        return g;
    };
    p.hessian = [](const VectorXd& x) {
        MatrixXd H(1, 1);
        H << -2.0 * x(0);
        return H;
    };
    return p;
}

MorseProblem double_well() {
    MorseProblem p;
    p.name = "double_well";
    p.dim = 2;
    p.value = [](const VectorXd& v) {
        double x = v(0), y = v(1);
        return 0.25 * (x * x - 1.0) * (x * x - 1.0) + 0.5 * y * y;
    };
    p.gradient = [](const VectorXd& v) {
        double x = v(0), y = v(1);
        return vec2(x * (x * x - 1.0), y);
    };
    p.hessian = [](const VectorXd& v) {
        double x = v(0);
        MatrixXd H = MatrixXd::Zero(2, 2);
        H(0, 0) = 3.0 * x * x - 1.0;
        H(1, 1) = 1.0;
        return H;
    };
    return p;
}

MorseProblem chain_problem(double c) {
    MorseProblem p;
    p.name = "chain";
    p.dim = 2;
    auto f = [](double t) { return t - t * t * t / 3.0; };
    auto fp = [](double t) { return 1.0 - t * t; };
    auto fpp = [](double t) { return -2.0 * t; };
    p.value = [=](const VectorXd& v) { return f(v(0)) + c * f(v(1)); };
    p.gradient = [=](const VectorXd& v) { return vec2(fp(v(0)), c * fp(v(1))); };
    p.hessian = [=](const VectorXd& v) {
        MatrixXd H = MatrixXd::Zero(2, 2);
        H(0, 0) = fpp(v(0));
        H(1, 1) = c * fpp(v(1));
        return H;
    };
    return p;
}

MorseProblem single_min() {
    MorseProblem p;
    p.name = "single_min";
    p.dim = 1;
    p.value = [](const VectorXd& x) { return 0.5 * x(0) * x(0); };
    p.gradient = [](const VectorXd& x) { return (x).eval(); };
    p.hessian = [](const VectorXd&) { return MatrixXd::Identity(1, 1); };
    return p;
}

MorseProblem cubic_degenerate() {
    MorseProblem p;
    p.name = "cubic_degenerate";
    p.dim = 1;
    p.value = [](const VectorXd& x) { return x(0) * x(0) * x(0); };
    p.gradient = [](const VectorXd& x) {
        VectorXd g(1);
        g << 3.0 * x(0) * x(0);
        return g;
    };
    p.hessian = [](const VectorXd& x) {
        MatrixXd H(1, 1);
        H << 6.0 * x(0);
        return H;
    };
    return p;
}

MorseProblem polynomial_problem(int dim,
                                const std::vector<std::pair<double, std::vector<int>>>& terms,
                                std::string name) {
    for (const auto& [coef, exps] : terms) {
        (void)coef;
        if (static_cast<int>(exps.size()) != dim)
            throw DomainError("each term needs one exponent per variable");
    }
    MorseProblem p;
    p.name = std::move(name);
    p.dim = dim;
    auto mono = [](double x, int e) { return e == 0 ? 1.0 : std::pow(x, e); };
    p.value = [terms, mono](const VectorXd& x) {
        double acc = 0.0;
        for (const auto& [coef, exps] : terms) {
            double t = coef;
            for (int j = 0; j < x.size(); ++j) t *= mono(x(j), exps[j]);
            acc += t;
        }
        return acc;
    };
    p.gradient = [terms, mono, dim](const VectorXd& x) {
        VectorXd g = VectorXd::Zero(dim);
        for (const auto& [coef, exps] : terms)
            for (int j = 0; j < dim; ++j) {
                if (exps[j] == 0) continue;
                double t = coef * exps[j] * mono(x(j), exps[j] - 1);
                for (int k = 0; k < dim; ++k)
                    if (k != j) t *= mono(x(k), exps[k]);
                g(j) += t;
            }
        return g;
    };
    p.hessian = [terms, mono, dim](const VectorXd& x) {
        MatrixXd H = MatrixXd::Zero(dim, dim);
        for (const auto& [coef, exps] : terms)
            for (int j = 0; j < dim; ++j)
                for (int k = 0; k < dim; ++k) {
                    double t = coef;
                    if (j == k) {
                        if (exps[j] < 2) continue;
                        t *= exps[j] * (exps[j] - 1) * mono(x(j), exps[j] - 2);
                    } else {
                        if (exps[j] == 0 || exps[k] == 0) continue;
                        t *= exps[j] * mono(x(j), exps[j] - 1);
                        t *= exps[k] * mono(x(k), exps[k] - 1);
                    }
                    for (int l = 0; l < dim; ++l)
                        if (l != j && l != k) t *= mono(x(l), exps[l]);
                    H(j, k) += t;
                }
        return H;
    };
    return p;
}

std::vector<CriticalPoint> find_critical_points(const MorseProblem& problem,
                                                const CriticalSearchOptions& opts) {
    std::vector<VectorXd> roots;
    std::vector<int> axis(problem.dim, 0);
    const int n = opts.seeds_per_axis;
    bool done = false;
    while (!done) {
        VectorXd seed(problem.dim);
        for (int j = 0; j < problem.dim; ++j)
            seed(j) = -opts.box_halfwidth +
                      2.0 * opts.box_halfwidth * (n == 1 ? 0.5 : axis[j] / double(n - 1));
        VectorXd x = seed;
        bool ok = false;
        for (int it = 0; it < opts.max_newton; ++it) {
            VectorXd g = problem.gradient(x);
            if (!g.allFinite()) break;
            if (g.norm() <= opts.newton_tol * (1.0 + x.norm())) {
                ok = true;
                break;
            }
            Eigen::FullPivLU<MatrixXd> lu(problem.hessian(x));
            if (!lu.isInvertible()) break;
            VectorXd step = lu.solve(g);
            if (step.norm() > 2.0 * opts.box_halfwidth) break;
            x -= step;
            if (x.norm() > 4.0 * opts.box_halfwidth) break;
        }
        if (ok) {
            bool dup = false;
            for (const auto& r : roots)
                if ((r - x).norm() < opts.dedup_tol) dup = true;
            if (!dup) roots.push_back(x);
        }
        // advance the seed lattice
        done = true;
        for (int j = 0; j < problem.dim; ++j) {
            if (++axis[j] < n) {
                done = false;
                break;
            }
            axis[j] = 0;
        }
    }

    std::vector<CriticalPoint> pts;
    for (const auto& x : roots) {
        CriticalPoint cp;
        cp.location = x;
        cp.value = problem.value(x);
        MatrixXd H = problem.hessian(x);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
        cp.hessian_spectrum = es.eigenvalues();
        for (int i = 0; i < cp.hessian_spectrum.size(); ++i)
            if (std::abs(cp.hessian_spectrum(i)) < opts.hessian_tol)
                throw DegenerateCriticalPointError(
                    "Hessian eigenvalue " + std::to_string(cp.hessian_spectrum(i)) +
                    " at a critical point");
        cp.index = morse_index(H);
        pts.push_back(std::move(cp));
    }
    std::sort(pts.begin(), pts.end(), [&](const CriticalPoint& a, const CriticalPoint& b) {
        if (std::abs(a.value - b.value) > 10.0 * opts.newton_tol) return a.value < b.value;
        for (int i = 0; i < a.location.size(); ++i)
            if (std::abs(a.location(i) - b.location(i)) > opts.dedup_tol)
                return a.location(i) < b.location(i);
        return false;
    });
    for (size_t i = 0; i < pts.size(); ++i) pts[i].label = "p" + std::to_string(i);
    return pts;
}

void locate_critical_points(MorseProblem& problem, const CriticalSearchOptions& opts) {
    problem.critical_points = find_critical_points(problem, opts);
}

ScaleSpace trajectory_space(const MorseProblem& problem, const TrajectoryOptions& opts) {
    return scspace::make_scale_space(DomainSpec::line(opts.L, opts.h), 0, {0.0, 0.25},
                                     problem.dim);
}

namespace {

struct CollocationSystem {
    const MorseProblem* problem;
    int N, d;
    double h;
    // extra linear rows appended after the interval blocks
    std::vector<std::pair<std::vector<std::pair<int, VectorXd>>, double>> linear_rows;

    int rows() const {
        return (N - 1) * d + static_cast<int>(linear_rows.size());
    }

    // nonlinear scalar rows (phase condition): node index, target value
    std::optional<std::pair<int, double>> phase_row;

    VectorXd residual(const MatrixXd& U) const {
        const int nl = static_cast<int>(linear_rows.size()) + (phase_row ? 1 : 0);
        VectorXd F((N - 1) * d + nl);
        for (int i = 0; i + 1 < N; ++i) {
            VectorXd a = U.row(i).transpose(), b = U.row(i + 1).transpose();
            VectorXd fa = problem->gradient(a), fb = problem->gradient(b);
            VectorXd um = 0.5 * (a + b) + (h / 8.0) * (fa - fb);
            VectorXd fm = problem->gradient(um);
            F.segment(i * d, d) = (b - a) / h - (fa + 4.0 * fm + fb) / 6.0;
        }
        int r = (N - 1) * d;
        for (const auto& [terms, target] : linear_rows) {
            double acc = -target;
            for (const auto& [node, coefs] : terms) acc += coefs.dot(U.row(node).transpose());
            F(r++) = acc;
        }
        if (phase_row)
            F(r++) = problem->value(U.row(phase_row->first).transpose()) - phase_row->second;
        return F;
    }

    SparseMatrix jacobian(const MatrixXd& U) const {
        const int nl = static_cast<int>(linear_rows.size()) + (phase_row ? 1 : 0);
        const int nrows = (N - 1) * d + nl;
        std::vector<Triplet> trip;
        trip.reserve(static_cast<size_t>(nrows) * 2 * d);
        MatrixXd I = MatrixXd::Identity(d, d);
        for (int i = 0; i + 1 < N; ++i) {
            VectorXd a = U.row(i).transpose(), b = U.row(i + 1).transpose();
            VectorXd fa = problem->gradient(a), fb = problem->gradient(b);
            VectorXd um = 0.5 * (a + b) + (h / 8.0) * (fa - fb);
            MatrixXd Aa = problem->hessian(a), Ab = problem->hessian(b);
            MatrixXd Am = problem->hessian(um);
            MatrixXd dua = 0.5 * I + (h / 8.0) * Aa;
            MatrixXd dub = 0.5 * I - (h / 8.0) * Ab;
            MatrixXd Ja = -I / h - (Aa + 4.0 * Am * dua) / 6.0;
            MatrixXd Jb = I / h - (Ab + 4.0 * Am * dub) / 6.0;
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) {
                    trip.emplace_back(i * d + r, i * d + c, Ja(r, c));
                    trip.emplace_back(i * d + r, (i + 1) * d + c, Jb(r, c));
                }
        }
        int r = (N - 1) * d;
        for (const auto& [terms, target] : linear_rows) {
            (void)target;
            for (const auto& [node, coefs] : terms)
                for (int c = 0; c < d; ++c) trip.emplace_back(r, node * d + c, coefs(c));
            ++r;
        }
        if (phase_row) {
            VectorXd g = problem->gradient(U.row(phase_row->first).transpose());
            for (int c = 0; c < d; ++c) trip.emplace_back(r, phase_row->first * d + c, g(c));
            ++r;
        }
        SparseMatrix J(nrows, N * d);
        J.setFromTriplets(trip.begin(), trip.end());
        return J;
    }
};

struct NewtonOutcome {
    MatrixXd U;
    int steps = 0;
    std::vector<double> history;
    bool converged = false;
    double final_residual = 0.0;
    SparseMatrix last_jacobian;
};

NewtonOutcome newton_solve(const CollocationSystem& sys, MatrixXd U, double tol, int max_newton) {
    NewtonOutcome out;
    const int d = sys.d;
    VectorXd F = sys.residual(U);
    double fn = F.norm();
    out.history.push_back(fn);
    for (int it = 0; it < max_newton && fn > tol; ++it) {
        SparseMatrix J = sys.jacobian(U);
        Eigen::SparseLU<SparseMatrix> lu(J);
        if (lu.info() != Eigen::Success) {
            out.converged = false;
            out.final_residual = fn;
            out.U = U;
            return out;
        }
        VectorXd step = lu.solve(-F);
        double alpha = 1.0;
        MatrixXd Un;
        VectorXd Fn;
        double fnn = fn;
        for (int ls = 0; ls < 40; ++ls) {
            Un = U;
            for (int i = 0; i < sys.N; ++i)
                Un.row(i) += alpha * step.segment(i * d, d).transpose();
            Fn = sys.residual(Un);
            fnn = Fn.norm();
            if (fnn < (1.0 - 1e-4 * alpha) * fn || fnn < tol) break;
            alpha *= 0.5;
        }
        if (fnn >= fn && fn > tol) {
            out.converged = false;
            out.final_residual = fn;
            out.U = U;
            out.steps = it;
            return out;
        }
        U = Un;
        F = Fn;
        fn = fnn;
        out.history.push_back(fn);
        out.steps = it + 1;
    }
    out.converged = fn <= tol;
    out.final_residual = fn;
    out.U = U;
    if (out.converged) out.last_jacobian = sys.jacobian(U);
    return out;
}

/// Smallest singular value estimate through inverse power iteration on the
/// normal equations, using two sparse factorizations.
double min_singular_estimate(const SparseMatrix& J) {
    Eigen::SparseLU<SparseMatrix> lu(J);
    SparseMatrix Jt = J.transpose();
    Eigen::SparseLU<SparseMatrix> lut(Jt);
    if (lu.info() != Eigen::Success || lut.info() != Eigen::Success) return 0.0;
    VectorXd x(J.cols());
    for (int i = 0; i < x.size(); ++i) x(i) = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.01 * (i % 7));
    x.normalize();
    double norm = 0.0;
    for (int it = 0; it < 30; ++it) {
        VectorXd y = lut.solve(x);
        VectorXd z = lu.solve(y);
        norm = z.norm();
        if (norm == 0.0) return 0.0;
        x = z / norm;
    }
    return 1.0 / std::sqrt(norm);
}

double collocation_norm(const VectorXd& F, int nblocks, int d, double h) {
    double acc = 0.0;
    for (int i = 0; i < nblocks; ++i) acc += F.segment(i * d, d).squaredNorm();
    return std::sqrt(acc * h);
}

double collocation_sup(const VectorXd& F, int nblocks, int d) {
    double m = 0.0;
    for (int i = 0; i < nblocks; ++i)
        m = std::max(m, F.segment(i * d, d).lpNorm<Eigen::Infinity>());
    return m;
}

MatrixXd values_of(const GridFunction& g) { return g.values(); }

}  // namespace

std::pair<double, double> flow_residual(const MorseProblem& problem, const GridFunction& u) {
    CollocationSystem sys{&problem, u.space().n_s(), problem.dim, u.space().domain().h, {}, {}};
    VectorXd F = sys.residual(values_of(u));
    return {collocation_norm(F, sys.N - 1, sys.d, sys.h), collocation_sup(F, sys.N - 1, sys.d)};
}

bool energy_monotone(const MorseProblem& problem, const GridFunction& u, double slack) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < u.space().n_s(); ++i) {
        double v = problem.value(u.values().row(i).transpose());
        if (v < prev - slack) return false;
        prev = v;
    }
    return true;
}

Trajectory solve_trajectory(const MorseProblem& problem, const VectorXd& a, const VectorXd& b,
                            const GridFunction& initial_guess, const TrajectoryOptions& opts) {
    if (problem.value(a) >= problem.value(b))
        throw PreconditionError("need Phi(a) < Phi(b) for a connecting orbit");
    ScaleSpace sp = trajectory_space(problem, opts);
    if (!sp.same_grid(initial_guess.space()))
        throw InvalidDomainError("initial guess lives on the wrong grid");
    const int d = problem.dim;
    const int N = sp.n_s();
    MatrixXd Ha = problem.hessian(a), Hb = problem.hessian(b);
    const int ma = morse_index(Ha), mb = morse_index(Hb);
    if (mb - ma != 1)
        throw PreconditionError("index difference " + std::to_string(mb - ma) +
                                " makes the boundary value problem " +
                                (mb - ma > 1 ? "underdetermined" : "overdetermined"));

    CollocationSystem sys{&problem, N, d, opts.h, {}, {}};
    MatrixXd Vs = stable_eigvecs(Ha, true);
    for (int c = 0; c < Vs.cols(); ++c)
        sys.linear_rows.push_back({{{0, Vs.col(c)}}, Vs.col(c).dot(a)});
    MatrixXd Vu = stable_eigvecs(Hb, false);
    for (int c = 0; c < Vu.cols(); ++c)
        sys.linear_rows.push_back({{{N - 1, Vu.col(c)}}, Vu.col(c).dot(b)});
    const int mid = (N - 1) / 2;
    const double target = 0.5 * (problem.value(a) + problem.value(b));
    sys.phase_row = {{mid, target}};

    // a guess that already solves the system is returned unchanged
    {
        VectorXd F0 = sys.residual(values_of(initial_guess));
        if (F0.norm() <= opts.tol) {
            Trajectory t{initial_guess, a,    b, ma, mb, collocation_norm(F0, N - 1, d, opts.h),
                         collocation_sup(F0, N - 1, d), target, 0, Normalization::Phase};
            t.u.set_asymptotics(a, b);
            return t;
        }
    }

    NewtonOutcome res = newton_solve(sys, values_of(initial_guess), opts.tol, opts.max_newton);
    if (!res.converged)
        throw NoTrajectoryFoundError("Newton stalled at residual " +
                                     std::to_string(res.final_residual) +
                                     " (not a proof of emptiness)");
    GridFunction u(sp, res.U, sp.levels_available() - 1);
    u.set_asymptotics(a, b);
    VectorXd F = sys.residual(res.U);
    Trajectory t{std::move(u), a,  b,  ma, mb, collocation_norm(F, N - 1, d, opts.h),
                 collocation_sup(F, N - 1, d), problem.value(res.U.row(mid).transpose()),
                 res.steps, Normalization::Phase};
    return t;
}

GridFunction trajectory_guess(const MorseProblem& problem, const VectorXd& a, const VectorXd& b,
                              const std::vector<VectorXd>& path, const TrajectoryOptions& opts) {
    ScaleSpace sp = trajectory_space(problem, opts);
    const double target = 0.5 * (problem.value(a) + problem.value(b));
    // anchor the phase: path sample closest to the midlevel
    int anchor = 0;
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < path.size(); ++i) {
        double dv = std::abs(problem.value(path[i]) - target);
        if (dv < best) {
            best = dv;
            anchor = static_cast<int>(i);
        }
    }
    // Path entries are spaced by one grid step of flow time, so node i sits
    // at path index anchor + s_i / h.
    MatrixXd U(sp.n_s(), problem.dim);
    for (int i = 0; i < sp.n_s(); ++i) {
        double tpos = anchor + sp.s_coord(i) / opts.h;
        if (tpos <= 0.0) {
            U.row(i) = a.transpose();
        } else if (tpos >= static_cast<double>(path.size() - 1)) {
            U.row(i) = b.transpose();
        } else {
            int i0 = static_cast<int>(std::floor(tpos));
            double f = tpos - i0;
            U.row(i) = ((1.0 - f) * path[i0] + f * path[i0 + 1]).transpose();
        }
    }
    GridFunction g(sp, U, sp.levels_available() - 1);
    g.set_asymptotics(a, b);
    return g;
}

EnumerationResult enumerate_trajectories_index1(const MorseProblem& problem,
                                                const std::string& from_label,
                                                const std::string& to_label,
                                                const EnumerationOptions& opts) {
    const CriticalPoint& A = problem.point(from_label);
    const CriticalPoint& B = problem.point(to_label);
    if (B.index - A.index != 1)
        throw PreconditionError("index-one enumeration needs m(b) - m(a) = 1, got " +
                                std::to_string(B.index - A.index));

    MatrixXd Vu = stable_eigvecs(problem.hessian(A.location), false);
    const int du = static_cast<int>(Vu.cols());
    std::vector<VectorXd> dirs;
    if (du == 1) {
        dirs.push_back(Vu.col(0));
        dirs.push_back(-Vu.col(0));
    } else if (du == 2) {
        for (int k = 0; k < opts.starts; ++k) {
            double ang = 2.0 * std::numbers::pi * k / opts.starts;
            dirs.push_back(std::cos(ang) * Vu.col(0) + std::sin(ang) * Vu.col(1));
        }
    } else {
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> gauss;
        for (int k = 0; k < opts.starts; ++k) {
            VectorXd c(du);
            for (int j = 0; j < du; ++j) c(j) = gauss(rng);
            c.normalize();
            dirs.push_back(Vu * c);
        }
    }

    EnumerationResult result;
    // step stride for storing the flow path: one sample per grid spacing
    const int stride = std::max(1, static_cast<int>(std::lround(opts.trajectory.h / opts.flow_dt)));
    for (const auto& dir : dirs) {
        VectorXd x = A.location + opts.launch_offset * dir;
        std::vector<VectorXd> path;
        path.push_back(A.location);
        bool captured = false;
        int step = 0;
        const int max_steps = static_cast<int>(opts.max_flow_time / opts.flow_dt);
        while (step < max_steps) {
            // classical RK4 on the gradient flow
            VectorXd k1 = problem.gradient(x);
            VectorXd k2 = problem.gradient(x + 0.5 * opts.flow_dt * k1);
            VectorXd k3 = problem.gradient(x + 0.5 * opts.flow_dt * k2);
            VectorXd k4 = problem.gradient(x + opts.flow_dt * k3);
            x += opts.flow_dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            ++step;
            if (step % stride == 0) path.push_back(x);
            if ((x - B.location).norm() < opts.capture_radius) {
                captured = true;
                break;
            }
            if (x.norm() > opts.escape_radius) break;
            if (problem.value(x) > B.value + 0.1 * std::abs(B.value - A.value) + 0.1) break;
        }
        if (!captured) continue;
        path.push_back(B.location);
        GridFunction guess = trajectory_guess(problem, A.location, B.location, path,
                                              opts.trajectory);
        std::optional<Trajectory> solved;
        try {
            solved = solve_trajectory(problem, A.location, B.location, guess, opts.trajectory);
        } catch (const NoTrajectoryFoundError&) {
            continue;
        }
        Trajectory& traj = *solved;
        bool dup = false;
        for (const auto& known : result.orbits)
            if ((known.u.values() - traj.u.values()).lpNorm<Eigen::Infinity>() < opts.dedup_tol)
                dup = true;
        if (dup) continue;

        // transversality proxy: the phase-pinned linearization must be
        // uniformly invertible
        {
            CollocationSystem sys{&problem, traj.u.space().n_s(), problem.dim,
                                  opts.trajectory.h,  {},        {}};
            MatrixXd Ha = problem.hessian(A.location), Hb = problem.hessian(B.location);
            MatrixXd Vs = stable_eigvecs(Ha, true);
            for (int c = 0; c < Vs.cols(); ++c)
                sys.linear_rows.push_back({{{0, Vs.col(c)}}, Vs.col(c).dot(A.location)});
            MatrixXd Vub = stable_eigvecs(Hb, false);
            for (int c = 0; c < Vub.cols(); ++c)
                sys.linear_rows.push_back(
                    {{{traj.u.space().n_s() - 1, Vub.col(c)}}, Vub.col(c).dot(B.location)});
            sys.phase_row = {{(traj.u.space().n_s() - 1) / 2,
                              0.5 * (problem.value(A.location) + problem.value(B.location))}};
            double smin = min_singular_estimate(sys.jacobian(traj.u.values()));
            if (smin < opts.transversality_tol) result.transversality_warning = true;
        }
        result.orbits.push_back(std::move(traj));
    }
    result.count_mod2 = static_cast<int>(result.orbits.size()) % 2;
    return result;
}

MorseCounting counting_function(const MorseProblem& problem, const EnumerationOptions& opts) {
    if (problem.critical_points.empty())
        throw PreconditionError("locate the critical points first");
    std::vector<std::pair<std::string, double>> pts;
    for (const auto& p : problem.critical_points) pts.emplace_back(p.label, p.value);
    MorseCounting out{degen::value_order_structure(pts), {}, false, {}};
    out.Q = algebra::CountingFunction::zeros(out.pairs.structure, algebra::Ring::Z2);
    out.orbits.resize(out.pairs.structure.labels.size());
    for (size_t k = 0; k < out.pairs.pair_endpoints.size(); ++k) {
        auto [ia, ib] = out.pairs.pair_endpoints[k];
        const std::string& la = out.pairs.point_labels[ia];
        const std::string& lb = out.pairs.point_labels[ib];
        int gap = problem.point(lb).index - problem.point(la).index;
        out.Q.set_parity(out.pairs.structure.labels[k], ((gap % 2) + 2) % 2);
        if (gap != 1) continue;
        EnumerationResult res = enumerate_trajectories_index1(problem, la, lb, opts);
        out.transversality_warning = out.transversality_warning || res.transversality_warning;
        out.Q.set(out.pairs.structure.labels[k], res.count_mod2);
        out.orbits[k] = std::move(res.orbits);
    }
    return out;
}

degen::GeneralizedRelator spectrum(const MorseProblem& problem, const BrokenTrajectory& x) {
    auto label_of = [&](const VectorXd& loc) -> std::string {
        for (const auto& p : problem.critical_points)
            if ((p.location - loc).norm() < 1e-6) return p.label;
        throw DomainError("endpoint is not a listed critical point");
    };
    degen::GeneralizedRelator out;
    for (const auto& c : x.components)
        out.sources.push_back(
            degen::PairStructure::pair_label(label_of(c.from), label_of(c.to)));
    out.target = degen::PairStructure::pair_label(label_of(x.components.front().from),
                                                  label_of(x.components.back().to));
    return out;
}

namespace {

ScaleSpace glued_window_space(const MorseProblem& problem, const ScaleSpace& comp_space,
                              double R) {
    double W = (comp_space.domain().s_hi - comp_space.domain().s_lo) / 2.0 + R / 2.0;
    return scspace::make_scale_space(DomainSpec::line(W, comp_space.domain().h), 0, {0.0, 0.25},
                                     problem.dim);
}

}  // namespace

PregluedCurve preglue_broken(const MorseProblem& problem, const BrokenTrajectory& x, double r,
                             const splicing::GluingProfile& profile,
                             const PregluingOptions& opts) {
    if (x.components.size() != 2)
        throw PreconditionError("pregluing expects a once-broken trajectory");
    const Trajectory& u1 = x.components[0];
    const Trajectory& u2 = x.components[1];
    if ((u1.to - u2.from).lpNorm<Eigen::Infinity>() > opts.interface_tol)
        throw InterfaceMismatchError("components do not share the intermediate critical point");
    double R = splicing::profile_length(profile, r);
    const double h = u1.u.space().domain().h;
    // round to an even grid multiple so R/2 stays on the grid
    int n2 = std::max(1, static_cast<int>(std::lround(R / (2.0 * h))));
    R = 2.0 * n2 * h;
    if (R > opts.max_length)
        throw ParameterOutOfRangeError("gluing length " + std::to_string(R) +
                                       " exceeds the representable window");
    ScaleSpace gsp = glued_window_space(problem, u1.u.space(), R);
    MatrixXd vals(gsp.n_s(), problem.dim);
    for (int i = 0; i < gsp.n_s(); ++i) {
        double sig = gsp.s_coord(i);
        double b = splicing::beta(sig);
        vals.row(i) = (b * eval_line(u1.u, sig + R / 2.0) +
                       (1.0 - b) * eval_line(u2.u, sig - R / 2.0))
                          .transpose();
    }
    GridFunction g(gsp, std::move(vals), gsp.levels_available() - 1);
    g.set_asymptotics(u1.from, u2.to);
    auto [rn, rs] = flow_residual(problem, g);
    return PregluedCurve{std::move(g), R, rn, rs, u1.from, u2.to};
}

CorrectedGluing correct_pregluing(const MorseProblem& problem, const BrokenTrajectory& x,
                                  const PregluedCurve& preglued, double r,
                                  const splicing::GluingProfile& profile,
                                  const CorrectionOptions& opts) {
    if (x.components.size() != 2)
        throw PreconditionError("correction expects a once-broken trajectory");
    if (r > 0.0 && std::abs(splicing::profile_length(profile, r) - preglued.R) >
                       std::max(1.0, preglued.R))
        throw DomainError("gluing parameter does not match the preglued curve");
    const Trajectory& u1 = x.components[0];
    const Trajectory& u2 = x.components[1];
    const VectorXd a = u1.from, c = u2.to;
    const double R = preglued.R;
    const ScaleSpace& gsp = preglued.u.space();
    const int N = gsp.n_s();
    const int d = problem.dim;
    const double h = gsp.domain().h;
    MatrixXd Ha = problem.hessian(a), Hc = problem.hessian(c);
    const int ma = morse_index(Ha), mc = morse_index(Hc);
    if (mc - ma != 2)
        throw PreconditionError("glued correction needs index difference two, got " +
                                std::to_string(mc - ma));

    CollocationSystem sys{&problem, N, d, h, {}, {}};
    MatrixXd Vs = stable_eigvecs(Ha, true);
    for (int col = 0; col < Vs.cols(); ++col)
        sys.linear_rows.push_back({{{0, Vs.col(col)}}, Vs.col(col).dot(a)});
    MatrixXd Vu = stable_eigvecs(Hc, false);
    for (int col = 0; col < Vu.cols(); ++col)
        sys.linear_rows.push_back({{{N - 1, Vu.col(col)}}, Vu.col(col).dot(c)});

    // Slice rows: the correction, viewed through the inverse total gluing as
    // a ker(antiglue) pair (h, k), keeps h(0) orthogonal to the flow of u1
    // and k(0) orthogonal to the flow of u2. With the base subtracted these
    // are pinned-node conditions at sigma = -R/2 and +R/2.
    const int node_a = static_cast<int>(std::lround((-R / 2.0 - gsp.domain().s_lo) / h));
    const int node_c = static_cast<int>(std::lround((R / 2.0 - gsp.domain().s_lo) / h));
    {
        double ba = splicing::beta(-R / 2.0);
        double deta = ba * ba + (1.0 - ba) * (1.0 - ba);
        VectorXd va = problem.gradient(u1.u.values().row((u1.u.space().n_s() - 1) / 2).transpose());
        VectorXd coef = (ba / deta) * va;
        sys.linear_rows.push_back(
            {{{node_a, coef}}, coef.dot(preglued.u.values().row(node_a).transpose())});
        double bc = splicing::beta(R / 2.0);
        double detc = bc * bc + (1.0 - bc) * (1.0 - bc);
        VectorXd vc = problem.gradient(u2.u.values().row((u2.u.space().n_s() - 1) / 2).transpose());
        VectorXd coefc = ((1.0 - bc) / detc) * vc;
        sys.linear_rows.push_back(
            {{{node_c, coefc}}, coefc.dot(preglued.u.values().row(node_c).transpose())});
    }

    NewtonOutcome res = newton_solve(sys, preglued.u.values(), opts.tol, opts.max_newton);
    if (!res.converged) {
        std::string hist;
        for (double v : res.history) hist += " " + std::to_string(v);
        throw CorrectionFailureError("correction left the basin; residual history:" + hist);
    }

    GridFunction w(gsp, res.U, gsp.levels_available() - 1);
    w.set_asymptotics(a, c);
    auto [rn, rs] = flow_residual(problem, w);
    Trajectory corrected{w,  a,  c,  ma, mc, rn, rs,
                         problem.value(res.U.row((N - 1) / 2).transpose()),
                         res.steps, Normalization::Slice};

    // Recover the slice pair and the corrected components.
    const ScaleSpace& csp = u1.u.space();
    MatrixXd hv(csp.n_s(), d), kv(csp.n_s(), d);
    for (int i = 0; i < csp.n_s(); ++i) {
        double tau = csp.s_coord(i);
        double sig_h = tau - R / 2.0;
        double sig_k = tau + R / 2.0;
        double bh = splicing::beta(sig_h);
        double dh = bh * bh + (1.0 - bh) * (1.0 - bh);
        VectorXd diff_h = eval_line(w, sig_h) - eval_line(preglued.u, sig_h);
        hv.row(i) = (bh / dh * diff_h).transpose();
        double bk = splicing::beta(sig_k);
        double dk = bk * bk + (1.0 - bk) * (1.0 - bk);
        VectorXd diff_k = eval_line(w, sig_k) - eval_line(preglued.u, sig_k);
        kv.row(i) = ((1.0 - bk) / dk * diff_k).transpose();
    }
    GridFunction cp(csp, u1.u.values() + hv, u1.u.declared_level());
    cp.set_asymptotics(u1.u.asym_left(), u1.u.asym_right());
    GridFunction cm(csp, u2.u.values() + kv, u2.u.declared_level());
    cm.set_asymptotics(u2.u.asym_left(), u2.u.asym_right());

    // shifted sup distance of each corrected component to its original
    auto shifted_distance = [&](const GridFunction& corr, const GridFunction& orig) {
        double best = std::numeric_limits<double>::infinity();
        const double step = h / 4.0;
        const int K = static_cast<int>(std::lround(opts.shift_search / step));
        for (int k = -K; k <= K; ++k) {
            double delta = k * step;
            double worst = 0.0;
            for (int i = 0; i < csp.n_s(); ++i) {
                VectorXd diff = corr.values().row(i).transpose() -
                                eval_line(orig, csp.s_coord(i) + delta);
                worst = std::max(worst, diff.lpNorm<Eigen::Infinity>());
            }
            best = std::min(best, worst);
        }
        return best;
    };
    double dist = std::max(shifted_distance(cp, u1.u), shifted_distance(cm, u2.u));

    return CorrectedGluing{std::move(corrected), std::move(cp), std::move(cm), rn, dist};
}

std::vector<degen::Element> solution_elements(const MorseCounting& counting) {
    const auto& s = counting.pairs.structure;
    std::vector<degen::Element> all;
    for (size_t k = 0; k < counting.orbits.size(); ++k)
        for (size_t j = 0; j < counting.orbits[k].size(); ++j)
            all.push_back(degen::Element::prime(
                "T" + s.labels[k] + "#" + std::to_string(j), s.labels[k]));

    degen::OperationTable table{s};
    std::set<degen::Element> known(all.begin(), all.end());
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<degen::Element> snapshot(known.begin(), known.end());
        for (const auto& rel : s.relators) {
            std::array<std::string, 3> rl = {s.labels[rel[0]], s.labels[rel[1]],
                                             s.labels[rel[2]]};
            for (const auto& ea : snapshot) {
                if (ea.membership != rl[0]) continue;
                for (const auto& eb : snapshot) {
                    if (eb.membership != rl[1]) continue;
                    degen::Element comp = degen::compose(table, rl, ea, eb);
                    if (known.insert(comp).second) grew = true;
                }
            }
        }
    }
    return std::vector<degen::Element>(known.begin(), known.end());
}

}  // namespace scfred::morse
