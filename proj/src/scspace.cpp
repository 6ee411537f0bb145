#include "scfred/scspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scfred/errors.hpp"

namespace scfred::scspace {

namespace {

int grid_nodes(const DomainSpec& d) {
    if (d.h <= 0.0) return 0;
    double span = d.s_hi - d.s_lo;
    if (span <= 0.0) return 0;
    double n = span / d.h;
    int ni = static_cast<int>(std::lround(n));
    if (std::abs(n - ni) > 1e-9) ni = static_cast<int>(std::floor(n));
    return ni + 1;
}

/// First derivative in s: centered interior, one-sided second order edges.
MatrixXd d_s(const ScaleSpace& sp, const MatrixXd& v) {
    const int ns = sp.n_s(), nt = sp.n_t(), dim = static_cast<int>(v.cols());
    const double h = sp.domain().h;
    MatrixXd out(v.rows(), v.cols());
    for (int it = 0; it < nt; ++it) {
        auto row = [&](int is) { return sp.node_index(is, it); };
        for (int d = 0; d < dim; ++d) {
            if (ns == 1) {
                out(row(0), d) = 0.0;
                continue;
            }
            out(row(0), d) = (-3.0 * v(row(0), d) + 4.0 * v(row(1), d) -
                              (ns > 2 ? v(row(2), d) : v(row(1), d))) /
                             (ns > 2 ? 2.0 * h : h);
            out(row(ns - 1), d) = (3.0 * v(row(ns - 1), d) - 4.0 * v(row(ns - 2), d) +
                                   (ns > 2 ? v(row(ns - 3), d) : v(row(ns - 2), d))) /
                                  (ns > 2 ? 2.0 * h : h);
            for (int is = 1; is < ns - 1; ++is)
                out(row(is), d) = (v(row(is + 1), d) - v(row(is - 1), d)) / (2.0 * h);
        }
    }
    return out;
}

/// First derivative in t, periodic centered differences.
MatrixXd d_t(const ScaleSpace& sp, const MatrixXd& v) {
    const int ns = sp.n_s(), nt = sp.n_t(), dim = static_cast<int>(v.cols());
    const double ht = 1.0 / nt;
    MatrixXd out(v.rows(), v.cols());
    for (int is = 0; is < ns; ++is) {
        for (int it = 0; it < nt; ++it) {
            int ip = (it + 1) % nt, im = (it + nt - 1) % nt;
            for (int d = 0; d < dim; ++d)
                out(sp.node_index(is, it), d) =
                    (v(sp.node_index(is, ip), d) - v(sp.node_index(is, im), d)) / (2.0 * ht);
        }
    }
    return out;
}

double weighted_term(const ScaleSpace& sp, const MatrixXd& v, double delta) {
    double acc = 0.0;
    const int nt = sp.n_t();
    for (int is = 0; is < sp.n_s(); ++is) {
        double w = std::exp(2.0 * delta * std::abs(sp.s_coord(is)));
        for (int it = 0; it < nt; ++it) acc += w * v.row(sp.node_index(is, it)).squaredNorm();
    }
    return acc * sp.cell_measure();
}

/// All derivative combinations of total order <= ord, by iterating d_s/d_t.
void for_each_derivative(const ScaleSpace& sp, const MatrixXd& v, int ord,
                         const std::function<void(const MatrixXd&)>& visit) {
    if (sp.domain().kind == DomainKind::Line) {
        MatrixXd cur = v;
        visit(cur);
        for (int a = 1; a <= ord; ++a) {
            cur = d_s(sp, cur);
            visit(cur);
        }
        return;
    }
    // Cylinder: d_s^i then d_t^j for i + j <= ord.
    MatrixXd si = v;
    for (int i = 0; i <= ord; ++i) {
        if (i > 0) si = d_s(sp, si);
        MatrixXd cur = si;
        visit(cur);
        for (int j = 1; i + j <= ord; ++j) {
            cur = d_t(sp, cur);
            visit(cur);
        }
    }
}

struct CubicWeights {
    double w[4];
};

CubicWeights catmull_rom(double x) {
    CubicWeights c;
    c.w[0] = -0.5 * x + x * x - 0.5 * x * x * x;
    c.w[1] = 1.0 - 2.5 * x * x + 1.5 * x * x * x;
    c.w[2] = 0.5 * x + 2.0 * x * x - 1.5 * x * x * x;
    c.w[3] = -0.5 * x * x + 0.5 * x * x * x;
    return c;
}

}  // namespace

ScaleSpace::ScaleSpace(const DomainSpec& d, int base_order, std::vector<double> weights,
                       int target_dim)
    : domain_(d), base_order_(base_order), weights_(std::move(weights)), target_dim_(target_dim) {
    n_s_ = grid_nodes(domain_);
}

double ScaleSpace::cell_measure() const {
    double m = domain_.h;
    if (domain_.kind == DomainKind::Cylinder) m /= n_t();
    return m;
}

bool ScaleSpace::same_grid(const ScaleSpace& o) const {
    return domain_.kind == o.domain_.kind && std::abs(domain_.s_lo - o.domain_.s_lo) < 1e-12 &&
           std::abs(domain_.s_hi - o.domain_.s_hi) < 1e-12 &&
           std::abs(domain_.h - o.domain_.h) < 1e-12 && n_t() == o.n_t() &&
           target_dim_ == o.target_dim_;
}

ScaleSpace make_scale_space(const DomainSpec& domain, int base_order,
                            const std::vector<double>& weights, int target_dim) {
    if (domain.h <= 0.0 || domain.s_hi <= domain.s_lo || grid_nodes(domain) < 2)
        throw InvalidDomainError("empty or degenerate grid");
    if (domain.kind == DomainKind::Cylinder && domain.n_t < 4)
        throw InvalidDomainError("cylinder needs at least 4 circle nodes");
    if (target_dim < 1) throw InvalidDomainError("target_dim must be >= 1");
    if (base_order < 0) throw InvalidDomainError("base_order must be >= 0");
    if (weights.empty()) throw InvalidWeightsError("need at least one weight");
    if (weights.front() < 0.0) throw InvalidWeightsError("weights must be nonnegative");
    for (size_t i = 1; i < weights.size(); ++i)
        if (weights[i] <= weights[i - 1])
            throw InvalidWeightsError("weights must increase strictly");
    double bound = std::numeric_limits<double>::infinity();
    if (domain.weight_bound) bound = *domain.weight_bound;
    if (domain.kind == DomainKind::Cylinder)
        bound = std::min(bound, 2.0 * std::numbers::pi);
    for (double w : weights)
        if (w >= bound)
            throw InvalidWeightsError("weight " + std::to_string(w) +
                                      " reaches the declared bound " + std::to_string(bound));
    return ScaleSpace(domain, base_order, weights, target_dim);
}

ScaleSpace make_scale_space_unchecked(const DomainSpec& domain, int base_order,
                                      const std::vector<double>& weights, int target_dim) {
    if (grid_nodes(domain) < 2) throw InvalidDomainError("empty or degenerate grid");
    return ScaleSpace(domain, base_order, weights, target_dim);
}

GridFunction::GridFunction(ScaleSpace space, MatrixXd values, int declared_level)
    : space_(std::move(space)), values_(std::move(values)), declared_level_(declared_level) {
    if (values_.rows() != space_.node_count() || values_.cols() != space_.target_dim())
        throw InvalidDomainError("value array does not match the grid");
    if (declared_level_ < 0 || declared_level_ > space_.levels_available() - 1)
        throw LevelOutOfRangeError("declared level outside the available levels");
    // Default extension: edge node values (averaged over the circle).
    const int nt = space_.n_t();
    asym_left_ = VectorXd::Zero(space_.target_dim());
    asym_right_ = VectorXd::Zero(space_.target_dim());
    for (int it = 0; it < nt; ++it) {
        asym_left_ += values_.row(space_.node_index(0, it)).transpose();
        asym_right_ += values_.row(space_.node_index(space_.n_s() - 1, it)).transpose();
    }
    asym_left_ /= nt;
    asym_right_ /= nt;
}

void GridFunction::set_asymptotics(VectorXd left, VectorXd right) {
    if (left.size() != space_.target_dim() || right.size() != space_.target_dim())
        throw InvalidDomainError("asymptotic vector has wrong dimension");
    asym_left_ = std::move(left);
    asym_right_ = std::move(right);
}

GridFunction GridFunction::operator+(const GridFunction& o) const {
    if (!space_.same_grid(o.space_)) throw InvalidDomainError("grid mismatch");
    GridFunction r(space_, values_ + o.values_, std::min(declared_level_, o.declared_level_));
    r.set_asymptotics(asym_left_ + o.asym_left_, asym_right_ + o.asym_right_);
    return r;
}

GridFunction GridFunction::operator-(const GridFunction& o) const {
    if (!space_.same_grid(o.space_)) throw InvalidDomainError("grid mismatch");
    GridFunction r(space_, values_ - o.values_, std::min(declared_level_, o.declared_level_));
    r.set_asymptotics(asym_left_ - o.asym_left_, asym_right_ - o.asym_right_);
    return r;
}

GridFunction GridFunction::operator*(double s) const {
    GridFunction r(space_, values_ * s, declared_level_);
    r.set_asymptotics(asym_left_ * s, asym_right_ * s);
    return r;
}

GridFunction GridFunction::zero(const ScaleSpace& space, int level) {
    return GridFunction(space, MatrixXd::Zero(space.node_count(), space.target_dim()), level);
}

GridFunction GridFunction::from_line(const ScaleSpace& space,
                                     const std::function<VectorXd(double)>& f, int level) {
    MatrixXd v(space.node_count(), space.target_dim());
    for (int is = 0; is < space.n_s(); ++is) v.row(is) = f(space.s_coord(is)).transpose();
    return GridFunction(space, std::move(v), level);
}

GridFunction GridFunction::from_cylinder(const ScaleSpace& space,
                                         const std::function<VectorXd(double, double)>& f,
                                         int level) {
    MatrixXd v(space.node_count(), space.target_dim());
    for (int is = 0; is < space.n_s(); ++is)
        for (int it = 0; it < space.n_t(); ++it)
            v.row(space.node_index(is, it)) = f(space.s_coord(is), space.t_coord(it)).transpose();
    return GridFunction(space, std::move(v), level);
}

double level_norm(const GridFunction& u, int m) {
    const ScaleSpace& sp = u.space();
    if (m < 0 || m > u.declared_level())
        throw LevelOutOfRangeError("requested level " + std::to_string(m) +
                                   " above declared level " +
                                   std::to_string(u.declared_level()));
    const double delta = sp.weights()[m];
    double acc = 0.0;
    for_each_derivative(sp, u.values(), sp.base_order() + m,
                        [&](const MatrixXd& d) { acc += weighted_term(sp, d, delta); });
    return std::sqrt(acc);
}

namespace {

/// Gram matrix of the level-m inner product over nodal coordinates.
MatrixXd gram_matrix(const ScaleSpace& sp, int m, int order) {
    const int n = sp.node_count() * sp.target_dim();
    MatrixXd G = MatrixXd::Zero(n, n);
    const double delta = sp.weights()[m];
    // Assemble via columns: G = sum_a A_a^T A_a with A_a the weighted
    // derivative operator. Operators act per target component identically, so
    // work component-blocked.
    const int nodes = sp.node_count();
    MatrixXd basis = MatrixXd::Identity(nodes, nodes);
    std::vector<MatrixXd> ops;
    for_each_derivative(sp, basis, order, [&](const MatrixXd& d) {
        MatrixXd W = d;
        for (int is = 0; is < sp.n_s(); ++is) {
            double w = std::exp(delta * std::abs(sp.s_coord(is)));
            for (int it = 0; it < sp.n_t(); ++it) W.row(sp.node_index(is, it)) *= w;
        }
        ops.push_back(std::move(W));
    });
    MatrixXd Gn = MatrixXd::Zero(nodes, nodes);
    for (const auto& A : ops) Gn += A.transpose() * A;
    Gn *= sp.cell_measure();
    const int dim = sp.target_dim();
    if (dim == 1) return Gn;
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j)
            for (int d = 0; d < dim; ++d) G(i * dim + d, j * dim + d) = Gn(i, j);
    return G;
}

}  // namespace

DecayReport embedding_diagnostic(const ScaleSpace& space, int m_lower, int m_higher,
                                 int rank_budget, double threshold, bool same_order_control) {
    if (m_lower >= m_higher) throw InvalidPairError("need m_lower < m_higher");
    if (m_higher > space.levels_available() - 1)
        throw LevelOutOfRangeError("m_higher above available levels");
    DecayReport rep;
    rep.threshold = threshold;
    rep.rank_budget = rank_budget;
    if (rank_budget <= 0) return rep;

    const int order_lo = space.base_order() + (same_order_control ? 0 : m_lower);
    const int order_hi = space.base_order() + (same_order_control ? 0 : m_higher);
    MatrixXd Glo = gram_matrix(space, m_lower, order_lo);
    MatrixXd Ghi = gram_matrix(space, m_higher, order_hi);
    // Largest |u|_lo over the unit ball of |.|_hi and its lower analogues:
    // generalized eigenvalues of Glo v = lambda Ghi v.
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(Glo, Ghi);
    if (es.info() != Eigen::Success) throw EvaluationError("generalized eigensolver failed");
    VectorXd lam = es.eigenvalues();
    std::vector<double> sv;
    for (int i = lam.size() - 1; i >= 0; --i) sv.push_back(std::sqrt(std::max(0.0, lam(i))));
    if (static_cast<int>(sv.size()) > rank_budget) sv.resize(rank_budget);
    rep.singular_values = sv;
    if (!sv.empty() && sv.front() > 0.0)
        rep.compactness_consistent = sv.back() / sv.front() <= threshold;
    return rep;
}

namespace {

/// Cubic sample of u at fractional s-index x and circle coordinate t in
/// node units; s-stencils beyond the window read the asymptotic constants.
VectorXd sample_cylinder(const GridFunction& u, double xs, double xt) {
    const ScaleSpace& sp = u.space();
    const int ns = sp.n_s(), nt = sp.n_t();
    int i0 = static_cast<int>(std::floor(xs));
    double fs = xs - i0;
    int j0 = static_cast<int>(std::floor(xt));
    double ft = xt - j0;
    CubicWeights cs = catmull_rom(fs);
    CubicWeights ct = catmull_rom(ft);
    VectorXd acc = VectorXd::Zero(sp.target_dim());
    for (int a = -1; a <= 2; ++a) {
        int is = i0 + a;
        VectorXd row = VectorXd::Zero(sp.target_dim());
        if (is < 0) {
            row = u.asym_left();
        } else if (is >= ns) {
            row = u.asym_right();
        } else {
            for (int b = -1; b <= 2; ++b) {
                int it = ((j0 + b) % nt + nt) % nt;
                row += ct.w[b + 1] * u.values().row(sp.node_index(is, it)).transpose();
            }
            acc += cs.w[a + 1] * row;
            continue;
        }
        acc += cs.w[a + 1] * row;  // constant in t outside the window
    }
    return acc;
}

}  // namespace

VectorXd eval_cylinder(const GridFunction& u, double s, double t) {
    const ScaleSpace& sp = u.space();
    const double xs = (s - sp.domain().s_lo) / sp.domain().h;
    const double xt = t * sp.n_t();
    // Snap to nodes when the coordinate is a grid multiple so that aligned
    // evaluations are exact reads.
    double xs_r = std::lround(xs), xt_r = std::lround(xt);
    bool s_on = std::abs(xs - xs_r) < 1e-9, t_on = std::abs(xt - xt_r) < 1e-9;
    if (s_on && t_on) {
        int is = static_cast<int>(xs_r);
        if (is < 0) return u.asym_left();
        if (is >= sp.n_s()) return u.asym_right();
        int it = (static_cast<int>(xt_r) % sp.n_t() + sp.n_t()) % sp.n_t();
        return u.values().row(sp.node_index(is, it)).transpose();
    }
    return sample_cylinder(u, s_on ? xs_r : xs, t_on ? xt_r : xt);
}

VectorXd eval_line(const GridFunction& u, double s) {
    const ScaleSpace& sp = u.space();
    const double xs = (s - sp.domain().s_lo) / sp.domain().h;
    double xs_r = std::lround(xs);
    if (std::abs(xs - xs_r) < 1e-9) {
        int is = static_cast<int>(xs_r);
        if (is < 0) return u.asym_left();
        if (is >= sp.n_s()) return u.asym_right();
        return u.values().row(sp.node_index(is, 0)).transpose();
    }
    int i0 = static_cast<int>(std::floor(xs));
    CubicWeights cw = catmull_rom(xs - i0);
    VectorXd acc = VectorXd::Zero(sp.target_dim());
    for (int a = -1; a <= 2; ++a) {
        int is = i0 + a;
        if (is < 0)
            acc += cw.w[a + 1] * u.asym_left();
        else if (is >= sp.n_s())
            acc += cw.w[a + 1] * u.asym_right();
        else
            acc += cw.w[a + 1] * u.values().row(sp.node_index(is, 0)).transpose();
    }
    return acc;
}

GridFunction translation_action(const GridFunction& u, double c, double rho) {
    const ScaleSpace& sp = u.space();
    if (sp.domain().kind != DomainKind::Cylinder)
        throw InvalidDomainError("translation action needs a cylinder domain");
    if (c == 0.0 && rho == 0.0) return u;
    const double h = sp.domain().h;
    const int nt = sp.n_t();
    MatrixXd out(sp.node_count(), sp.target_dim());
    for (int is = 0; is < sp.n_s(); ++is) {
        double xs = is + c / h;
        for (int it = 0; it < nt; ++it) {
            double xt = it + rho * nt;
            out.row(sp.node_index(is, it)) = sample_cylinder(u, xs, xt).transpose();
        }
    }
    GridFunction r(sp, std::move(out), u.declared_level());
    r.set_asymptotics(u.asym_left(), u.asym_right());
    return r;
}

Sc1Report sc1_check_ray(const std::function<GridFunction(double)>& g, double dir_norm,
                        const std::vector<double>& steps, int m_num) {
    if (steps.empty()) throw EvaluationError("empty step sequence");
    if (dir_norm <= 0.0) throw EvaluationError("direction norm must be positive");
    double tau0 = *std::min_element(steps.begin(), steps.end()) / 16.0;

    GridFunction f0 = g(0.0);
    // Fourth-order derivative estimate at a step well below the sweep.
    GridFunction d = (g(-2.0 * tau0) - g(2.0 * tau0) + (g(tau0) - g(-tau0)) * 8.0) *
                     (1.0 / (12.0 * tau0));

    Sc1Report rep;
    double scale = std::max(1.0, level_norm(f0, std::min(m_num, f0.declared_level())));
    for (double tau : steps) {
        GridFunction rem = g(tau) - f0 - d * tau;
        double r = level_norm(rem, std::min(m_num, rem.declared_level()));
        if (!std::isfinite(r)) throw EvaluationError("non-finite evaluation in sc1 check");
        rep.rows.push_back({tau, r, r / (std::abs(tau) * dir_norm)});
    }
    // Log-log slope over informative rows.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& row : rep.rows) {
        if (row.quotient <= 1e-13 * scale) continue;
        double x = std::log(row.step), y = std::log(row.quotient);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n == 0) {
        rep.affine_zero = true;
        rep.observed_order = std::numeric_limits<double>::infinity();
    } else if (n == 1) {
        rep.observed_order = 0.0;
    } else {
        rep.observed_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    rep.pass = rep.affine_zero || rep.observed_order >= 0.9;
    return rep;
}

Sc1Report sc1_check(const std::function<GridFunction(const GridFunction&)>& f,
                    const GridFunction& u, const GridFunction& h, const std::vector<double>& steps,
                    int m_num, int m_den) {
    if (u.declared_level() < m_den)
        throw LevelOutOfRangeError("base point must live on the denominator level");
    double hn = level_norm(h, std::min(m_den, h.declared_level()));
    return sc1_check_ray([&](double tau) { return f(u + h * tau); }, hn, steps, m_num);
}

ScaleSpace space_from_config(const Config& cfg, const std::string& section) {
    std::string kind = cfg.get_string(section, "domain", "line");
    double L = cfg.get_double(section, "L");
    double h = cfg.get_double(section, "h");
    DomainSpec d = kind == "cylinder"
                       ? DomainSpec::cylinder(L, h, static_cast<int>(cfg.get_int(section, "n_t", 32)))
                       : DomainSpec::line(L, h);
    if (kind != "cylinder" && kind != "line")
        throw InvalidDomainError("unknown domain kind '" + kind + "'");
    if (cfg.has(section, "weight_bound")) d.weight_bound = cfg.get_double(section, "weight_bound");
    std::vector<double> weights = cfg.get_doubles(section, "weights");
    return make_scale_space(d, static_cast<int>(cfg.get_int(section, "base_order", 0)), weights,
                            static_cast<int>(cfg.get_int(section, "target_dim", 1)));
}

}  // namespace scfred::scspace
