#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scfred/config.hpp"

namespace scfred::scspace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class DomainKind { Line, Cylinder };

/// Truncated domain: a line window [s_lo, s_hi] with spacing h, optionally
/// crossed with a uniform circle grid of n_t nodes (period 1).
struct DomainSpec {
    DomainKind kind = DomainKind::Line;
    double s_lo = -10.0;
    double s_hi = 10.0;
    double h = 0.1;
    int n_t = 32;  // circle nodes, cylinder only

    /// Upper bound the weights must stay strictly below. Cylinder domains
    /// always enforce 2*pi on top of this; a Morse configuration passes the
    /// spectral gap of the relevant Hessian here.
    std::optional<double> weight_bound;

    static DomainSpec line(double L, double h) {
        return DomainSpec{DomainKind::Line, -L, L, h, 0, std::nullopt};
    }
    static DomainSpec line_window(double s_lo, double s_hi, double h) {
        return DomainSpec{DomainKind::Line, s_lo, s_hi, h, 0, std::nullopt};
    }
    static DomainSpec cylinder(double L, double h, int n_t) {
        return DomainSpec{DomainKind::Cylinder, -L, L, h, n_t, std::nullopt};
    }
    static DomainSpec cylinder_window(double s_lo, double s_hi, double h, int n_t) {
        return DomainSpec{DomainKind::Cylinder, s_lo, s_hi, h, n_t, std::nullopt};
    }
};

/// A nested family of discrete weighted Sobolev norms over one grid.
/// Level m measures base_order + m finite-difference derivatives, each
/// weighted pointwise by exp(delta_m * |s|). Weights increase strictly with
/// the level, which makes the filtration monotone with constant 1.
class ScaleSpace {
public:
    const DomainSpec& domain() const { return domain_; }
    int base_order() const { return base_order_; }
    const std::vector<double>& weights() const { return weights_; }
    int target_dim() const { return target_dim_; }
    int levels_available() const { return static_cast<int>(weights_.size()); }

    int n_s() const { return n_s_; }
    int n_t() const { return domain_.kind == DomainKind::Cylinder ? domain_.n_t : 1; }
    int node_count() const { return n_s_ * n_t(); }
    double s_coord(int is) const { return domain_.s_lo + is * domain_.h; }
    double t_coord(int it) const { return static_cast<double>(it) / n_t(); }
    int node_index(int is, int it) const { return is * n_t() + it; }
    double cell_measure() const;

    bool same_grid(const ScaleSpace& other) const;

    friend ScaleSpace make_scale_space(const DomainSpec&, int, const std::vector<double>&, int);
    friend ScaleSpace make_scale_space_unchecked(const DomainSpec&, int, const std::vector<double>&,
                                                 int);

private:
    ScaleSpace(const DomainSpec& d, int base_order, std::vector<double> weights, int target_dim);

    DomainSpec domain_;
    int base_order_;
    std::vector<double> weights_;
    int target_dim_;
    int n_s_;
};

/// Validating constructor. Throws InvalidWeightsError for non-increasing or
/// out-of-bound weights, InvalidDomainError for an empty or degenerate grid.
ScaleSpace make_scale_space(const DomainSpec& domain, int base_order,
                            const std::vector<double>& weights, int target_dim);

/// Skips the weight checks. Exists so diagnostics can be run against
/// deliberately degenerate controls (equal weights, flat profiles).
ScaleSpace make_scale_space_unchecked(const DomainSpec& domain, int base_order,
                                      const std::vector<double>& weights, int target_dim);

/// Grid samples of a target_dim-valued map, tagged with the level it is
/// declared to live on. Values are stored one node per row. The asymptotic
/// vectors give the constant extension used outside the truncation window.
class GridFunction {
public:
    GridFunction(ScaleSpace space, MatrixXd values, int declared_level);

    const ScaleSpace& space() const { return space_; }
    const MatrixXd& values() const { return values_; }
    MatrixXd& values() { return values_; }
    int declared_level() const { return declared_level_; }

    const VectorXd& asym_left() const { return asym_left_; }
    const VectorXd& asym_right() const { return asym_right_; }
    void set_asymptotics(VectorXd left, VectorXd right);

    GridFunction operator+(const GridFunction& other) const;
    GridFunction operator-(const GridFunction& other) const;
    GridFunction operator*(double scale) const;

    static GridFunction zero(const ScaleSpace& space, int level);
    static GridFunction from_line(const ScaleSpace& space,
                                  const std::function<VectorXd(double)>& f, int level);
    static GridFunction from_cylinder(const ScaleSpace& space,
                                      const std::function<VectorXd(double, double)>& f, int level);

private:
    ScaleSpace space_;
    MatrixXd values_;
    int declared_level_;
    VectorXd asym_left_;
    VectorXd asym_right_;
};

/// Discrete weighted Sobolev norm of u at level m.
double level_norm(const GridFunction& u, int m);

/// Cubic evaluation at an arbitrary coordinate; exact at grid nodes, constant
/// asymptotic extension outside the window.
VectorXd eval_line(const GridFunction& u, double s);
VectorXd eval_cylinder(const GridFunction& u, double s, double t);

/// Report on the singular values of the identity map from the level-m_higher
/// unit ball into level m_lower.
struct DecayReport {
    std::vector<double> singular_values;  // non-increasing, at most rank_budget entries
    bool compactness_consistent = false;
    double threshold = 0.0;
    int rank_budget = 0;
};

/// same_order_control freezes both levels at base_order derivatives; with
/// equal weights this is the degenerate control that must come out flat.
DecayReport embedding_diagnostic(const ScaleSpace& space, int m_lower, int m_higher,
                                 int rank_budget, double threshold = 1e-3,
                                 bool same_order_control = false);

/// The translation group action on cylinder functions:
/// result(s, t) = u(s + c, t + rho), cubic interpolation, asymptotic-constant
/// extension beyond the window. Shifting by (0, 0) is exactly the identity.
GridFunction translation_action(const GridFunction& u, double c, double rho);

struct Sc1Report {
    struct Row {
        double step;
        double remainder;  // level-m_num norm of f(u+th) - f(u) - t*Df(u)h
        double quotient;   // remainder / (|t| * level-m_den norm of h)
    };
    std::vector<Row> rows;
    double observed_order = 0.0;  // log-log slope of the quotient in the step
    bool affine_zero = false;     // all remainders at round-off level
    bool pass = false;
};

/// Finite-difference linearization check along the ray tau -> g(tau), where
/// the caller supplies the direction norm appearing in the denominator.
Sc1Report sc1_check_ray(const std::function<GridFunction(double)>& g, double dir_norm,
                        const std::vector<double>& steps, int m_num = 0);

/// Checks the mixed-norm quotient |f(u+h)-f(u)-Df(u)h|_0 / |h|_1 along a
/// direction h, with Df estimated by a high-order difference at a tiny step.
Sc1Report sc1_check(const std::function<GridFunction(const GridFunction&)>& f,
                    const GridFunction& u, const GridFunction& h, const std::vector<double>& steps,
                    int m_num = 0, int m_den = 1);

/// Reads [space] keys: domain, L, h, n_t, base_order, weights, target_dim.
ScaleSpace space_from_config(const Config& cfg, const std::string& section = "space");

}  // namespace scfred::scspace
