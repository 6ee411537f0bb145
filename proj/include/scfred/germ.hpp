#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "scfred/scspace.hpp"

namespace scfred::germ {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Parameterized contraction normal form f(v, u) = u - B(v, u) anchored at
/// (0, 0), with per-level contraction factors and trust radii. Parameters
/// live in an open piece of the partial cone [0,inf)^cone_dim x R^(rest).
struct ContractionGerm {
    int param_dim = 1;
    int cone_dim = 0;
    int u_dim = 1;
    std::function<VectorXd(const VectorXd& v, const VectorXd& u, int level)> B;
    std::vector<double> theta;        // contraction factor per level
    std::vector<double> trust_radii;  // neighborhood size per level
    std::function<double(const VectorXd&, int)> level_norm;  // defaults to Euclidean

    int levels() const { return static_cast<int>(theta.size()); }
    double norm(const VectorXd& u, int level) const {
        return level_norm ? level_norm(u, level) : u.norm();
    }
};

/// Builds a germ and verifies its defining properties on samples: B(0,0) = 0
/// and the level-wise Lipschitz bound |B(v,u) - B(v,u')| <= theta |u - u'|
/// on `samples` random pairs inside the trust radii. Violations abort with
/// NotAContractionError. Trust radii default to base_radius shrinking by 1/2
/// per level.
ContractionGerm make_contraction_germ(
    int param_dim, int cone_dim, int u_dim,
    std::function<VectorXd(const VectorXd&, const VectorXd&, int)> B, std::vector<double> theta,
    double base_radius = 1.0, int samples = 200, unsigned seed = 2024,
    std::function<double(const VectorXd&, int)> level_norm = nullptr);

struct SolveResult {
    VectorXd u;
    int iterations = 0;
    std::vector<double> residuals;  // |u_{n+1} - u_n| per iteration
    double observed_rate = 0.0;     // largest residual ratio after the transient
};

/// Banach iteration u <- B(v, u) from u = 0 at the given level. Throws
/// NotAContractionError when residual ratios stay >= 1 over a window and
/// ConvergenceFailureError carrying the residual when max_iter runs out.
SolveResult solve_germ(const ContractionGerm& germ, const VectorXd& v, int level, double tol,
                       int max_iter = 200);

/// The solution germ v -> delta(v) at a fixed level and tolerance.
class SolutionGerm {
public:
    SolutionGerm(ContractionGerm germ, int level, double tol, int max_iter = 200)
        : germ_(std::move(germ)), level_(level), tol_(tol), max_iter_(max_iter) {}

    VectorXd operator()(const VectorXd& v) const {
        return solve_germ(germ_, v, level_, tol_, max_iter_).u;
    }
    const ContractionGerm& germ() const { return germ_; }
    int level() const { return level_; }

private:
    ContractionGerm germ_;
    int level_;
    double tol_;
    int max_iter_;
};

struct SmoothnessReport {
    struct DerivativeSweep {
        int order;
        std::vector<double> steps;
        std::vector<double> estimate_norms;  // per step
        std::vector<VectorXd> estimates;
        double observed_order = 0.0;  // convergence order of the estimates
        bool stabilized = false;
        bool finite = true;
    };
    std::vector<DerivativeSweep> sweeps;
    bool pass = false;
};

/// Central finite differences of delta along `direction` up to `order`,
/// repeated over a halving step sweep; reports whether the highest-order
/// estimates stabilize. Non-finite values are recorded, not thrown.
SmoothnessReport germ_smoothness_diagnostic(const SolutionGerm& delta, const VectorXd& center,
                                            const VectorXd& direction, int order,
                                            const std::vector<double>& steps);

/// First-order operator h -> dh/ds - Hess * h on a line space, discretized by
/// the box scheme with asymptotic boundary rows. The Hessian must be
/// hyperbolic: eigenvalues bounded away from zero.
class MorseFiller {
public:
    MorseFiller(MatrixXd hessian, scspace::ScaleSpace space, double eigen_tol = 1e-8);

    const MatrixXd& hessian() const { return hessian_; }
    const scspace::ScaleSpace& space() const { return space_; }

    /// Box-scheme rows (h_{i+1}-h_i)/dx - H (h_i + h_{i+1})/2, one block per
    /// interval; near-kernel directions of the continuum operator show up as
    /// pointwise-small output.
    MatrixXd apply_interior(const MatrixXd& values) const;

    /// Square system: interior rows plus boundary rows removing the grow-back
    /// modes (stable components at the left end, unstable at the right).
    MatrixXd system_matrix() const;

    /// System with rows and columns scaled by the exp(delta |s|) measure;
    /// its smallest singular value staying away from zero is the
    /// linear-isomorphism property of the filler.
    double weighted_min_singular_value(double delta) const;

private:
    MatrixXd hessian_;
    scspace::ScaleSpace space_;
    MatrixXd stable_basis_;    // eigenvectors with negative eigenvalues
    MatrixXd unstable_basis_;  // eigenvectors with positive eigenvalues
};

/// Local model of a filled section over a finite-dimensional fiber: the
/// splicing core and its complement are cut out by a parameter-dependent
/// projection, the base section acts on the core and the filler is linear
/// on the complement.
struct FilledSection {
    int param_dim = 1;
    int fiber_dim = 2;
    std::function<MatrixXd(const VectorXd& v)> proj0;  // domain core projection
    std::function<MatrixXd(const VectorXd& v)> proj1;  // target core projection
    std::function<VectorXd(const VectorXd& v, const VectorXd& u_core)> base;
    // linear in its third argument
    std::function<VectorXd(const VectorXd& v, const VectorXd& u_core, const VectorXd& u_comp)>
        filler;

    VectorXd combined(const VectorXd& v, const VectorXd& u) const;

    /// Matrix of the filler restricted complement -> complement and its
    /// smallest singular value on that block.
    double filler_min_singular_value(const VectorXd& v) const;
};

struct ZeroSetReport {
    struct Row {
        VectorXd v;
        VectorXd u;
        bool filled_zero;
        double complement_norm;
        double base_norm;
        bool consistent;  // filled zero implies complement zero and base zero
    };
    std::vector<Row> rows;
    int violations = 0;
    bool pass = false;
};

/// Checks on each sample that vanishing of the filled section forces the
/// complement part of u to vanish and the base section to vanish.
ZeroSetReport filled_zero_set_check(const FilledSection& filled,
                                    const std::vector<std::pair<VectorXd, VectorXd>>& samples,
                                    double tol = 1e-9);

}  // namespace scfred::germ
