#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scfred/algebra.hpp"
#include "scfred/degen.hpp"
#include "scfred/scspace.hpp"
#include "scfred/splicing.hpp"

namespace scfred::morse {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using scspace::GridFunction;
using scspace::ScaleSpace;

struct CriticalPoint {
    VectorXd location;
    double value = 0.0;
    int index = 0;  // count of negative Hessian eigenvalues
    VectorXd hessian_spectrum;
    std::string label;
};

/// Smooth function on R^N with evaluators for value, gradient and Hessian,
/// plus the located critical points.
struct MorseProblem {
    std::string name;
    int dim = 1;
    std::function<double(const VectorXd&)> value;
    std::function<VectorXd(const VectorXd&)> gradient;
    std::function<MatrixXd(const VectorXd&)> hessian;
    std::vector<CriticalPoint> critical_points;

    const CriticalPoint& point(const std::string& label) const;
    /// Labels ordered strictly by value; throws TotalOrderViolationError on
    /// ties within tol.
    std::vector<std::string> total_order(double tol = 1e-9) const;
};

// Built-in problems. cubic_1d has the tanh connecting orbit; chain_problem
// is the two-channel min -> saddle -> max configuration with distinct
// critical values.
MorseProblem cubic_1d();
MorseProblem double_well();
MorseProblem chain_problem(double c = 0.5);
MorseProblem single_min();
MorseProblem cubic_degenerate();

/// Polynomial in N variables from a coefficient table: each term is a
/// coefficient and one exponent per variable.
MorseProblem polynomial_problem(int dim,
                                const std::vector<std::pair<double, std::vector<int>>>& terms,
                                std::string name = "polynomial");

struct CriticalSearchOptions {
    double box_halfwidth = 2.5;
    int seeds_per_axis = 7;
    double newton_tol = 1e-12;
    int max_newton = 60;
    double dedup_tol = 1e-7;
    double hessian_tol = 1e-8;
};

/// Deduplicated Newton roots of the gradient with Morse indices from the
/// Hessian signature. Throws DegenerateCriticalPointError when a root has an
/// eigenvalue within tolerance of zero.
std::vector<CriticalPoint> find_critical_points(const MorseProblem& problem,
                                                const CriticalSearchOptions& opts = {});

/// Convenience: locate the critical points and store them on the problem.
void locate_critical_points(MorseProblem& problem, const CriticalSearchOptions& opts = {});

enum class Normalization { Phase, Slice };

struct Trajectory {
    GridFunction u;
    VectorXd from, to;
    int from_index = 0, to_index = 0;
    double residual = 0.0;     // level-0 norm of the collocation defect
    double sup_residual = 0.0; // max row of the defect
    double phase_value = 0.0;  // Phi(u(0))
    int newton_steps = 0;
    Normalization normalization = Normalization::Phase;
};

struct TrajectoryOptions {
    double L = 12.0;
    double h = 0.02;
    double tol = 1e-11;
    int max_newton = 60;
};

/// Collocation solve of du/ds = grad Phi(u) with projected boundary
/// conditions and the phase normalization Phi(u(0)) = (Phi(a) + Phi(b))/2.
/// The pair must have Morse index difference one for a square system.
Trajectory solve_trajectory(const MorseProblem& problem, const VectorXd& a, const VectorXd& b,
                            const GridFunction& initial_guess, const TrajectoryOptions& opts = {});

/// Builds a grid guess for the connecting orbit from a coarse flow path.
GridFunction trajectory_guess(const MorseProblem& problem, const VectorXd& a, const VectorXd& b,
                              const std::vector<VectorXd>& path, const TrajectoryOptions& opts);

/// The line space used by the trajectory solver for a given problem size.
ScaleSpace trajectory_space(const MorseProblem& problem, const TrajectoryOptions& opts);

struct EnumerationOptions {
    TrajectoryOptions trajectory;
    int starts = 64;
    double launch_offset = 0.01;
    double capture_radius = 0.05;
    double flow_dt = 2e-3;
    double max_flow_time = 400.0;
    double escape_radius = 12.0;
    double dedup_tol = 1e-6;
    double transversality_tol = 1e-8;
};

struct EnumerationResult {
    std::vector<Trajectory> orbits;
    int count_mod2 = 0;
    bool transversality_warning = false;
};

/// Multi-start shooting from the unstable sphere at a, polished by the
/// collocation solver and deduplicated modulo the time shift. Requires
/// m(b) - m(a) = 1.
EnumerationResult enumerate_trajectories_index1(const MorseProblem& problem,
                                                const std::string& from_label,
                                                const std::string& to_label,
                                                const EnumerationOptions& opts = {});

struct MorseCounting {
    degen::PairStructure pairs;
    algebra::CountingFunction Q;
    bool transversality_warning = false;
    std::vector<std::vector<Trajectory>> orbits;  // per pair label, index-1 pairs only
};

/// Q(a,b) = parity of the index-one orbit count, 0 elsewhere; graded by the
/// parity of the index difference.
MorseCounting counting_function(const MorseProblem& problem, const EnumerationOptions& opts = {});

struct BrokenTrajectory {
    std::vector<Trajectory> components;  // consecutive endpoints match
    int degeneracy() const { return static_cast<int>(components.size()) - 1; }
};

/// The spectrum ((a0,a1), ..., (a_{k-1},a_k); (a0,a_k)) with labels taken
/// from the problem's critical point list.
degen::GeneralizedRelator spectrum(const MorseProblem& problem, const BrokenTrajectory& x);

struct PregluingOptions {
    double max_length = 60.0;
    double interface_tol = 1e-6;
};

struct PregluedCurve {
    GridFunction u;       // symmetric window of halfwidth L + R/2
    double R = 0.0;       // grid-aligned gluing length
    double residual = 0.0;
    double sup_residual = 0.0;
    VectorXd from, to;
};

/// Nonlinear pregluing of a once-broken trajectory at gluing parameter r.
PregluedCurve preglue_broken(const MorseProblem& problem, const BrokenTrajectory& x, double r,
                             const splicing::GluingProfile& profile,
                             const PregluingOptions& opts = {});

struct CorrectedGluing {
    Trajectory corrected;          // slice-normalized, on the glued window
    GridFunction component_plus;   // corrected left component u1 + h
    GridFunction component_minus;  // corrected right component u2 + k
    double residual = 0.0;
    double distance_to_broken = 0.0;  // shifted sup distance, both components
};

struct CorrectionOptions {
    double tol = 1e-11;
    int max_newton = 60;
    double shift_search = 2.0;  // halfwidth of the shift optimization
};

/// Newton correction of the preglued curve inside the splicing slice: the
/// update stays in the image of the gluing restricted to ker(antiglue), and
/// two slice rows pin the component shifts. Throws CorrectionFailureError
/// when the iteration leaves the basin.
CorrectedGluing correct_pregluing(const MorseProblem& problem, const BrokenTrajectory& x,
                                  const PregluedCurve& preglued, double r,
                                  const splicing::GluingProfile& profile,
                                  const CorrectionOptions& opts = {});

/// Collocation defect of a curve under the problem's flow, level-0 norm and
/// sup norm.
std::pair<double, double> flow_residual(const MorseProblem& problem, const GridFunction& u);

/// True when Phi(u(s)) is nondecreasing along the nodes within slack.
bool energy_monotone(const MorseProblem& problem, const GridFunction& u, double slack = 1e-9);

/// All solution elements of the operation: one prime per index-one orbit
/// and every composite along critical chains, for the master equation check.
std::vector<degen::Element> solution_elements(const MorseCounting& counting);

}  // namespace scfred::morse
