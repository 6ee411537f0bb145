#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>

#include "scfred/scspace.hpp"

namespace scfred::splicing {

using scspace::GridFunction;
using scspace::ScaleSpace;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Smooth cut-off with beta(s) = 1 for s <= -1, beta' < 0 on (-1, 1) and
/// beta(s) + beta(-s) = 1. Built from the standard exp(-1/x) bump,
/// symmetrized so the defining identity holds exactly.
struct Cutoff {
    std::function<double(double)> value;
    std::function<double(double)> derivative;

    static Cutoff standard();
};

/// The standard cut-off, evaluated directly.
double beta(double s);
double beta_prime(double s);

/// Diffeomorphism (0,1] -> [0,inf) converting a gluing parameter into a
/// gluing length.
struct GluingProfile {
    enum class Kind { Exponential, Logarithmic, Custom };
    Kind kind = Kind::Exponential;
    std::string name = "exponential";
    std::function<double(double)> forward;
    std::function<double(double)> inverse;

    static GluingProfile exponential();   // phi(r) = e^(1/r) - e
    static GluingProfile logarithmic();   // phi(x) = -ln(x) / (2 pi)
    static GluingProfile reciprocal();    // phi(r) = 1/r - 1
    static GluingProfile custom(std::function<double(double)> fwd,
                                std::function<double(double)> inv, std::string name);
};

/// R = phi(r). Throws DomainError for r outside (0, 1].
double profile_length(const GluingProfile& profile, double r);
/// r = phi^{-1}(R).
double profile_parameter(const GluingProfile& profile, double R);

/// Pair of vector fields along the two halves of a broken object.
struct PairField {
    GridFunction h;
    GridFunction k;
};

enum class ShiftMode { Rounded, Interpolated };

/// Pointwise coefficient matrix determinant beta^2 + (1-beta)^2 at offset s.
double total_glue_determinant(double s);

/// Glued map on the grid of u:
/// s -> beta(s - R/2) u(s) + (1 - beta(s - R/2)) v(s - R).
/// The shifted factor is read at exact nodes when R is (close to) a grid
/// multiple, otherwise cubically interpolated; outside the window the
/// asymptotic constants extend the data.
GridFunction glue_line(const GridFunction& u, const GridFunction& v, double R,
                       ShiftMode mode = ShiftMode::Rounded, double interface_tol = 1e-6);

/// Anti-glued field s -> -(1 - beta(s - R/2)) h(s) + beta(s - R/2) k(s - R).
GridFunction antiglue_line(const GridFunction& h, const GridFunction& k, double R,
                           ShiftMode mode = ShiftMode::Rounded, double interface_tol = 1e-6);

struct TotalGluePair {
    GridFunction glued;
    GridFunction antiglued;
    double min_determinant;
};

/// (glue, antiglue) together; the pointwise 2x2 coefficient matrix has
/// determinant >= 1/2, so the pair determines (h, k) on the overlap.
TotalGluePair total_glue(const GridFunction& h, const GridFunction& k, double R,
                         ShiftMode mode = ShiftMode::Rounded, double interface_tol = 1e-6);

/// Pointwise 2x2 solve inverting total_glue. Nodes of k that the window
/// never pairs with are reconstructed from the asymptotic extensions.
PairField total_unglue(const GridFunction& glued, const GridFunction& antiglued, double R,
                       ShiftMode mode = ShiftMode::Rounded);

enum class SpliceVariant { MorseLine, GwCylinder };

struct SplicingKernel {
    SpliceVariant variant = SpliceVariant::MorseLine;
    Cutoff cutoff = Cutoff::standard();
    GluingProfile profile = GluingProfile::exponential();
    ScaleSpace space;  // line grid (Morse) or shared half-cylinder layout (GW)
};

struct ProjectionInfo {
    double requested_length = 0.0;  // phi(r), inf for r = 0
    double effective_length = 0.0;  // grid-aligned value actually used
    int shift_nodes = 0;
    bool beyond_window = false;  // length not representable, projection is the identity
};

ProjectionInfo line_projection_info(const ScaleSpace& space, const GluingProfile& profile,
                                    double r);

/// Projection onto ker(antiglue) along ker(glue) for the Morse line variant.
/// r = 0 is the fully broken state and gives the identity.
PairField splicing_projection(const SplicingKernel& kernel, double r, const PairField& e);

/// True iff e is fixed by the projection at level 0 within tol.
bool splicing_core_contains(const SplicingKernel& kernel, double r, const PairField& e,
                            double tol);

/// Matrix of the line projection on stacked pair coordinates (h then k),
/// for rank bookkeeping on coarse grids.
MatrixXd line_projection_matrix(const ScaleSpace& space, const GluingProfile& profile, double r);

// --- Cylinder (Gromov-Witten) variant -------------------------------------
//
// u_plus lives on a half-cylinder window [0, L+] x S^1 with its asymptotic
// constant at +inf (the nodal point x); u_minus on [-L-, 0] x S^1 with the
// constant at -inf (the nodal point y). Matching requires equal constants.

struct CylinderPair {
    GridFunction plus;
    GridFunction minus;
};

struct GluingDatum {
    double R = 0.0;
    double theta = 0.0;  // a = |a| e^{-2 pi i theta}
};

GluingDatum gluing_datum(std::complex<double> a, const GluingProfile& profile);

struct CylinderGlued {
    bool noded = false;                  // a == 0: the pair is returned unchanged
    std::optional<GridFunction> glued;   // on [0, R] x S^1 when not noded
    std::optional<CylinderPair> pair;    // when noded
    GluingDatum datum;
};

CylinderGlued glue_cylinder(const CylinderPair& u, std::complex<double> a,
                            const GluingProfile& profile, double interface_tol = 1e-6);

struct CylinderAntiglued {
    bool zero = false;                  // a == 0
    std::optional<GridFunction> anti;   // on [0, R] x S^1
    VectorXd average;                   // av_R(h)
    VectorXd end_x;                     // asymptotic value toward the + nodal point
    VectorXd end_y;                     // asymptotic value toward the - nodal point
    GluingDatum datum;
};

CylinderAntiglued antiglue_cylinder(const CylinderPair& h, std::complex<double> a,
                                    const GluingProfile& profile, double interface_tol = 1e-6);

/// Inverts the cylinder total gluing on the overlap. The average av_R is
/// recovered from the glued field at s = R/2, so (glued, antiglued) alone
/// determine the pair.
CylinderPair total_unglue_cylinder(const GridFunction& glued, const GridFunction& antiglued,
                                   const GluingDatum& datum, const ScaleSpace& plus_space,
                                   const ScaleSpace& minus_space);

/// Projection onto ker(antiglue) for the cylinder variant; a = 0 gives the
/// identity since the anti-gluing vanishes there.
CylinderPair splicing_projection_cylinder(const CylinderPair& e, std::complex<double> a,
                                          const GluingProfile& profile);

}  // namespace scfred::splicing
