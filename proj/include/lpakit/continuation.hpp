#pragma once

// Pseudo-arclength continuation of F(x, alpha) = 0 with fold, branch point
// and Hopf detection, branch switching and two-parameter curves.
//
// Arclength is measured in a scaled metric on z = (x, alpha):
//   <a, b> = sum_i a_i b_i / (n * state_scale^2) + a_alpha b_alpha / param_scale^2
// so that step sizes are comparable across models with very different
// magnitudes.

#include <lpakit/numerics.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lpakit {

struct ContinuationProblem {
    std::size_t dimension = 0;
    std::function<Vector(const Vector& x, double alpha)> residual;
    std::function<Matrix(const Vector& x, double alpha)> jacobian;          // optional
    std::function<Vector(const Vector& x, double alpha)> param_derivative;  // optional
    /// Eigenvalues deciding stability; defaults to eig_real(jacobian).
    std::function<std::vector<Complex>(const Vector& x, double alpha)> eigenvalues;
    /// Optional domain check; continuation stops at the first point where
    /// it returns false.
    std::function<bool(const Vector& x, double alpha)> admissible;

    Matrix jacobian_at(const Vector& x, double alpha) const;
    Vector param_derivative_at(const Vector& x, double alpha) const;
};

enum class Predictor { Secant, Tangent };

struct ContinuationSettings {
    double alpha_min = -std::numeric_limits<double>::infinity();
    double alpha_max = std::numeric_limits<double>::infinity();
    double initial_step = 1e-2;
    double min_step = 1e-8;
    double max_step = 0.1;
    double corrector_tol = 1e-10;  // sup norm of F
    double update_tol = 1e-8;      // scaled norm of the last Newton update
    int corrector_max_iter = 10;
    int max_points = 5000;
    Predictor predictor = Predictor::Secant;
    double state_scale = 1.0;
    Vector state_scales;  // per-component scales; overrides state_scale when sized n
    double param_scale = 1.0;
    bool compute_eigenvalues = true;
    bool detect_folds = true;
    bool detect_branch_points = true;
    bool detect_hopf = true;
    double locate_tol = 1e-8;      // |d alpha| <= locate_tol * (1 + |alpha|)
    bool stop_on_closed_loop = true;
};

struct ContinuationPoint {
    double alpha = 0.0;
    Vector x;
    Vector tangent;  // unit tangent in the scaled metric, length n+1
    std::vector<Complex> eigenvalues;
    bool stable = false;
    int fold_sign = 0;     // sign of d alpha / ds
    int bp_sign = 0;       // sign of det [F_x F_alpha; tangent]
    int unstable_complex = 0;  // eigenvalues with Re > 0 and |Im| > 1e-8
};

enum class BifurcationKind { Fold, BranchPoint, Hopf };

std::string_view to_string(BifurcationKind k);

struct Bifurcation {
    BifurcationKind kind = BifurcationKind::Fold;
    double alpha = 0.0;
    Vector x;
    Vector tangent;         // branch tangent at the point (n+1)
    Vector null_direction;  // fold: null vector of F_x; BP: secondary tangent (n+1)
    double frequency = 0.0; // Hopf only
    bool degenerate = false;
    std::size_t segment = 0;  // the bifurcation lies between points[segment] and points[segment+1]
};

enum class BranchEnd { RangeExit, StepFailure, MaxPoints, ClosedLoop };

std::string_view to_string(BranchEnd e);

struct Branch {
    std::vector<ContinuationPoint> points;
    std::vector<Bifurcation> bifurcations;
    BranchEnd termination = BranchEnd::MaxPoints;
    std::string message;
    int rejected_steps = 0;
    int newton_iterations = 0;
};

/// Starts at (x0, alpha0), pre-correcting x0 by Newton at fixed alpha0
/// (throws ConvergenceError if that fails). `direction` picks the initial
/// sign of d alpha / ds.
Branch continue_branch(const ContinuationProblem& problem, const Vector& x0, double alpha0, int direction,
                       const ContinuationSettings& settings = {});

/// As above with an explicit initial tangent on (x, alpha).
Branch continue_branch(const ContinuationProblem& problem, const Vector& x0, double alpha0,
                       const Vector& initial_tangent, const ContinuationSettings& settings = {});

/// Test-function scan and refinement between consecutive points of a branch.
std::vector<Bifurcation> detect_and_locate(const ContinuationProblem& problem, const ContinuationPoint& a,
                                           const ContinuationPoint& b, const ContinuationSettings& settings);

/// Joins a branch traced backwards with one traced forwards from nearby
/// starts into a single ordered branch.
Branch join_branches(const Branch& backward, const Branch& forward, bool shared_start);

struct SwitchResult {
    Vector x;
    double alpha = 0.0;
    Vector tangent;  // direction along the new branch, away from the BP
};

/// Steps off a BranchPoint along +/- its secondary tangent and corrects.
/// Throws ConvergenceError if every retry falls back onto the original branch.
SwitchResult branch_switch(const ContinuationProblem& problem, const Bifurcation& bp, int side = +1,
                           const ContinuationSettings& settings = {}, double offset = 1e-2);

// Two-parameter continuation

/// F(x, alpha, beta).
struct TwoParameterProblem {
    std::size_t dimension = 0;
    std::function<Vector(const Vector& x, double alpha, double beta)> residual;
    std::function<Matrix(const Vector& x, double alpha, double beta)> jacobian;  // optional
};

struct TwoParamPoint {
    double alpha = 0.0;
    double beta = 0.0;
    Vector x;
    double unfolding = 0.0;  // BP curves: |mu| > tolerance means no genuine BP here
    bool genuine = true;
};

struct TwoParamEvent {
    std::string kind;  // "turning" (cusp for fold curves, merge for BP curves), "range_exit", ...
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t index = 0;
};

struct TwoParamCurve {
    std::vector<TwoParamPoint> points;
    std::vector<TwoParamEvent> events;
    /// Index ranges [first, last] of the pieces between turning points in beta.
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    BranchEnd termination = BranchEnd::MaxPoints;
};

struct TwoParamSettings {
    double beta_min = -std::numeric_limits<double>::infinity();
    double beta_max = std::numeric_limits<double>::infinity();
    ContinuationSettings continuation;  // alpha/beta bounds in here are ignored
    double alpha_min = -std::numeric_limits<double>::infinity();
    double alpha_max = std::numeric_limits<double>::infinity();
    double genuine_tol = 1e-6;
    int direction = +1;  // initial sign of d beta / ds
    bool both_directions = true;
};

/// Follows {F = 0, F_x v = 0, <v,v> = 1} in (x, v, alpha) with beta free.
TwoParamCurve continue_fold_2par(const TwoParameterProblem& problem, const Bifurcation& fold, double beta0,
                                 const TwoParamSettings& settings = {});

/// Follows {F + mu w = 0, F_x^T w = 0, <w,w> = 1, <w, F_alpha> = 0} in
/// (x, w, alpha, mu) with beta free. mu = 0 on genuine branch points.
TwoParamCurve continue_branchpoint_2par(const TwoParameterProblem& problem, const Bifurcation& bp, double beta0,
                                        const TwoParamSettings& settings = {});

/// Alpha values where the curves cross beta (linear interpolation).
std::vector<double> crossings_at(const std::vector<TwoParamCurve>& curves, double beta);

/// Area of the band in the (alpha, beta) plane between the outermost
/// crossings of `curves`, integrated over [beta_lo, beta_hi]. Rows with
/// fewer than two crossings contribute nothing.
double band_area(const std::vector<TwoParamCurve>& curves, double beta_lo, double beta_hi, int samples = 400);

}  // namespace lpakit
