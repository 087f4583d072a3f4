#pragma once

// Shared dense kernels: Newton, adaptive Runge-Kutta with events,
// eigenvalues, finite-difference Jacobians and a couple of linear-algebra
// helpers used by continuation.

#include <lpakit/errors.hpp>

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace lpakit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Complex = std::complex<double>;

using VectorField = std::function<Vector(const Vector&)>;
using JacobianField = std::function<Matrix(const Vector&)>;

struct NewtonSettings {
    double abs_tol = 1e-10;
    int max_iter = 50;
    int max_halvings = 10;  // backtracking: halve the step while the residual grows
};

struct NewtonResult {
    Vector x;
    double residual = 0.0;
    int iterations = 0;
};

/// Damped Newton. Throws ConvergenceError or SingularMatrixError.
NewtonResult newton_solve(const VectorField& f, const JacobianField& jac, const Vector& x0,
                          const NewtonSettings& settings = {});

/// Central differences with h_i = sqrt(eps)*(1+|x_i|).
Matrix finite_diff_jacobian(const VectorField& f, const Vector& x);

/// LU solve that throws SingularMatrixError when a pivot falls below
/// 1e-14 * ||A||.
Vector solve_linear(const Matrix& a, const Vector& b);

/// Sign of det(A) and log|det(A)|; sign is 0 for an exactly singular matrix.
struct DeterminantSign {
    int sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();
};
DeterminantSign determinant_sign(const Matrix& a);

/// All eigenvalues, sorted by decreasing real part then decreasing
/// imaginary part.
std::vector<Complex> eig_real(const Matrix& a);

/// Unit vector spanning the (approximate) null space of a nearly singular
/// square matrix, found by inverse iteration. If `transpose` is set the
/// left null vector is returned.
Vector null_vector(const Matrix& a, bool transpose = false);

double smallest_singular_value(const Matrix& a);

// ODE integration

using OdeRhs = std::function<Vector(double t, const Vector& y)>;

struct OdeEvent {
    std::function<double(double t, const Vector& y)> fn;
    int direction = 0;  // +1 rising only, -1 falling only, 0 either
    bool terminal = true;
};

struct OdeSettings {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 picks one automatically
    double fixed_step = 0.0;    // > 0 disables error control
    long max_steps = 1'000'000;
    bool record_steps = true;   // keep every accepted step in the trajectory
    std::vector<OdeEvent> events;
};

enum class Termination { ReachedEnd, Event, Failure };

struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> y;
    Termination termination = Termination::ReachedEnd;
    int event_index = -1;
    std::string message;
    long accepted_steps = 0;
    long rejected_steps = 0;

    double final_time() const { return t.back(); }
    const Vector& final_state() const { return y.back(); }
};

/// Dormand-Prince 5(4) with error control and event location by bisection
/// on the cubic Hermite interpolant. Step-size underflow or a non-finite
/// state ends the run with Termination::Failure (no exception).
Trajectory integrate(const OdeRhs& rhs, const Vector& y0, double t0, double t1,
                     const OdeSettings& settings = {});

}  // namespace lpakit
