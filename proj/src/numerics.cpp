#include <lpakit/numerics.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lpakit {

namespace {

double sup_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double matrix_norm_inf(const Matrix& a) {
    return a.size() ? a.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
}

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

Vector solve_linear(const Matrix& a, const Vector& b) {
    Eigen::PartialPivLU<Matrix> lu(a);
    const double scale = matrix_norm_inf(a);
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > 1e-14 * scale)) {
        const double rcond = lu.rcond();
        std::ostringstream msg;
        msg << "singular Jacobian (reciprocal condition estimate " << rcond << ")";
        throw SingularMatrixError(msg.str(), rcond > 0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    }
    return lu.solve(b);
}

DeterminantSign determinant_sign(const Matrix& a) {
    Eigen::PartialPivLU<Matrix> lu(a);
    DeterminantSign out;
    int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
    double log_abs = 0.0;
    const auto& m = lu.matrixLU();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double d = m(i, i);
        if (d == 0.0 || !std::isfinite(d)) return out;
        if (d < 0) sign = -sign;
        log_abs += std::log(std::abs(d));
    }
    out.sign = sign;
    out.log_abs = log_abs;
    return out;
}

NewtonResult newton_solve(const VectorField& f, const JacobianField& jac, const Vector& x0,
                          const NewtonSettings& settings) {
    if (settings.abs_tol <= 0 || settings.max_iter < 1) throw ConfigError("invalid Newton settings");
    NewtonResult out;
    out.x = x0;
    Vector r = f(out.x);
    out.residual = sup_norm(r);
    if (!std::isfinite(out.residual)) throw ConvergenceError("non-finite residual at Newton seed", out.residual);
    for (int it = 0; it < settings.max_iter; ++it) {
        if (out.residual <= settings.abs_tol) {
            out.iterations = it;
            return out;
        }
        const Vector dx = solve_linear(jac(out.x), -r);
        double lambda = 1.0;
        Vector trial = out.x + dx;
        Vector r_trial = f(trial);
        double res_trial = sup_norm(r_trial);
        for (int h = 0; h < settings.max_halvings && !(res_trial < out.residual); ++h) {
            lambda *= 0.5;
            trial = out.x + lambda * dx;
            r_trial = f(trial);
            res_trial = sup_norm(r_trial);
        }
        if (!std::isfinite(res_trial)) {
            throw ConvergenceError("Newton produced a non-finite residual", out.residual);
        }
        out.x = std::move(trial);
        r = std::move(r_trial);
        out.residual = res_trial;
    }
    if (out.residual <= settings.abs_tol) {
        out.iterations = settings.max_iter;
        return out;
    }
    std::ostringstream msg;
    msg << "Newton did not converge in " << settings.max_iter << " iterations (residual " << out.residual << ")";
    throw ConvergenceError(msg.str(), out.residual);
}

Matrix finite_diff_jacobian(const VectorField& f, const Vector& x) {
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    Vector xp = x;
    Matrix jac;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = root_eps * (1.0 + std::abs(x[i]));
        xp[i] = x[i] + h;
        const Vector fp = f(xp);
        xp[i] = x[i] - h;
        const Vector fm = f(xp);
        xp[i] = x[i];
        if (i == 0) jac.resize(fp.size(), x.size());
        jac.col(i) = (fp - fm) / (2.0 * h);
    }
    return jac;
}

std::vector<Complex> eig_real(const Matrix& a) {
    if (a.rows() != a.cols()) throw ConfigError("eig_real needs a square matrix");
    std::vector<Complex> out;
    if (a.rows() == 0) return out;
    if (!a.allFinite()) throw ConvergenceError("eigenvalues of a non-finite matrix", std::nan(""));
    Eigen::EigenSolver<Matrix> solver(a, false);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("eigenvalue iteration did not converge", std::nan(""));
    }
    const auto& ev = solver.eigenvalues();
    out.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end(), [](const Complex& x, const Complex& y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() > y.imag();
    });
    return out;
}

Vector null_vector(const Matrix& a, bool transpose) {
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Index last = std::min(a.rows(), a.cols()) - 1;
    Vector v = transpose ? Vector(svd.matrixU().col(last)) : Vector(svd.matrixV().col(last));
    // Fix the sign so repeated calls agree.
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    return v;
}

double smallest_singular_value(const Matrix& a) {
    Eigen::BDCSVD<Matrix> svd(a);
    const auto& s = svd.singularValues();
    return s.size() ? s[s.size() - 1] : 0.0;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

Vector hermite(const Vector& y0, const Vector& f0, const Vector& y1, const Vector& f1, double h, double theta) {
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + theta;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

bool crosses(double g0, double g1, int direction) {
    const bool rising = g0 < 0 && g1 >= 0;
    const bool falling = g0 > 0 && g1 <= 0;
    if (direction > 0) return rising;
    if (direction < 0) return falling;
    return rising || falling;
}

}  // namespace

Trajectory integrate(const OdeRhs& rhs, const Vector& y0, double t0, double t1, const OdeSettings& s) {
    if (s.rel_tol <= 0 || s.abs_tol <= 0) throw ConfigError("ODE tolerances must be positive");
    Trajectory out;
    out.t.push_back(t0);
    out.y.push_back(y0);
    if (!all_finite(y0)) {
        out.termination = Termination::Failure;
        out.message = "non-finite initial state";
        return out;
    }
    const double span = t1 - t0;
    if (span == 0.0) return out;
    const double dir = span > 0 ? 1.0 : -1.0;

    double t = t0;
    Vector y = y0;
    Vector k1 = rhs(t, y);

    auto err_norm = [&](const Vector& err, const Vector& ya, const Vector& yb) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double sc = s.abs_tol + s.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
            const double q = err[i] / sc;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(std::max<Eigen::Index>(1, err.size())));
    };

    double h;
    if (s.fixed_step > 0) {
        h = s.fixed_step;
    } else if (s.initial_step > 0) {
        h = s.initial_step;
    } else {
        const Vector zero = Vector::Zero(y.size());
        const double d0 = err_norm(y, y, zero);
        const double d1 = err_norm(k1, y, zero);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }
    h = std::min({h, s.max_step, std::abs(span)});

    std::vector<double> g_prev(s.events.size());
    for (std::size_t i = 0; i < s.events.size(); ++i) g_prev[i] = s.events[i].fn(t, y);

    long steps = 0;
    bool last_rejected = false;
    while (dir * (t1 - t) > 0) {
        if (++steps > s.max_steps) {
            out.termination = Termination::Failure;
            out.message = "maximum number of steps exceeded";
            break;
        }
        bool final_step = false;
        if (h >= std::abs(t1 - t)) {
            h = std::abs(t1 - t);
            final_step = true;
        }
        const double hs = dir * h;
        const Vector k2 = rhs(t + c2 * hs, y + hs * (a21 * k1));
        const Vector k3 = rhs(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
        const Vector k4 = rhs(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = rhs(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = rhs(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double t_new = final_step ? t1 : t + hs;
        const Vector k7 = rhs(t_new, y_new);

        double err = 0.0;
        bool finite = all_finite(y_new) && all_finite(k7);
        if (s.fixed_step <= 0) {
            const Vector e = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            err = finite ? err_norm(e, y, y_new) : std::numeric_limits<double>::infinity();
            if (!std::isfinite(err)) finite = false;
        }

        if (s.fixed_step <= 0 && (!finite || err > 1.0)) {
            ++out.rejected_steps;
            const double factor = finite ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
            h *= factor;
            last_rejected = true;
            if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                out.termination = Termination::Failure;
                std::ostringstream msg;
                msg << "step size underflow at t=" << t;
                out.message = msg.str();
                break;
            }
            continue;
        }
        if (!finite) {
            out.termination = Termination::Failure;
            std::ostringstream msg;
            msg << "non-finite state at t=" << t_new;
            out.message = msg.str();
            break;
        }

        // Event detection on the accepted step.
        int fired = -1;
        double t_event = t_new;
        for (std::size_t i = 0; i < s.events.size(); ++i) {
            const double g_new = s.events[i].fn(t_new, y_new);
            if (crosses(g_prev[i], g_new, s.events[i].direction) && s.events[i].terminal) {
                double lo = 0.0, hi = 1.0;
                const double g_lo = g_prev[i];
                while ((hi - lo) * h > 1e-10) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = s.events[i].fn(t + mid * hs, hermite(y, k1, y_new, k7, hs, mid));
                    if (crosses(g_lo, gm, s.events[i].direction)) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                const double te = t + hi * hs;
                if (fired < 0 || dir * (te - t_event) < 0) {
                    fired = static_cast<int>(i);
                    t_event = te;
                }
            }
            g_prev[i] = g_new;
        }
        ++out.accepted_steps;
        if (fired >= 0) {
            const double theta = (t_event - t) / hs;
            out.t.push_back(t_event);
            out.y.push_back(hermite(y, k1, y_new, k7, hs, theta));
            out.termination = Termination::Event;
            out.event_index = fired;
            return out;
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        if (s.record_steps || final_step) {
            out.t.push_back(t);
            out.y.push_back(y);
        }
        if (s.fixed_step <= 0) {
            double factor = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            factor = std::clamp(factor, 0.2, last_rejected ? 1.0 : 5.0);
            h = std::min(h * factor, s.max_step);
        }
        last_rejected = false;
    }
    if (out.termination != Termination::ReachedEnd && (out.t.back() != t)) {
        out.t.push_back(t);
        out.y.push_back(y);
    }
    return out;
}

}  // namespace lpakit
