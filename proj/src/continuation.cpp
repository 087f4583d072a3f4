#include <lpakit/continuation.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lpakit {

std::string_view to_string(BifurcationKind k) {
    switch (k) {
        case BifurcationKind::Fold: return "fold";
        case BifurcationKind::BranchPoint: return "branch_point";
        case BifurcationKind::Hopf: return "hopf";
    }
    return "?";
}

std::string_view to_string(BranchEnd e) {
    switch (e) {
        case BranchEnd::RangeExit: return "range_exit";
        case BranchEnd::StepFailure: return "step_failure";
        case BranchEnd::MaxPoints: return "max_points";
        case BranchEnd::ClosedLoop: return "closed_loop";
    }
    return "?";
}

Matrix ContinuationProblem::jacobian_at(const Vector& x, double alpha) const {
    if (jacobian) return jacobian(x, alpha);
    return finite_diff_jacobian([&](const Vector& y) { return residual(y, alpha); }, x);
}

Vector ContinuationProblem::param_derivative_at(const Vector& x, double alpha) const {
    if (param_derivative) return param_derivative(x, alpha);
    const double h = std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + std::abs(alpha));
    return (residual(x, alpha + h) - residual(x, alpha - h)) / (2.0 * h);
}

namespace {

double sup(const Vector& v) { return v.lpNorm<Eigen::Infinity>(); }

class Engine {
public:
    Engine(const ContinuationProblem& problem, const ContinuationSettings& s)
        : p_(problem), s_(s), n_(static_cast<Eigen::Index>(problem.dimension)) {
        w_.resize(n_ + 1);
        const double nn = static_cast<double>(std::max<Eigen::Index>(n_, 1));
        if (s.state_scales.size() == n_) {
            w_.head(n_) = (nn * s.state_scales.array().square()).inverse().matrix();
        } else {
            w_.head(n_).setConstant(1.0 / (nn * s.state_scale * s.state_scale));
        }
        w_[n_] = 1.0 / (s.param_scale * s.param_scale);
    }

    double ip(const Vector& a, const Vector& b) const { return a.cwiseProduct(w_).dot(b); }
    double norm(const Vector& a) const { return std::sqrt(ip(a, a)); }
    Vector unit(const Vector& a) const { return a / norm(a); }

    Vector join(const Vector& x, double alpha) const {
        Vector z(n_ + 1);
        z.head(n_) = x;
        z[n_] = alpha;
        return z;
    }
    Vector xpart(const Vector& z) const { return z.head(n_); }
    double apart(const Vector& z) const { return z[n_]; }

    Matrix jacobian_z(const Vector& z) const {
        Matrix a(n_, n_ + 1);
        a.leftCols(n_) = p_.jacobian_at(xpart(z), apart(z));
        a.col(n_) = p_.param_derivative_at(xpart(z), apart(z));
        return a;
    }

    Matrix bordered(const Vector& z, const Vector& border) const {
        Matrix a(n_ + 1, n_ + 1);
        a.topRows(n_) = jacobian_z(z);
        a.row(n_) = border.cwiseProduct(w_).transpose();
        return a;
    }

    struct Corrected {
        Vector z;
        int iterations = 0;
        bool ok = false;
    };

    // Newton on {F(z) = 0, <dir, z - ref> = s}.
    Corrected correct(Vector z, const Vector& dir, const Vector& ref, double s, int max_iter = -1) const {
        Corrected out;
        if (max_iter < 0) max_iter = s_.corrector_max_iter;
        double last_update = std::numeric_limits<double>::infinity();
        for (int it = 0; it <= max_iter; ++it) {
            Vector f = p_.residual(xpart(z), apart(z));
            if (!f.allFinite()) return out;
            const double res = sup(f);
            if (res <= s_.corrector_tol && last_update <= s_.update_tol) {
                out.z = std::move(z);
                out.ok = true;
                return out;
            }
            if (it == max_iter) break;
            Vector rhs(n_ + 1);
            rhs.head(n_) = -f;
            rhs[n_] = s - ip(dir, z - ref);
            Vector dz;
            try {
                dz = solve_linear(bordered(z, dir), rhs);
            } catch (const SingularMatrixError&) {
                return out;
            }
            if (!dz.allFinite()) return out;
            z += dz;
            last_update = norm(dz);
            ++out.iterations;
            if (last_update > 1e3 * std::max(1.0, std::abs(s))) return out;
        }
        return out;
    }

    // Unit tangent oriented so that <ref, t> > 0.
    Vector tangent(const Vector& z, const Vector& ref) const {
        Vector rhs = Vector::Zero(n_ + 1);
        rhs[n_] = 1.0;
        Vector t = solve_linear(bordered(z, ref), rhs);
        t = unit(t);
        if (ip(t, ref) < 0) t = -t;
        return t;
    }

    int bp_sign(const Vector& z, const Vector& t) const { return determinant_sign(bordered(z, t)).sign; }

    ContinuationPoint make_point(const Vector& z, const Vector& t) const {
        ContinuationPoint pt;
        pt.alpha = apart(z);
        pt.x = xpart(z);
        pt.tangent = t;
        pt.fold_sign = t[n_] > 0 ? 1 : (t[n_] < 0 ? -1 : 0);
        if (s_.detect_branch_points) pt.bp_sign = bp_sign(z, t);
        if (s_.compute_eigenvalues) {
            pt.eigenvalues = p_.eigenvalues ? p_.eigenvalues(pt.x, pt.alpha) : eig_real(p_.jacobian_at(pt.x, pt.alpha));
            pt.stable = std::all_of(pt.eigenvalues.begin(), pt.eigenvalues.end(),
                                    [](const Complex& l) { return l.real() < 0; });
            for (const auto& l : pt.eigenvalues) {
                if (l.real() > 0 && std::abs(l.imag()) > 1e-8 * (1.0 + std::abs(l))) ++pt.unstable_complex;
            }
        }
        return pt;
    }

    // Brackets the sign change of `test` between a and b by re-tracing the
    // segment in short steps, then bisects in arclength inside the bracket.
    template <class Test>
    std::pair<Vector, Vector> locate(const ContinuationPoint& a, const ContinuationPoint& b, Test test) const {
        const Vector za = join(a.x, a.alpha), zb = join(b.x, b.alpha);
        const double g_a = test(za, a.tangent);
        Vector z_lo = za, z_hi = zb;
        Vector t_lo = a.tangent, t_hi = b.tangent;

        constexpr int kSubsteps = 16;
        const double h = ip(a.tangent, zb - za) / kSubsteps;
        Vector z0 = za, t0 = a.tangent;
        for (int k = 0; k < kSubsteps; ++k) {
            auto c = correct(z0 + h * t0, t0, z0, h, 6 * s_.corrector_max_iter);
            if (!c.ok) break;
            Vector t1;
            try {
                t1 = tangent(c.z, t0);
            } catch (const SingularMatrixError&) {
                return {c.z, t0};
            }
            if ((test(c.z, t1) > 0) != (g_a > 0)) {
                z_lo = z0;
                t_lo = t0;
                z_hi = c.z;
                t_hi = t1;
                break;
            }
            z0 = c.z;
            t0 = t1;
        }

        const Vector base = z_lo;
        const Vector dir = t_lo;
        double lo = 0.0, hi = ip(dir, z_hi - base);
        const double span = std::abs(hi);
        for (int it = 0; it < 80; ++it) {
            const double alpha_gap = std::abs(apart(z_hi) - apart(z_lo));
            const double alpha_tol = s_.locate_tol * (1.0 + std::abs(apart(z_lo)));
            if (alpha_gap <= alpha_tol && std::abs(hi - lo) <= 1e-9 * std::max(span, 1e-300)) break;
            if (std::abs(hi - lo) <= 1e-15 * std::max(span, 1e-300)) break;
            const double mid = 0.5 * (lo + hi);
            const double theta = (mid - lo) / (hi - lo);
            auto c = correct(z_lo + theta * (z_hi - z_lo), dir, base, mid, 6 * s_.corrector_max_iter);
            if (!c.ok) break;
            Vector t;
            try {
                t = tangent(c.z, dir);
            } catch (const SingularMatrixError&) {
                // Landed exactly on the singular point.
                z_lo = z_hi = c.z;
                t_lo = t_hi = dir;
                break;
            }
            const double g = test(c.z, t);
            if ((g > 0) == (g_a > 0) && g != 0.0) {
                lo = mid;
                z_lo = c.z;
                t_lo = t;
            } else {
                hi = mid;
                z_hi = c.z;
                t_hi = t;
            }
        }
        return {0.5 * (z_lo + z_hi), t_lo};
    }

    Vector secondary_direction(const Vector& z, const Vector& t) const {
        Eigen::BDCSVD<Matrix> svd(jacobian_z(z), Eigen::ComputeFullV);
        const Matrix& v = svd.matrixV();
        const Vector v1 = v.col(n_), v2 = v.col(n_ - 1);
        Vector phi = v1 * ip(v2, t) - v2 * ip(v1, t);
        if (norm(phi) < 1e-12) phi = v2;
        phi = phi - ip(phi, t) * t;
        phi = unit(phi);
        Eigen::Index imax = 0;
        phi.cwiseAbs().maxCoeff(&imax);
        if (phi[imax] < 0) phi = -phi;
        return phi;
    }

    std::vector<Bifurcation> detect(const ContinuationPoint& a, const ContinuationPoint& b) const {
        std::vector<Bifurcation> found;
        if (s_.detect_folds && a.fold_sign * b.fold_sign < 0) {
            auto [z, t] = locate(a, b, [&](const Vector&, const Vector& tt) { return tt[n_]; });
            Bifurcation bif;
            bif.kind = BifurcationKind::Fold;
            bif.alpha = apart(z);
            bif.x = xpart(z);
            bif.tangent = t;
            bif.null_direction = null_vector(p_.jacobian_at(bif.x, bif.alpha));
            found.push_back(std::move(bif));
        }
        if (s_.detect_branch_points && a.bp_sign * b.bp_sign < 0) {
            auto [z, t] = locate(a, b, [&](const Vector& zz, const Vector&) {
                return static_cast<double>(determinant_sign(bordered(zz, a.tangent)).sign);
            });
            Bifurcation bif;
            bif.kind = BifurcationKind::BranchPoint;
            bif.alpha = apart(z);
            bif.x = xpart(z);
            bif.tangent = unit(a.tangent + b.tangent);
            bif.null_direction = secondary_direction(z, bif.tangent);
            found.push_back(std::move(bif));
        }
        if (s_.detect_hopf && s_.compute_eigenvalues && a.unstable_complex != b.unstable_complex) {
            auto hopf_test = [&](const Vector& zz, const Vector&) {
                const auto ev = p_.eigenvalues ? p_.eigenvalues(xpart(zz), apart(zz))
                                               : eig_real(p_.jacobian_at(xpart(zz), apart(zz)));
                int count = 0;
                for (const auto& l : ev) {
                    if (l.real() > 0 && std::abs(l.imag()) > 1e-8 * (1.0 + std::abs(l))) ++count;
                }
                return count == a.unstable_complex ? 1.0 : -1.0;
            };
            auto [z, t] = locate(a, b, hopf_test);
            const auto ev = p_.eigenvalues ? p_.eigenvalues(xpart(z), apart(z))
                                           : eig_real(p_.jacobian_at(xpart(z), apart(z)));
            // The crossing pair is the complex eigenvalue nearest the imaginary axis.
            const Complex* best = nullptr;
            for (const auto& l : ev) {
                if (l.imag() > 1e-6 && (!best || std::abs(l.real()) < std::abs(best->real()))) best = &l;
            }
            if (best && std::abs(best->real()) < 1e-5 * (1.0 + std::abs(*best))) {
                Bifurcation bif;
                bif.kind = BifurcationKind::Hopf;
                bif.alpha = apart(z);
                bif.x = xpart(z);
                bif.tangent = t;
                bif.frequency = best->imag();
                found.push_back(std::move(bif));
            }
        }
        // A fold and a branch point at the same place cannot be told apart.
        for (auto& f : found) {
            for (auto& g : found) {
                if (&f != &g && f.kind != g.kind && f.kind != BifurcationKind::Hopf &&
                    g.kind != BifurcationKind::Hopf &&
                    std::abs(f.alpha - g.alpha) <= 1e-6 * (1.0 + std::abs(f.alpha))) {
                    f.degenerate = g.degenerate = true;
                }
            }
        }
        return found;
    }

    Branch run(const Vector& x0, double alpha0, const Vector* tangent0, int direction) const;

    const ContinuationProblem& p_;
    const ContinuationSettings& s_;
    Eigen::Index n_;
    Vector w_;
};

bool in_range(double alpha, const ContinuationSettings& s) { return alpha >= s.alpha_min && alpha <= s.alpha_max; }

Branch Engine::run(const Vector& x0, double alpha0, const Vector* tangent0, int direction) const {
    if (static_cast<std::size_t>(x0.size()) != p_.dimension) throw ConfigError("start point has the wrong dimension");
    if (s_.min_step <= 0 || s_.max_step < s_.min_step || s_.initial_step <= 0) {
        throw ConfigError("invalid continuation step settings");
    }
    Branch branch;
    NewtonSettings ns;
    ns.abs_tol = s_.corrector_tol;
    auto start = newton_solve([&](const Vector& x) { return p_.residual(x, alpha0); },
                              [&](const Vector& x) { return p_.jacobian_at(x, alpha0); }, x0, ns);
    Vector z = join(start.x, alpha0);

    Vector t;
    if (tangent0) {
        if (tangent0->size() != n_ + 1) throw ConfigError("initial tangent has the wrong dimension");
        t = tangent(z, *tangent0);
    } else {
        Vector e = Vector::Zero(n_ + 1);
        e[n_] = direction >= 0 ? 1.0 : -1.0;
        t = tangent(z, e);
    }
    branch.points.push_back(make_point(z, t));
    const Vector z0 = z, t0 = t;

    double h = std::min(s_.initial_step, s_.max_step);
    double travelled = 0.0;
    while (static_cast<int>(branch.points.size()) < s_.max_points) {
        const ContinuationPoint& prev = branch.points.back();
        const Vector z_prev = join(prev.x, prev.alpha);
        Vector dir = prev.tangent;
        if (s_.predictor == Predictor::Secant && branch.points.size() >= 2) {
            const auto& pp = branch.points[branch.points.size() - 2];
            dir = unit(z_prev - join(pp.x, pp.alpha));
            if (ip(dir, prev.tangent) < 0) dir = prev.tangent;
        }
        auto c = correct(z_prev + h * dir, dir, z_prev, h);
        Vector t_new;
        bool ok = c.ok;
        if (ok) {
            try {
                t_new = tangent(c.z, prev.tangent);
            } catch (const SingularMatrixError&) {
                ok = false;
            }
        }
        // Reject steps that turn too sharply; they tend to jump branches.
        if (ok && ip(t_new, prev.tangent) < 0.9 && h > 4 * s_.min_step) ok = false;
        if (!ok) {
            ++branch.rejected_steps;
            h *= 0.5;
            if (h < s_.min_step) {
                branch.termination = BranchEnd::StepFailure;
                std::ostringstream msg;
                msg << "corrector failed at minimum step near alpha=" << prev.alpha;
                branch.message = msg.str();
                return branch;
            }
            continue;
        }
        branch.newton_iterations += c.iterations;
        Vector z_new = c.z;

        bool exit_range = !in_range(apart(z_new), s_);
        if (exit_range) {
            // Land exactly on the boundary that was crossed.
            const double bound = apart(z_new) > s_.alpha_max ? s_.alpha_max : s_.alpha_min;
            const double theta = (bound - prev.alpha) / (apart(z_new) - prev.alpha);
            const Vector guess = prev.x + theta * (xpart(z_new) - prev.x);
            try {
                auto landed = newton_solve([&](const Vector& x) { return p_.residual(x, bound); },
                                           [&](const Vector& x) { return p_.jacobian_at(x, bound); }, guess, ns);
                z_new = join(landed.x, bound);
                t_new = tangent(z_new, prev.tangent);
            } catch (const Error&) {
                branch.termination = BranchEnd::RangeExit;
                return branch;
            }
        }
        if (p_.admissible && !p_.admissible(xpart(z_new), apart(z_new))) {
            branch.termination = BranchEnd::RangeExit;
            branch.message = "left the admissible domain";
            return branch;
        }
        const double step_len = norm(z_new - z_prev);
        travelled += step_len;
        branch.points.push_back(make_point(z_new, t_new));
        const std::size_t seg = branch.points.size() - 2;
        for (auto& bif : detect(branch.points[seg], branch.points[seg + 1])) {
            bif.segment = seg;
            branch.bifurcations.push_back(std::move(bif));
        }
        if (exit_range) {
            branch.termination = BranchEnd::RangeExit;
            return branch;
        }
        if (s_.stop_on_closed_loop && travelled > 4 * s_.max_step) {
            // Has the last segment passed the starting point?
            const Vector d = z_new - z_prev;
            const double dd = ip(d, d);
            const double theta = dd > 0 ? std::clamp(ip(z0 - z_prev, d) / dd, 0.0, 1.0) : 0.0;
            const double gap = norm(z_prev + theta * d - z0);
            if (gap < 0.25 * std::max(step_len, s_.min_step) && ip(t_new, t0) > 0) {
                ContinuationPoint first = branch.points.front();
                for (auto& bif : detect(branch.points.back(), first)) {
                    bif.segment = branch.points.size() - 1;
                    branch.bifurcations.push_back(std::move(bif));
                }
                branch.termination = BranchEnd::ClosedLoop;
                return branch;
            }
        }
        if (c.iterations <= 3) h = std::min(1.3 * h, s_.max_step);
    }
    branch.termination = BranchEnd::MaxPoints;
    return branch;
}

}  // namespace

Branch continue_branch(const ContinuationProblem& problem, const Vector& x0, double alpha0, int direction,
                       const ContinuationSettings& settings) {
    Engine e(problem, settings);
    return e.run(x0, alpha0, nullptr, direction);
}

Branch continue_branch(const ContinuationProblem& problem, const Vector& x0, double alpha0,
                       const Vector& initial_tangent, const ContinuationSettings& settings) {
    Engine e(problem, settings);
    return e.run(x0, alpha0, &initial_tangent, 0);
}

std::vector<Bifurcation> detect_and_locate(const ContinuationProblem& problem, const ContinuationPoint& a,
                                           const ContinuationPoint& b, const ContinuationSettings& settings) {
    Engine e(problem, settings);
    return e.detect(a, b);
}

SwitchResult branch_switch(const ContinuationProblem& problem, const Bifurcation& bp, int side,
                           const ContinuationSettings& settings, double offset) {
    if (bp.kind != BifurcationKind::BranchPoint) throw ConfigError("branch switching needs a branch point");
    Engine e(problem, settings);
    if (bp.null_direction.size() != e.n_ + 1 || bp.tangent.size() != e.n_ + 1) {
        throw ConfigError("branch point lacks a null direction");
    }
    const Vector z_bp = e.join(bp.x, bp.alpha);
    const Vector phi = e.unit(bp.null_direction) * (side >= 0 ? 1.0 : -1.0);
    const Vector tau = e.unit(bp.tangent);
    double delta = offset;
    for (int attempt = 0; attempt < 4; ++attempt, delta *= 2) {
        auto c = e.correct(z_bp + delta * phi, phi, z_bp, delta);
        if (!c.ok) continue;
        const Vector d = c.z - z_bp;
        const Vector perp = d - e.ip(tau, d) * tau;
        if (e.norm(perp) <= 0.5 * delta) continue;
        SwitchResult out;
        out.x = e.xpart(c.z);
        out.alpha = e.apart(c.z);
        try {
            out.tangent = e.tangent(c.z, phi);
        } catch (const SingularMatrixError&) {
            out.tangent = phi;
        }
        return out;
    }
    throw ConvergenceError("branch switching fell back onto the original branch", 0.0);
}

Branch join_branches(const Branch& backward, const Branch& forward, bool shared_start) {
    Branch out;
    const std::size_t m = backward.points.size();
    for (std::size_t i = m; i-- > (shared_start ? 1 : 0);) {
        ContinuationPoint p = backward.points[i];
        p.tangent = -p.tangent;
        p.fold_sign = -p.fold_sign;
        out.points.push_back(std::move(p));
    }
    for (const auto& p : forward.points) out.points.push_back(p);
    // Backward point j lands at m-1-j, so its segment s becomes m-2-s.
    const std::size_t first_fwd = shared_start ? m - 1 : m;
    for (auto b : backward.bifurcations) {
        b.segment = m >= 2 + b.segment ? m - 2 - b.segment : 0;
        b.tangent = -b.tangent;
        out.bifurcations.push_back(std::move(b));
    }
    for (auto b : forward.bifurcations) {
        b.segment += first_fwd;
        out.bifurcations.push_back(std::move(b));
    }
    out.termination = forward.termination;
    out.message = backward.message.empty() ? forward.message : backward.message + "; " + forward.message;
    out.rejected_steps = backward.rejected_steps + forward.rejected_steps;
    out.newton_iterations = backward.newton_iterations + forward.newton_iterations;
    std::sort(out.bifurcations.begin(), out.bifurcations.end(),
              [](const Bifurcation& a, const Bifurcation& b) { return a.segment < b.segment; });
    return out;
}

}  // namespace lpakit
