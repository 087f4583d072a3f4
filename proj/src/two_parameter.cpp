#include <lpakit/continuation.hpp>

#include <algorithm>
#include <cmath>

namespace lpakit {

namespace {

const double kCbrtEps = std::cbrt(std::numeric_limits<double>::epsilon());

Matrix jacobian_x(const TwoParameterProblem& p, const Vector& x, double alpha, double beta) {
    if (p.jacobian) return p.jacobian(x, alpha, beta);
    return finite_diff_jacobian([&](const Vector& y) { return p.residual(y, alpha, beta); }, x);
}

Vector d_alpha(const TwoParameterProblem& p, const Vector& x, double alpha, double beta) {
    const double h = kCbrtEps * (1.0 + std::abs(alpha));
    return (p.residual(x, alpha + h, beta) - p.residual(x, alpha - h, beta)) / (2.0 * h);
}

// Central differences with a cube-root step: the augmented residuals already
// contain first derivatives, so a square-root step would amplify their noise.
Matrix coarse_jacobian(const std::function<Vector(const Vector&)>& g, const Vector& y) {
    Vector yp = y;
    Matrix jac;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double h = kCbrtEps * (1.0 + std::abs(y[i]));
        yp[i] = y[i] + h;
        const Vector gp = g(yp);
        yp[i] = y[i] - h;
        const Vector gm = g(yp);
        yp[i] = y[i];
        if (i == 0) jac.resize(gp.size(), y.size());
        jac.col(i) = (gp - gm) / (2.0 * h);
    }
    return jac;
}

ContinuationProblem augmented_problem(std::size_t dim, std::function<Vector(const Vector&, double)> g,
                                      std::size_t alpha_index, const TwoParamSettings& s) {
    ContinuationProblem aug;
    aug.dimension = dim;
    aug.residual = g;
    aug.jacobian = [g](const Vector& y, double beta) {
        return coarse_jacobian([&](const Vector& yy) { return g(yy, beta); }, y);
    };
    aug.param_derivative = [g](const Vector& y, double beta) {
        const double h = kCbrtEps * (1.0 + std::abs(beta));
        return Vector((g(y, beta + h) - g(y, beta - h)) / (2.0 * h));
    };
    const double lo = s.alpha_min, hi = s.alpha_max;
    aug.admissible = [alpha_index, lo, hi](const Vector& y, double) {
        const double a = y[static_cast<Eigen::Index>(alpha_index)];
        return a >= lo && a <= hi;
    };
    return aug;
}

TwoParamCurve trace(const ContinuationProblem& aug, const Vector& y0, double beta0, const TwoParamSettings& s,
                    std::size_t n, bool has_unfolding) {
    ContinuationSettings cs = s.continuation;
    cs.alpha_min = s.beta_min;
    cs.alpha_max = s.beta_max;
    cs.compute_eigenvalues = false;
    cs.detect_folds = true;
    cs.detect_branch_points = false;
    cs.detect_hopf = false;
    cs.corrector_max_iter = std::max(cs.corrector_max_iter, 15);

    const int dir = s.direction >= 0 ? 1 : -1;
    Branch fwd = continue_branch(aug, y0, beta0, dir, cs);
    Branch bwd;
    if (s.both_directions) bwd = continue_branch(aug, y0, beta0, -dir, cs);

    const auto na = static_cast<Eigen::Index>(n);
    auto to_point = [&](const ContinuationPoint& cp) {
        TwoParamPoint pt;
        pt.beta = cp.alpha;
        pt.x = cp.x.head(na);
        if (has_unfolding) {
            pt.alpha = cp.x[2 * na];
            pt.unfolding = cp.x[2 * na + 1];
            pt.genuine = std::abs(pt.unfolding) <= s.genuine_tol;
        } else {
            pt.alpha = cp.x[2 * na];
        }
        return pt;
    };

    TwoParamCurve curve;
    const std::size_t m = bwd.points.size();
    for (std::size_t i = m; i-- > 1;) curve.points.push_back(to_point(bwd.points[i]));
    const std::size_t offset = m > 0 ? m - 1 : 0;
    for (const auto& cp : fwd.points) curve.points.push_back(to_point(cp));

    std::vector<std::size_t> turns;
    auto add_turn = [&](const Bifurcation& b, std::size_t index) {
        TwoParamEvent ev;
        ev.kind = "turning";
        ev.beta = b.alpha;
        ev.alpha = b.x[2 * na];
        ev.index = index;
        curve.events.push_back(ev);
        turns.push_back(index);
    };
    for (const auto& b : bwd.bifurcations) {
        if (b.kind == BifurcationKind::Fold && m >= 2) add_turn(b, m - 2 - std::min(b.segment, m - 2));
    }
    for (const auto& b : fwd.bifurcations) {
        if (b.kind == BifurcationKind::Fold) add_turn(b, offset + b.segment);
    }
    if (!curve.points.empty()) {
        TwoParamEvent first{std::string("end:") + std::string(to_string(s.both_directions ? bwd.termination
                                                                                           : BranchEnd::RangeExit)),
                            curve.points.front().alpha, curve.points.front().beta, 0};
        TwoParamEvent last{std::string("end:") + std::string(to_string(fwd.termination)), curve.points.back().alpha,
                           curve.points.back().beta, curve.points.size() - 1};
        if (s.both_directions) curve.events.push_back(first);
        curve.events.push_back(last);
    }
    std::sort(turns.begin(), turns.end());
    std::size_t begin = 0;
    for (std::size_t k : turns) {
        if (k >= begin && k + 1 < curve.points.size()) {
            curve.segments.emplace_back(begin, k);
            begin = k + 1;
        }
    }
    if (!curve.points.empty()) curve.segments.emplace_back(begin, curve.points.size() - 1);
    curve.termination = fwd.termination;
    return curve;
}

}  // namespace

TwoParamCurve continue_fold_2par(const TwoParameterProblem& problem, const Bifurcation& fold, double beta0,
                                 const TwoParamSettings& settings) {
    const std::size_t n = problem.dimension;
    const auto na = static_cast<Eigen::Index>(n);
    if (fold.x.size() != na || fold.null_direction.size() != na) {
        throw ConfigError("fold continuation needs a fold with an n-dimensional null vector");
    }
    auto g = [&problem, na](const Vector& y, double beta) {
        const Vector x = y.head(na);
        const Vector v = y.segment(na, na);
        const double alpha = y[2 * na];
        Vector out(2 * na + 1);
        out.head(na) = problem.residual(x, alpha, beta);
        out.segment(na, na) = jacobian_x(problem, x, alpha, beta) * v;
        out[2 * na] = v.squaredNorm() - 1.0;
        return out;
    };
    Vector y0(2 * na + 1);
    y0.head(na) = fold.x;
    y0.segment(na, na) = fold.null_direction.normalized();
    y0[2 * na] = fold.alpha;
    const auto aug = augmented_problem(2 * n + 1, g, 2 * n, settings);
    return trace(aug, y0, beta0, settings, n, false);
}

TwoParamCurve continue_branchpoint_2par(const TwoParameterProblem& problem, const Bifurcation& bp, double beta0,
                                        const TwoParamSettings& settings) {
    const std::size_t n = problem.dimension;
    const auto na = static_cast<Eigen::Index>(n);
    if (bp.x.size() != na) throw ConfigError("branch point has the wrong dimension");
    auto g = [&problem, na](const Vector& y, double beta) {
        const Vector x = y.head(na);
        const Vector w = y.segment(na, na);
        const double alpha = y[2 * na];
        const double mu = y[2 * na + 1];
        Vector out(2 * na + 2);
        out.head(na) = problem.residual(x, alpha, beta) + mu * w;
        out.segment(na, na) = jacobian_x(problem, x, alpha, beta).transpose() * w;
        out[2 * na] = w.squaredNorm() - 1.0;
        out[2 * na + 1] = w.dot(d_alpha(problem, x, alpha, beta));
        return out;
    };
    Vector y0(2 * na + 2);
    y0.head(na) = bp.x;
    y0.segment(na, na) = null_vector(jacobian_x(problem, bp.x, bp.alpha, beta0), true);
    y0[2 * na] = bp.alpha;
    y0[2 * na + 1] = 0.0;
    const auto aug = augmented_problem(2 * n + 2, g, 2 * n, settings);
    return trace(aug, y0, beta0, settings, n, true);
}

std::vector<double> crossings_at(const std::vector<TwoParamCurve>& curves, double beta) {
    std::vector<double> out;
    for (const auto& c : curves) {
        const auto& pts = c.points;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double b0 = pts[i].beta, b1 = pts[i + 1].beta;
            if ((b0 - beta) * (b1 - beta) > 0 || b0 == b1) continue;
            if (beta == b1 && i + 2 < pts.size()) continue;
            const double th = (beta - b0) / (b1 - b0);
            out.push_back(pts[i].alpha + th * (pts[i + 1].alpha - pts[i].alpha));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double band_area(const std::vector<TwoParamCurve>& curves, double beta_lo, double beta_hi, int samples) {
    if (!(beta_hi > beta_lo) || samples < 2) return 0.0;
    const double h = (beta_hi - beta_lo) / (samples - 1);
    double area = 0.0;
    for (int i = 0; i < samples; ++i) {
        const auto xs = crossings_at(curves, beta_lo + i * h);
        const double w = xs.size() >= 2 ? xs.back() - xs.front() : 0.0;
        area += (i == 0 || i == samples - 1 ? 0.5 : 1.0) * w * h;
    }
    return area;
}

}  // namespace lpakit
