#include <lpakit/continuation.hpp>

#include <doctest.h>

#include <cmath>

using namespace lpakit;

namespace {

ContinuationProblem scalar(std::function<double(double, double)> f, std::function<double(double, double)> fx) {
    ContinuationProblem p;
    p.dimension = 1;
    p.residual = [f](const Vector& x, double a) { return Vector::Constant(1, f(x[0], a)); };
    p.jacobian = [fx](const Vector& x, double a) { return Matrix::Constant(1, 1, fx(x[0], a)); };
    return p;
}

ContinuationSettings bounded(double lo, double hi) {
    ContinuationSettings s;
    s.alpha_min = lo;
    s.alpha_max = hi;
    s.max_step = 0.05;
    return s;
}

std::vector<Bifurcation> of_kind(const Branch& b, BifurcationKind k) {
    std::vector<Bifurcation> out;
    for (const auto& x : b.bifurcations) {
        if (x.kind == k) out.push_back(x);
    }
    return out;
}

}  // namespace

TEST_CASE("fold of x^2 = alpha at alpha = 0") {
    const auto p = scalar([](double x, double a) { return x * x - a; }, [](double x, double) { return 2 * x; });
    const auto b = continue_branch(p, Vector::Constant(1, 1.0), 1.0, -1, bounded(-1, 2));
    const auto folds = of_kind(b, BifurcationKind::Fold);
    REQUIRE(folds.size() == 1);
    CHECK(std::abs(folds[0].alpha) < 1e-7);
    CHECK(b.termination == BranchEnd::RangeExit);
    // Both halves of the parabola are traced: x = +sqrt(alpha) is stable for f = alpha - x^2.
    bool negative_side = false;
    for (const auto& pt : b.points) {
        negative_side = negative_side || pt.x[0] < -0.5;
        CHECK(std::abs(pt.x[0] * pt.x[0] - pt.alpha) < 1e-9);
    }
    CHECK(negative_side);
}

TEST_CASE("transcritical branch point and switching") {
    const auto p = scalar([](double x, double a) { return x * (a - x); }, [](double x, double a) { return a - 2 * x; });
    const auto b = continue_branch(p, Vector::Constant(1, 0.0), -1.0, +1, bounded(-1, 1));
    const auto bps = of_kind(b, BifurcationKind::BranchPoint);
    REQUIRE(bps.size() == 1);
    CHECK(std::abs(bps[0].alpha) < 1e-7);
    // Stability flips at the crossing: x = 0 of x' = x(a - x) is stable for a < 0.
    CHECK(b.points.front().stable);
    CHECK_FALSE(b.points.back().stable);

    const auto sw = branch_switch(p, bps[0], +1, bounded(-1, 1));
    const auto other = continue_branch(p, sw.x, sw.alpha, sw.tangent, bounded(-1, 1));
    for (const auto& pt : other.points) CHECK(std::abs(pt.x[0] - pt.alpha) < 1e-8);
    CHECK(other.points.size() > 10);
}

TEST_CASE("hopf of the radial normal form") {
    ContinuationProblem p;
    p.dimension = 2;
    p.residual = [](const Vector& z, double a) {
        const double r2 = z.squaredNorm();
        Vector f(2);
        f << a * z[0] - 2 * z[1] - z[0] * r2, 2 * z[0] + a * z[1] - z[1] * r2;
        return f;
    };
    const auto b = continue_branch(p, Vector::Zero(2), -0.5, +1, bounded(-0.5, 0.5));
    const auto hopf = of_kind(b, BifurcationKind::Hopf);
    REQUIRE(hopf.size() == 1);
    CHECK(std::abs(hopf[0].alpha) < 1e-6);
    CHECK(hopf[0].frequency == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(of_kind(b, BifurcationKind::Fold).empty());
    CHECK(of_kind(b, BifurcationKind::BranchPoint).empty());
}

TEST_CASE("isola closes into a loop") {
    // Circle x^2 + alpha^2 = 1.
    const auto p = scalar([](double x, double a) { return x * x + a * a - 1; }, [](double x, double) { return 2 * x; });
    const auto b = continue_branch(p, Vector::Constant(1, 1.0), 0.0, +1, bounded(-2, 2));
    CHECK(b.termination == BranchEnd::ClosedLoop);
    CHECK(of_kind(b, BifurcationKind::Fold).size() == 2);
}

TEST_CASE("join keeps bifurcations attached to their segments") {
    const auto p = scalar([](double x, double a) { return x * x - a; }, [](double x, double) { return 2 * x; });
    const auto fwd = continue_branch(p, Vector::Constant(1, 0.5), 0.25, +1, bounded(-1, 1));
    const auto bwd = continue_branch(p, Vector::Constant(1, 0.5), 0.25, -1, bounded(-1, 1));
    const auto j = join_branches(bwd, fwd, true);
    CHECK(j.points.size() == fwd.points.size() + bwd.points.size() - 1);
    REQUIRE(j.bifurcations.size() == 1);
    const auto& f = j.bifurcations[0];
    const double x0 = j.points[f.segment].x[0], x1 = j.points[f.segment + 1].x[0];
    CHECK(std::min(x0, x1) <= f.x[0]);
    CHECK(std::max(x0, x1) >= f.x[0]);
    for (std::size_t i = 1; i < j.points.size(); ++i) {
        CHECK(std::abs(j.points[i].x[0] - j.points[i - 1].x[0]) < 0.2);
    }
}

TEST_CASE("fold curve of the cusp satisfies 27 alpha^2 = 4 beta^3") {
    // x^3 - beta x + alpha = 0; folds where 3x^2 = beta.
    TwoParameterProblem p;
    p.dimension = 1;
    p.residual = [](const Vector& x, double a, double b) { return Vector::Constant(1, x[0] * x[0] * x[0] - b * x[0] + a); };
    ContinuationProblem one;
    one.dimension = 1;
    one.residual = [&](const Vector& x, double a) { return p.residual(x, a, 3.0); };
    const auto branch = continue_branch(one, Vector::Constant(1, 2.2), -4.0, +1, bounded(-5, 5));
    const auto folds = of_kind(branch, BifurcationKind::Fold);
    REQUIRE(folds.size() == 2);

    TwoParamSettings s;
    s.beta_min = -1;
    s.beta_max = 4;
    s.continuation.max_step = 0.05;
    const auto curve = continue_fold_2par(p, folds[0], 3.0, s);
    REQUIRE(curve.points.size() > 20);
    for (const auto& pt : curve.points) {
        CHECK(std::abs(27 * pt.alpha * pt.alpha - 4 * pt.beta * pt.beta * pt.beta) < 1e-6);
    }
    bool cusp = false;
    for (const auto& e : curve.events) {
        if (e.kind == "turning") cusp = cusp || (std::abs(e.beta) < 1e-4 && std::abs(e.alpha) < 1e-4);
    }
    CHECK(cusp);
}

TEST_CASE("branch point curve of x (alpha - beta x0) follows alpha = beta") {
    TwoParameterProblem p;
    p.dimension = 1;
    p.residual = [](const Vector& x, double a, double b) { return Vector::Constant(1, x[0] * (a - b - x[0])); };
    ContinuationProblem one;
    one.dimension = 1;
    one.residual = [&](const Vector& x, double a) { return p.residual(x, a, 0.5); };
    const auto branch = continue_branch(one, Vector::Zero(1), -1.0, +1, bounded(-1, 2));
    const auto bps = of_kind(branch, BifurcationKind::BranchPoint);
    REQUIRE(bps.size() == 1);
    TwoParamSettings s;
    s.beta_min = 0;
    s.beta_max = 1.5;
    const auto curve = continue_branchpoint_2par(p, bps[0], 0.5, s);
    REQUIRE(curve.points.size() > 5);
    for (const auto& pt : curve.points) {
        CHECK(std::abs(pt.alpha - pt.beta) < 1e-8);
        CHECK(pt.genuine);
    }
}

TEST_CASE("band area between two curves") {
    TwoParamCurve left, right;
    for (int i = 0; i <= 10; ++i) {
        const double b = i / 10.0;
        left.points.push_back({0.0, b, Vector(), 0.0, true});
        right.points.push_back({b, b, Vector(), 0.0, true});
    }
    CHECK(band_area({left, right}, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(band_area({left}, 0.0, 1.0) == 0.0);
    const auto xs = crossings_at({left, right}, 0.35);
    REQUIRE(xs.size() == 2);
    CHECK(xs[1] == doctest::Approx(0.35));
}
