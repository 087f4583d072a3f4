#include <lpakit/numerics.hpp>

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lpakit;

TEST_CASE("newton converges quadratically on a smooth system") {
    // x^2 + y^2 = 4, x = y
    auto f = [](const Vector& z) {
        Vector r(2);
        r << z[0] * z[0] + z[1] * z[1] - 4.0, z[0] - z[1];
        return r;
    };
    auto j = [](const Vector& z) {
        Matrix m(2, 2);
        m << 2 * z[0], 2 * z[1], 1, -1;
        return m;
    };
    const auto r = newton_solve(f, j, Vector::Constant(2, 1.0));
    CHECK(r.x[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.iterations <= 8);
    CHECK((finite_diff_jacobian(f, r.x) - j(r.x)).norm() < 1e-6);
}

TEST_CASE("newton reports failure") {
    auto f = [](const Vector& z) { return Vector::Constant(1, z[0] * z[0] + 1.0); };
    auto j = [](const Vector& z) { return Matrix::Constant(1, 1, 2 * z[0]); };
    CHECK_THROWS_AS(newton_solve(f, j, Vector::Constant(1, 0.3)), Error);
}

TEST_CASE("eigenvalues of a known matrix") {
    // Block diagonal: a rotation-scaling block with eigenvalues -1 +- 2i and a 2x2 block with 3 and -4.
    Matrix a = Matrix::Zero(4, 4);
    a(0, 0) = -1;
    a(0, 1) = 2;
    a(1, 0) = -2;
    a(1, 1) = -1;
    a(2, 2) = 2;
    a(2, 3) = 2;
    a(3, 2) = 3;
    a(3, 3) = -3;
    const auto ev = eig_real(a);
    REQUIRE(ev.size() == 4);
    CHECK(ev[0].real() == doctest::Approx(3.0));
    CHECK(ev[1].real() == doctest::Approx(-1.0));
    CHECK(ev[1].imag() == doctest::Approx(2.0));
    CHECK(ev[2].imag() == doctest::Approx(-2.0));
    CHECK(ev[3].real() == doctest::Approx(-4.0));
}

TEST_CASE("determinant sign and null vectors") {
    Matrix a(2, 2);
    a << 1, 2, 3, 4;
    CHECK(determinant_sign(a).sign == -1);
    CHECK(determinant_sign(a).log_abs == doctest::Approx(std::log(2.0)));
    Matrix s(2, 2);
    s << 1, 2, 2, 4;
    const Vector v = null_vector(s);
    CHECK((s * v).norm() < 1e-10);
    CHECK(v.norm() == doctest::Approx(1.0));
    const Vector w = null_vector(s, true);
    CHECK((s.transpose() * w).norm() < 1e-10);
    CHECK(smallest_singular_value(s) < 1e-12);
    CHECK_THROWS_AS(solve_linear(s, Vector::Ones(2)), SingularMatrixError);
}

TEST_CASE("adaptive integration of linear decay and an oscillator") {
    auto decay = [](double, const Vector& y) { return Vector(-y); };
    const auto tr = integrate(decay, Vector::Ones(1), 0.0, 5.0);
    CHECK(tr.termination == Termination::ReachedEnd);
    CHECK(tr.final_state()[0] == doctest::Approx(std::exp(-5.0)).epsilon(1e-7));

    auto osc = [](double, const Vector& y) {
        Vector d(2);
        d << y[1], -y[0];
        return d;
    };
    Vector y0(2);
    y0 << 1, 0;
    const auto to = integrate(osc, y0, 0.0, 10.0);
    CHECK(to.final_state()[0] == doctest::Approx(std::cos(10.0)).epsilon(1e-6));
}

TEST_CASE("events stop the integration at the crossing") {
    auto decay = [](double, const Vector& y) { return Vector(-y); };
    OdeSettings s;
    s.events.push_back({[](double, const Vector& y) { return y[0] - 0.5; }, -1, true});
    const auto tr = integrate(decay, Vector::Ones(1), 0.0, 5.0, s);
    CHECK(tr.termination == Termination::Event);
    CHECK(tr.event_index == 0);
    CHECK(tr.final_time() == doctest::Approx(std::log(2.0)).epsilon(1e-6));
}

TEST_CASE("non-finite states end the run as a failure") {
    auto blow = [](double, const Vector& y) { return Vector(y.array().square()); };
    const auto tr = integrate(blow, Vector::Ones(1), 0.0, 2.0);
    CHECK(tr.termination == Termination::Failure);
    CHECK(tr.final_time() < 1.0 + 1e-6);
}
