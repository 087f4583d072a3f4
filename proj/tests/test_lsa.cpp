#include <lpakit/builtin_models.hpp>
#include <lpakit/lsa.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lpakit;

namespace {

// det(J_k) for the Schnakenberg steady state, written out by hand.
double schnakenberg_det(double a, double b, double eps, double d, double k) {
    const double u = a + b;
    const double fu = -1.0 + 2.0 * b / u, fv = u * u, gu = -2.0 * b / u, gv = -u * u;
    return (fu - k * k * eps * eps) * (gv - k * k * d) - fv * gu;
}

double bisect(std::function<double(double)> f, double lo, double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((f(lo) < 0) == (f(mid) < 0) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("mode sets") {
    const auto c = ModeSet::cosine(4);
    REQUIRE(c.ks.size() == 5);
    CHECK(c.ks[2] == doctest::Approx(std::numbers::pi));
    CHECK(ModeSet::continuous(2.0, 5).ks.back() == 2.0);
}

TEST_CASE("the k = 0 mode reproduces the well-mixed spectrum") {
    const auto m = substrate_inhibition();
    const auto h = solve_hss(m, m.default_parameters(), m.default_seed());
    const auto r = dispersion(m, h, ModeSet::single(0.0));
    const auto ev = eig_real(m.jacobian(h.state, h.params));
    REQUIRE(r.modes.size() == 1);
    for (std::size_t i = 0; i < ev.size(); ++i) CHECK(std::abs(r.modes[0].eigenvalues[i] - ev[i]) < 1e-12);
}

TEST_CASE("turing edge agrees with the closed-form determinant") {
    const auto m = schnakenberg();
    for (double eps : {0.1, 0.05, 0.025}) {
        for (double d : {10.0, 1000.0}) {
            const auto p = m.parameters_from({{"b", 1.0}, {"eps", eps}, {"D", d}});
            const double k = std::numbers::pi;
            const auto edges = turing_edge(m, p, "a", 0.0, 2.0, ModeSet::single(k), {200, 1e-10, std::nullopt});
            const double oracle = bisect([&](double a) { return schnakenberg_det(a, 1.0, eps, d, k); }, 0.0, 2.0);
            CHECK(edges.right == doctest::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("edge search with no sign change") {
    const auto m = schnakenberg();
    const auto p = m.parameters_from({{"eps", 0.05}, {"D", 10.0}});
    CHECK_THROWS_AS(turing_edge(m, p, "a", 1.5, 2.0, ModeSet::cosine()), NotApplicableError);
}

TEST_CASE("gershgorin disks") {
    Matrix a(3, 3);
    a << -1, 0.5, 0.1, 0.2, -2, 0.1, 0.1, 0.3, -50;
    const auto g = gershgorin_disks(a, 2);
    REQUIRE(g.disks.size() == 3);
    CHECK(g.disks[0].radius == doctest::Approx(0.6));
    CHECK(g.disks[2].center.real() == -50);
    CHECK(g.separated);
    CHECK(g.contained);
    a(0, 2) = 60;
    CHECK_FALSE(gershgorin_disks(a, 2).separated);
}

TEST_CASE("slow eigenvalues approach the shifted local block as D grows") {
    const auto m = schnakenberg();
    const auto p = m.parameters_from({{"a", 1.5}, {"b", 1.0}});
    const auto h = solve_hss(m, p, m.default_seed());
    const auto r = theorem1_check(m, h, std::numbers::pi, {0.01}, {10, 100, 1000, 10000});
    REQUIRE(r.rows.size() == 4);
    for (std::size_t i = 1; i < r.rows.size(); ++i) CHECK(r.rows[i].deviation[0] < r.rows[i - 1].deviation[0]);
    CHECK(r.rows.back().fast_ratio[0] == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("growth sign follows the local slow eigenvalue for small eps and large D") {
    const auto m = schnakenberg();
    for (double a : {0.5, 0.9, 1.1, 1.5}) {
        const auto p = m.parameters_from({{"a", a}, {"b", 1.0}, {"eps", 1e-3}, {"D", 1e4}});
        const auto h = solve_hss(m, p, m.default_seed());
        const double local = -1.0 + 2.0 / (a + 1.0);
        const double growth = dispersion(m, h, ModeSet::cosine()).max_growth;
        CAPTURE(a);
        CHECK((growth > 0) == (local > 0));
    }
}

TEST_CASE("eps and D overrides") {
    const auto p = schnakenberg().default_parameters();
    const auto q = with_eps_d(p, 0.2, std::nullopt);
    CHECK(q.get("eps") == 0.2);
    CHECK(q.get("D") == p.get("D"));
}
