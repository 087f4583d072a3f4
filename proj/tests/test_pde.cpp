#include <lpakit/builtin_models.hpp>
#include <lpakit/config.hpp>
#include <lpakit/pde.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace lpakit;

namespace {

ReactionModel pure_diffusion(const std::string& kinetics_u = "0") {
    return parse_model_config(R"({
      "name": "diffusion",
      "variables": [{"name": "u", "class": "slow", "diffusivity": "eps^2"},
                    {"name": "v", "class": "fast", "diffusivity": "D"}],
      "parameters": {"eps": 0.2, "D": 1.0},
      "kinetics": {"u": ")" + kinetics_u + R"(", "v": "0"}
    })");
}

}  // namespace

TEST_CASE("grid geometry") {
    CHECK_THROWS_AS(Grid1D(8), ConfigError);
    const Grid1D g(100);
    CHECK(g.spacing() == doctest::Approx(0.02));
    CHECK(g.x(0) == doctest::Approx(-0.99));
    CHECK(g.x(99) == doctest::Approx(0.99));
    CHECK_FALSE(g.resolution_warning(0.01).empty());
    CHECK(g.resolution_warning(0.5).empty());
}

TEST_CASE("a cosine mode decays at the discrete Laplacian rate") {
    const auto m = pure_diffusion();
    const auto p = m.default_parameters();
    const Grid1D g(32);
    const double h = g.spacing();
    const double k = std::numbers::pi / 2;  // cos(pi (x + 1) / 2), the slowest no-flux mode
    Vector y = Vector::Zero(2 * g.size());
    for (int i = 0; i < g.size(); ++i) {
        y[i] = 1.0 + 0.3 * std::cos(k * (g.x(i) + 1.0));
        y[g.size() + i] = 2.0 + 0.1 * std::cos(2 * k * (g.x(i) + 1.0));
    }
    PdeSettings s;
    s.rel_tol = 1e-8;
    s.abs_tol = 1e-11;
    s.stop_when_steady = false;
    const double t = 3.0;
    const auto run = simulate(m, p, g, y, t, s);
    const double rate_u = -0.04 * 4.0 / (h * h) * std::pow(std::sin(k * h / 2), 2);
    const double rate_v = -1.0 * 4.0 / (h * h) * std::pow(std::sin(k * h), 2);
    for (int i = 0; i < g.size(); ++i) {
        const double cu = std::cos(k * (g.x(i) + 1.0)), cv = std::cos(2 * k * (g.x(i) + 1.0));
        CHECK(run.state[i] == doctest::Approx(1.0 + 0.3 * std::exp(rate_u * t) * cu).epsilon(1e-6));
        CHECK(run.state[g.size() + i] == doctest::Approx(2.0 + 0.1 * std::exp(rate_v * t) * cv).epsilon(1e-6));
    }
}

TEST_CASE("no-flux boundaries conserve mass") {
    const auto m = pure_diffusion();
    const Grid1D g(50);
    Vector y = add_noise(m, g, uniform_field(g, Vector::Ones(2)), 0.5, 42);
    const double before = y.head(g.size()).sum();
    const auto run = simulate(m, m.default_parameters(), g, y, 10.0);
    CHECK(run.state.head(g.size()).sum() == doctest::Approx(before).epsilon(1e-10));
}

TEST_CASE("steady state stays flat") {
    const auto m = schnakenberg();
    const auto p = m.default_parameters();
    const Grid1D g(64);
    const auto h = solve_hss(m, p, m.default_seed());
    const Vector y = uniform_field(g, h.state);
    CHECK(pde_rhs(m, p, g, y).lpNorm<Eigen::Infinity>() < 1e-12);
    const auto run = simulate(m, p, g, y, 50.0);
    CHECK(run.termination == PdeEnd::Steady);
    const auto metrics = pattern_metrics(m, g, run.state);
    CHECK(metrics.classification == PatternClass::Homogeneous);
    CHECK(metrics.amplitude[0] < 1e-6);
}

TEST_CASE("jacobian matches finite differences") {
    const auto m = schnakenberg();
    const auto p = m.default_parameters();
    const Grid1D g(20);
    const Vector y = add_noise(m, g, uniform_field(g, solve_hss(m, p, m.default_seed()).state), 0.3, 1);
    const Matrix j = pde_jacobian(m, p, g, y);
    const Matrix fd = finite_diff_jacobian([&](const Vector& z) { return pde_rhs(m, p, g, z); }, y);
    CHECK((j - fd).lpNorm<Eigen::Infinity>() < 1e-5 * (1.0 + j.lpNorm<Eigen::Infinity>()));
    const auto prob = pde_continuation_problem(m, p, "a", g);
    CHECK((prob.residual(y, p.get("a")) - pde_rhs(m, p, g, y)).norm() < 1e-14);
}

TEST_CASE("perturbations and noise") {
    const auto m = schnakenberg();
    const Grid1D g(400);
    Vector state(2);
    state << 2.0, 0.25;
    PerturbationSpec spec;
    spec.amplitudes = Vector::Constant(1, 1.5);
    const Vector y = apply_perturbation(m, state, g, spec);
    int changed = 0;
    for (int i = 0; i < g.size(); ++i) changed += y[i] != 2.0;
    CHECK(changed == 40);
    CHECK(y.tail(g.size()).isApproxToConstant(0.25));

    const Vector base = uniform_field(g, state);
    const Vector a = add_noise(m, g, base, 1e-3, 7);
    CHECK(a == add_noise(m, g, base, 1e-3, 7));
    CHECK(a != add_noise(m, g, base, 1e-3, 8));
    CHECK((a - base).lpNorm<Eigen::Infinity>() <= 1e-3);
    CHECK(a.tail(g.size()) == base.tail(g.size()));
}

TEST_CASE("pattern classification") {
    const auto m = schnakenberg();
    const Grid1D g(200);
    Vector spike = Vector::Constant(400, 1.0), front = spike;
    for (int i = 0; i < 200; ++i) {
        spike[i] = 1.0 + 10.0 * std::exp(-std::pow(g.x(i) / 0.05, 2));
        front[i] = 2.0 + std::tanh((g.x(i) - 0.2) / 0.03);
    }
    const auto ms = pattern_metrics(m, g, spike);
    CHECK(ms.classification == PatternClass::Spike);
    REQUIRE(ms.spike);
    CHECK(ms.spike->height == doctest::Approx(11.0).epsilon(1e-2));
    CHECK(std::abs(ms.spike->location) < 0.01);
    CHECK(pattern_metrics(m, g, front).classification == PatternClass::Interface);
    Vector two = spike;
    for (int i = 0; i < 200; ++i) two[i] += 10.0 * std::exp(-std::pow((g.x(i) - 0.6) / 0.05, 2));
    CHECK(pattern_metrics(m, g, two).classification == PatternClass::Other);
}

TEST_CASE("spike asymptotics") {
    const auto s = spike_asymptotic(0.0, 1.0, 0.025);
    CHECK(s.peak == doctest::Approx(20.0));
    CHECK(s.v_level == doctest::Approx(0.075));
    CHECK(s.u(0.0) == doctest::Approx(20.0));
    CHECK(s.u(0.5) < 1e-6);
    const auto m = schnakenberg();
    const Grid1D g(64);
    CHECK_THROWS_AS(compare_spike(m, m.default_parameters(), g, uniform_field(g, Vector::Ones(2)), s),
                    NotApplicableError);
}

TEST_CASE("blow-up raises an integration error") {
    const auto m = pure_diffusion("u^2");
    const Grid1D g(16);
    CHECK_THROWS_AS(simulate(m, m.default_parameters(), g, uniform_field(g, Vector::Constant(2, 10.0)), 5.0),
                    IntegrationError);
}
