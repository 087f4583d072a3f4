#include <lpakit/builtin_models.hpp>
#include <lpakit/config.hpp>
#include <lpakit/lpa.hpp>

#include <doctest.h>

#include <random>

using namespace lpakit;

TEST_CASE("schnakenberg steady state is u = a + b, v = b / (a + b)^2") {
    const auto m = schnakenberg();
    for (double a : {0.0, 0.5, 1.3, 2.9}) {
        for (double b : {0.5, 1.0, 2.0}) {
            const auto p = m.parameters_from({{"a", a}, {"b", b}});
            const auto h = solve_hss(m, p, m.default_seed());
            CHECK(h.state[0] == doctest::Approx(a + b).epsilon(1e-10));
            CHECK(h.state[1] == doctest::Approx(b / ((a + b) * (a + b))).epsilon(1e-10));
        }
    }
}

TEST_CASE("substrate inhibition steady state zeroes the kinetics") {
    const auto m = substrate_inhibition();
    const auto p = m.default_parameters();
    const auto h = solve_hss(m, p, m.default_seed());
    CHECK(m.kinetics(h.state, p).lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("analytic jacobians match finite differences") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.2, 2.0);
    for (const auto& name : builtin_names()) {
        const auto m = builtin(name);
        if (!m.has_analytic_jacobian()) continue;
        const auto p = m.default_parameters();
        for (int trial = 0; trial < 5; ++trial) {
            Vector x(static_cast<Eigen::Index>(m.dimension()));
            for (auto& xi : x) xi = unit(rng);
            const Matrix exact = m.jacobian(x, p);
            const Matrix fd = m.finite_difference_jacobian(x, p);
            CHECK_MESSAGE((exact - fd).lpNorm<Eigen::Infinity>() <= 1e-6 * (1.0 + exact.lpNorm<Eigen::Infinity>()), name);
        }
    }
}

TEST_CASE("gtpase network shape") {
    const auto m = gtpase_pi();
    CHECK(m.dimension() == 9);
    CHECK(m.slow_count() == 6);
    CHECK(m.fast_count() == 3);
    CHECK(LpaSystem(m).dimension() == 15);
    const auto fast_pi = gtpase_pi(PiClass::Fast);
    CHECK(fast_pi.slow_count() == 3);
    // Total Rac is conserved by the kinetics.
    const auto p = m.default_parameters();
    const auto h = solve_hss(m, p, m.default_seed());
    for (const auto& law : m.conservation_laws()) {
        double total = 0.0;
        for (const auto& [i, c] : law.terms) total += c * h.state[static_cast<Eigen::Index>(i)];
        CHECK(total == doctest::Approx(p.get(law.total)).epsilon(1e-9));
    }
}

TEST_CASE("parameter lookup errors") {
    const auto m = schnakenberg();
    CHECK_THROWS_AS(m.parameters_from({{"nosuch", 1.0}}), ConfigError);
    CHECK_THROWS_AS(builtin("nosuch"), ConfigError);
    CHECK_THROWS_AS(m.default_parameters().index("q"), ConfigError);
}

TEST_CASE("config models") {
    const char* text = R"({
      "name": "cfg",
      "variables": [{"name": "v", "class": "fast", "diffusivity": "D"},
                    {"name": "u", "class": "slow", "diffusivity": "eps^2"}],
      "parameters": {"a": 1.0, "b": 1.0, "eps": 0.05, "D": 10},
      "kinetics": {"u": "a - u + u^2*v", "v": "b - u^2*v"},
      "seed": {"u": 2.0, "v": 0.25}
    })";
    const auto m = parse_model_config(text);
    REQUIRE(m.dimension() == 2);
    CHECK(m.variables()[0].name == "u");
    CHECK(m.slow_count() == 1);

    SUBCASE("matches the built-in kinetics") {
        const auto ref = schnakenberg();
        const auto p = m.parameters_from({{"a", 0.7}, {"b", 1.3}});
        const auto pr = ref.parameters_from({{"a", 0.7}, {"b", 1.3}});
        Vector x(2);
        x << 1.7, 0.4;
        CHECK((m.kinetics(x, p) - ref.kinetics(x, pr)).norm() < 1e-14);
        CHECK((m.jacobian(x, p) - ref.jacobian(x, pr)).norm() < 1e-6);
        CHECK(m.diffusivities(p)[0] == doctest::Approx(0.0025));
        CHECK(m.diffusivities(p)[1] == doctest::Approx(10.0));
    }

    SUBCASE("validation") {
        auto bad = [](const std::string& s) { CHECK_THROWS_AS(parse_model_config(s), ConfigError); };
        bad("{");
        bad(R"({"name": "x"})");
        bad(R"({"name": "x", "variables": [{"name": "u", "class": "slow", "diffusivity": 1}],
                "parameters": {}, "kinetics": {"u": "-u"}})");
        bad(R"({"name": "x", "variables": [{"name": "u", "class": "slow", "diffusivity": 1},
                {"name": "v", "class": "fast", "diffusivity": 1}], "parameters": {"a": 1},
                "kinetics": {"u": "a - u*w", "v": "u - v"}})");
        bad(R"({"name": "x", "variables": [{"name": "u", "class": "slow", "diffusivity": 1},
                {"name": "u", "class": "fast", "diffusivity": 1}], "parameters": {},
                "kinetics": {"u": "-u"}})");
        bad(R"({"name": "x", "variables": [{"name": "u", "class": "slow", "diffusivity": 1},
                {"name": "v", "class": "fast", "diffusivity": 1}], "parameters": {},
                "kinetics": {"u": "-u"}})");
        bad(R"({"name": "x", "variables": [{"name": "u", "class": "medium", "diffusivity": 1},
                {"name": "v", "class": "fast", "diffusivity": 1}], "parameters": {},
                "kinetics": {"u": "-u", "v": "-v"}})");
    }
}
