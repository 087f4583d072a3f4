#include <lpakit/builtin_models.hpp>
#include <lpakit/lpa.hpp>

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace lpakit;

namespace {

// Greedy multiset distance between two spectra.
double spectrum_gap(std::vector<Complex> a, std::vector<Complex> b) {
    if (a.size() != b.size()) return 1e300;
    double worst = 0.0;
    for (const Complex& x : a) {
        auto it = std::min_element(b.begin(), b.end(), [&](Complex p, Complex q) { return std::abs(p - x) < std::abs(q - x); });
        worst = std::max(worst, std::abs(*it - x) / (1.0 + std::abs(x)));
        b.erase(it);
    }
    return worst;
}

}  // namespace

TEST_CASE("state layout") {
    const LpaSystem s(schnakenberg());
    CHECK(s.dimension() == 3);
    CHECK(s.state_names() == std::vector<std::string>{"u_g", "v_g", "u_l"});
    Vector w(2);
    w << 2.0, 0.25;
    const Vector y = s.embed(w);
    CHECK(y[2] == 2.0);
    CHECK(s.global_part(y) == w);
    CHECK(s.local_part(y)[0] == 2.0);
}

TEST_CASE("jacobian at the steady state splits into the well-mixed and local blocks") {
    std::mt19937_64 rng(11);
    for (const auto& name : builtin_names()) {
        const auto m = builtin(name);
        const LpaSystem s(m);
        // Off the defaults: Schnakenberg at a = b has a defective double eigenvalue.
        auto p = m.default_parameters();
        for (std::size_t i = 0; i < p.size(); ++i) p[i] *= 1.0 + 0.01 * static_cast<double>(i % 5);
        const auto h = solve_hss(m, p, m.default_seed());
        const Matrix j = lpa_jacobian_at_hss(s, h);
        const Matrix j0 = m.jacobian(h.state, p);
        const auto k = static_cast<Eigen::Index>(m.slow_count());
        std::vector<Complex> expect = eig_real(j0);
        for (const Complex& l : eig_real(j0.topLeftCorner(k, k))) expect.push_back(l);
        CHECK_MESSAGE(spectrum_gap(eig_real(j), expect) < 1e-8, name);
        CHECK((j - finite_diff_jacobian([&](const Vector& y) { return s.rhs(y, p); }, s.embed(h.state))).norm() <
              1e-5 * (1.0 + j.norm()));
    }
}

TEST_CASE("schnakenberg local roots are a + b and a + a^2/b") {
    const auto m = schnakenberg();
    const LpaSystem s(m);
    for (double a : {0.4, 1.5, 2.5}) {
        const double b = 1.0;
        const auto p = m.parameters_from({{"a", a}, {"b", b}});
        const auto h = solve_hss(m, p, m.default_seed());
        LocalRootSettings lrs;
        lrs.random_starts = 8;
        const auto roots = find_local_roots(s, h, {Vector::Constant(1, a + a * a / b)}, lrs);
        bool global = false, local = false;
        for (const auto& r : roots) {
            const double ul = r.state[2];
            if (std::abs(ul - (a + b)) < 1e-8) global = r.kind == BranchKind::Global;
            if (std::abs(ul - (a + a * a / b)) < 1e-8) local = r.kind == BranchKind::Local;
        }
        CHECK(global);
        CHECK(local);
    }
}

TEST_CASE("perturbations below the local branch decay and above it grow") {
    const auto m = schnakenberg();
    const LpaSystem s(m);
    const auto p = m.parameters_from({{"a", 1.5}, {"b", 1.0}});
    const auto h = solve_hss(m, p, m.default_seed());
    // Steady state u = 2.5, unstable local state u = 3.75.
    const auto small = simulate_perturbation(s, h, Vector::Constant(1, 0.5), 200.0);
    CHECK(small.outcome == PerturbationOutcome::Decayed);
    const auto large = simulate_perturbation(s, h, Vector::Constant(1, 2.0), 200.0);
    CHECK(large.outcome == PerturbationOutcome::Grew);
}

TEST_CASE("the width correction needs a positive width") {
    CHECK_THROWS_AS(build_lpa(schnakenberg(), true, 0.0), ConfigError);
    const LpaSystem s = build_lpa(schnakenberg(), true, 0.01);
    const auto m = schnakenberg();
    const auto p = m.default_parameters();
    const auto h = solve_hss(m, p, m.default_seed());
    // The correction vanishes on the global branch.
    CHECK(s.rhs(s.embed(h.state), p).norm() < 1e-12);
}
