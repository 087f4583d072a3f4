#include <lpakit/lpa.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace lpakit {

std::string_view to_string(BranchKind k) {
    switch (k) {
        case BranchKind::Global: return "global";
        case BranchKind::Local: return "local";
        case BranchKind::Degenerate: return "degenerate";
    }
    return "?";
}

std::string_view to_string(PerturbationOutcome o) {
    switch (o) {
        case PerturbationOutcome::Decayed: return "decayed";
        case PerturbationOutcome::Grew: return "grew";
        case PerturbationOutcome::Settled: return "settled";
        case PerturbationOutcome::Unresolved: return "unresolved";
    }
    return "?";
}

LpaSystem::LpaSystem(ReactionModel model, bool corrected, double epsilon)
    : model_(std::move(model)), corrected_(corrected), epsilon_(epsilon) {
    if (corrected_ && !(epsilon_ > 0)) throw ConfigError("the corrected LPA system needs epsilon > 0");
}

LpaSystem build_lpa(const ReactionModel& model, bool corrected, double epsilon) {
    return LpaSystem(model, corrected, epsilon);
}

std::vector<std::string> LpaSystem::state_names() const {
    std::vector<std::string> names;
    const auto& vars = model_.variables();
    for (const auto& v : vars) names.push_back(v.name + "_g");
    for (std::size_t i = 0; i < slow_count(); ++i) names.push_back(vars[i].name + "_l");
    return names;
}

Vector LpaSystem::embed(const Vector& well_mixed) const {
    const auto m = static_cast<Eigen::Index>(slow_count());
    Vector y(static_cast<Eigen::Index>(dimension()));
    y.head(well_mixed.size()) = well_mixed;
    y.tail(m) = well_mixed.head(m);
    return y;
}

Vector LpaSystem::global_part(const Vector& y) const {
    return y.head(static_cast<Eigen::Index>(model_.dimension()));
}

Vector LpaSystem::local_part(const Vector& y) const { return y.tail(static_cast<Eigen::Index>(slow_count())); }

Vector LpaSystem::rhs(const Vector& y, const ParameterSet& p) const {
    const auto m = static_cast<Eigen::Index>(slow_count());
    const auto n = static_cast<Eigen::Index>(fast_count());
    Vector wg = y.head(m + n);
    Vector wl = wg;
    wl.head(m) = y.tail(m);
    const Vector kg = model_.kinetics(wg, p);
    const Vector kl = model_.kinetics(wl, p);
    Vector out(2 * m + n);
    out.head(m + n) = kg;
    out.tail(m) = kl.head(m);
    if (corrected_) out.segment(m, n) += std::sqrt(epsilon_) * (kl.tail(n) - kg.tail(n));
    return out;
}

Matrix LpaSystem::jacobian(const Vector& y, const ParameterSet& p) const {
    const auto m = static_cast<Eigen::Index>(slow_count());
    const auto n = static_cast<Eigen::Index>(fast_count());
    Vector wg = y.head(m + n);
    Vector wl = wg;
    wl.head(m) = y.tail(m);
    const Matrix jg = model_.jacobian(wg, p);
    const Matrix jl = model_.jacobian(wl, p);
    Matrix j = Matrix::Zero(2 * m + n, 2 * m + n);
    j.topLeftCorner(m + n, m + n) = jg;
    j.block(m + n, m, m, n) = jl.topRightCorner(m, n);
    j.bottomRightCorner(m, m) = jl.topLeftCorner(m, m);
    if (corrected_) {
        const double s = std::sqrt(epsilon_);
        j.block(m, 0, n, m) -= s * jg.bottomLeftCorner(n, m);
        j.block(m, m, n, n) += s * (jl.bottomRightCorner(n, n) - jg.bottomRightCorner(n, n));
        j.block(m, m + n, n, m) += s * jl.bottomLeftCorner(n, m);
    }
    return j;
}

std::vector<Vector> LpaSystem::conservation_rows() const {
    const auto m = static_cast<Eigen::Index>(slow_count());
    const auto n = static_cast<Eigen::Index>(fast_count());
    const double s = corrected_ ? std::sqrt(epsilon_) : 0.0;
    std::vector<Vector> rows;
    for (const Vector& c : lpakit::conservation_rows(model_)) {
        Vector r = Vector::Zero(2 * m + n);
        r.head(m) = (1.0 - s) * c.head(m);
        r.segment(m, n) = c.tail(n);
        r.tail(m) = s * c.head(m);
        rows.push_back(std::move(r));
    }
    return rows;
}

Vector LpaSystem::steady_residual(const Vector& y, const ParameterSet& p) const {
    Vector r = rhs(y, p);
    const auto rows = conservation_rows();
    const auto& laws = model_.conservation_laws();
    for (std::size_t i = 0; i < laws.size(); ++i) {
        r[static_cast<Eigen::Index>(laws[i].replaces)] = rows[i].dot(y) - p.get(laws[i].total);
    }
    return r;
}

Matrix LpaSystem::steady_jacobian(const Vector& y, const ParameterSet& p) const {
    Matrix j = jacobian(y, p);
    const auto rows = conservation_rows();
    const auto& laws = model_.conservation_laws();
    for (std::size_t i = 0; i < laws.size(); ++i) j.row(static_cast<Eigen::Index>(laws[i].replaces)) = rows[i].transpose();
    return j;
}

std::vector<Complex> LpaSystem::stability_eigenvalues(const Vector& y, const ParameterSet& p) const {
    return restricted_eigenvalues(jacobian(y, p), conservation_rows());
}

Matrix lpa_jacobian_at_hss(const LpaSystem& system, const HomogeneousSteadyState& hss) {
    return system.jacobian(system.embed(hss.state), hss.params);
}

std::vector<LpaBranchPoint> find_local_roots(const LpaSystem& system, const HomogeneousSteadyState& hss,
                                             const std::vector<Vector>& seeds, const LocalRootSettings& settings) {
    const ReactionModel& model = system.base();
    const auto m = static_cast<Eigen::Index>(system.slow_count());
    const Vector us = hss.state.head(m);
    const ParameterSet& p = hss.params;

    auto f = [&](const Vector& ul) {
        Vector w = hss.state;
        w.head(m) = ul;
        return Vector(model.kinetics(w, p).head(m));
    };
    auto jf = [&](const Vector& ul) {
        Vector w = hss.state;
        w.head(m) = ul;
        return Matrix(model.jacobian(w, p).topLeftCorner(m, m));
    };

    std::vector<Vector> starts = seeds;
    starts.push_back(us);
    if (settings.random_starts > 0) {
        std::mt19937_64 rng(settings.seed);
        std::uniform_real_distribution<double> log_scale(-2.0, 2.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int k = 0; k < settings.random_starts; ++k) {
            Vector s(m);
            for (Eigen::Index i = 0; i < m; ++i) {
                const double base = std::abs(us[i]) > 1e-12 ? std::abs(us[i]) : 1.0;
                s[i] = base * std::pow(10.0, log_scale(rng)) * (unit(rng) < 0.9 ? 1.0 : -0.1);
            }
            starts.push_back(std::move(s));
        }
    }

    std::vector<LpaBranchPoint> roots;
    for (const auto& s0 : starts) {
        if (s0.size() != m) throw ConfigError("local root seeds must have one entry per slow variable");
        Vector ul;
        try {
            ul = newton_solve(f, jf, s0, settings.newton).x;
        } catch (const Error&) {
            continue;
        }
        const bool dup = std::any_of(roots.begin(), roots.end(), [&](const LpaBranchPoint& r) {
            return (r.state.tail(m) - ul).lpNorm<Eigen::Infinity>() <= settings.dedupe_tol * (1.0 + ul.lpNorm<Eigen::Infinity>());
        });
        if (dup) continue;
        LpaBranchPoint pt;
        pt.state = system.embed(hss.state);
        pt.state.tail(m) = ul;
        pt.eigenvalues = system.stability_eigenvalues(pt.state, p);
        pt.stable = std::all_of(pt.eigenvalues.begin(), pt.eigenvalues.end(),
                                [](const Complex& l) { return l.real() < 0; });
        if ((ul - us).lpNorm<Eigen::Infinity>() <= settings.kind_tol) {
            const Matrix fu = jf(ul);
            const double scale = 1.0 + fu.lpNorm<Eigen::Infinity>();
            pt.kind = smallest_singular_value(fu) < 1e-6 * scale ? BranchKind::Degenerate : BranchKind::Global;
        } else {
            pt.kind = BranchKind::Local;
        }
        roots.push_back(std::move(pt));
    }
    std::sort(roots.begin(), roots.end(), [m](const LpaBranchPoint& a, const LpaBranchPoint& b) {
        return a.state[a.state.size() - m] < b.state[b.state.size() - m];
    });
    return roots;
}

PerturbationResult simulate_perturbation(const LpaSystem& system, const HomogeneousSteadyState& hss,
                                         const Vector& amplitude, double t_end, const PerturbationSettings& settings) {
    if (!(t_end > 0)) throw ConfigError("t_end must be positive");
    const auto m = static_cast<Eigen::Index>(system.slow_count());
    if (amplitude.size() != m) throw ConfigError("amplitude needs one entry per slow variable");
    const ReactionModel& model = system.base();
    const auto n = static_cast<Eigen::Index>(system.fast_count());
    const ParameterSet& p = hss.params;
    const bool corrected = system.corrected();
    const double root_eps = corrected ? std::sqrt(system.epsilon()) : 0.0;

    // Unchecked right-hand side so that overflow ends the step instead of throwing.
    auto rhs = [&](double, const Vector& y) {
        Vector wg = y.head(m + n), wl = y.head(m + n);
        wl.head(m) = y.tail(m);
        Vector kg(m + n), kl(m + n);
        model.kinetics_into({wg.data(), static_cast<std::size_t>(m + n)}, p.values(),
                            {kg.data(), static_cast<std::size_t>(m + n)});
        model.kinetics_into({wl.data(), static_cast<std::size_t>(m + n)}, p.values(),
                            {kl.data(), static_cast<std::size_t>(m + n)});
        Vector out(2 * m + n);
        out.head(m + n) = kg;
        out.tail(m) = kl.head(m);
        if (corrected) out.segment(m, n) += root_eps * (kl.tail(n) - kg.tail(n));
        return out;
    };

    Vector y0 = system.embed(hss.state);
    y0.tail(m) += amplitude;
    OdeSettings ode = settings.ode;
    ode.record_steps = false;
    const double cutoff = settings.blowup;
    ode.events.push_back({[m, cutoff](double, const Vector& y) { return y.tail(m).lpNorm<Eigen::Infinity>() - cutoff; },
                          +1, true});
    const Trajectory traj = integrate(rhs, y0, 0.0, t_end, ode);

    PerturbationResult out;
    out.final_state = traj.final_state();
    out.final_time = traj.final_time();
    if (traj.termination == Termination::Event) {
        out.outcome = PerturbationOutcome::Grew;
        return out;
    }
    if (traj.termination == Termination::Failure) throw IntegrationError(traj.message, traj.final_time());
    const Vector& y = out.final_state;
    const double gap = (y.tail(m) - y.head(m)).lpNorm<Eigen::Infinity>();
    if (gap < settings.decay_tol) {
        out.outcome = PerturbationOutcome::Decayed;
    } else if (rhs(t_end, y).lpNorm<Eigen::Infinity>() < settings.settle_tol) {
        out.outcome = PerturbationOutcome::Settled;
    } else {
        out.outcome = PerturbationOutcome::Unresolved;
    }
    return out;
}

ContinuationProblem lpa_continuation_problem(const LpaSystem& system, const ParameterSet& params,
                                             const std::string& param) {
    const std::size_t idx = params.index(param);
    ContinuationProblem prob;
    prob.dimension = system.dimension();
    auto with = [params, idx](double alpha) {
        ParameterSet q = params;
        q[idx] = alpha;
        return q;
    };
    prob.residual = [system, with](const Vector& y, double a) { return system.steady_residual(y, with(a)); };
    prob.jacobian = [system, with](const Vector& y, double a) { return system.steady_jacobian(y, with(a)); };
    prob.eigenvalues = [system, with](const Vector& y, double a) { return system.stability_eigenvalues(y, with(a)); };
    return prob;
}

ContinuationProblem hss_continuation_problem(const ReactionModel& model, const ParameterSet& params,
                                             const std::string& param) {
    const std::size_t idx = params.index(param);
    ContinuationProblem prob;
    prob.dimension = model.dimension();
    auto with = [params, idx](double alpha) {
        ParameterSet q = params;
        q[idx] = alpha;
        return q;
    };
    const auto rows = conservation_rows(model);
    prob.residual = [model, with](const Vector& x, double a) { return steady_state_residual(model, x, with(a)); };
    prob.jacobian = [model, with](const Vector& x, double a) { return steady_state_jacobian(model, x, with(a)); };
    prob.eigenvalues = [model, with, rows](const Vector& x, double a) {
        return restricted_eigenvalues(model.jacobian(x, with(a)), rows);
    };
    return prob;
}

TwoParameterProblem lpa_two_parameter_problem(const LpaSystem& system, const ParameterSet& params,
                                              const std::string& p1, const std::string& p2) {
    const std::size_t i1 = params.index(p1), i2 = params.index(p2);
    if (i1 == i2) throw ConfigError("two-parameter continuation needs two distinct parameters");
    auto with = [params, i1, i2](double a, double b) {
        ParameterSet q = params;
        q[i1] = a;
        q[i2] = b;
        return q;
    };
    TwoParameterProblem prob;
    prob.dimension = system.dimension();
    prob.residual = [system, with](const Vector& y, double a, double b) { return system.steady_residual(y, with(a, b)); };
    prob.jacobian = [system, with](const Vector& y, double a, double b) { return system.steady_jacobian(y, with(a, b)); };
    return prob;
}

}  // namespace lpakit
