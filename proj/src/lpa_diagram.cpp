#include <lpakit/lpa_diagram.hpp>

#include <algorithm>
#include <cmath>

namespace lpakit {

std::string_view to_string(RegionKind k) {
    switch (k) {
        case RegionKind::Stable: return "stable";
        case RegionKind::Nonlinear: return "nonlinear";
        case RegionKind::Unstable: return "unstable";
    }
    return "?";
}

std::vector<Bifurcation> LpaDiagram::global_bifurcations(BifurcationKind kind) const {
    std::vector<Bifurcation> out;
    for (const auto& b : global().bifurcations) {
        if (b.kind == kind) out.push_back(b);
    }
    return out;
}

std::vector<Bifurcation> LpaDiagram::local_bifurcations(BifurcationKind kind) const {
    std::vector<Bifurcation> out;
    for (std::size_t i = 1; i < branches.size(); ++i) {
        for (const auto& b : branches[i].branch.bifurcations) {
            if (b.kind == kind) out.push_back(b);
        }
    }
    return out;
}

namespace {

// States on `branch` at parameter `alpha`, by linear interpolation on every
// segment that brackets it.
std::vector<Vector> states_at(const Branch& branch, double alpha) {
    std::vector<Vector> out;
    const auto& pts = branch.points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a0 = pts[i].alpha, a1 = pts[i + 1].alpha;
        if ((a0 - alpha) * (a1 - alpha) > 0 || a0 == a1) continue;
        // Count a shared endpoint once.
        if (alpha == a1 && i + 2 < pts.size()) continue;
        const double th = (alpha - a0) / (a1 - a0);
        out.push_back(pts[i].x + th * (pts[i + 1].x - pts[i].x));
    }
    return out;
}

ContinuationSettings scaled(const ContinuationSettings& base, const LpaDiagramSettings& s, const Vector& magnitude) {
    ContinuationSettings cs = base;
    cs.alpha_min = s.lo;
    cs.alpha_max = s.hi;
    if (s.auto_scale) {
        cs.param_scale = std::max(s.hi - s.lo, 1e-12);
        const double big = magnitude.lpNorm<Eigen::Infinity>();
        cs.state_scales = magnitude.cwiseMax(std::max(1e-2 * big, 1e-6));
    }
    return cs;
}

}  // namespace

LpaDiagram compute_lpa_diagram(const LpaSystem& system, const ParameterSet& params, const std::string& param,
                               const LpaDiagramSettings& settings) {
    if (!(settings.hi > settings.lo)) throw ConfigError("parameter range must have lo < hi");
    const ReactionModel& model = system.base();
    const std::size_t pidx = params.index(param);
    const auto m = static_cast<Eigen::Index>(system.slow_count());
    auto at = [&](double alpha) {
        ParameterSet q = params;
        q[pidx] = alpha;
        return q;
    };

    // Steady states across the range: the first one starts the global
    // branch, all of them set the typical magnitude of each component.
    std::optional<HomogeneousSteadyState> start;
    double alpha_start = settings.lo;
    Vector magnitude = Vector::Zero(static_cast<Eigen::Index>(model.dimension()));
    const Vector seed = settings.hss_seed ? *settings.hss_seed : model.default_seed();
    const double fractions[] = {0.0, 1.0, 0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875};
    for (double fr : fractions) {
        const double a = settings.lo + fr * (settings.hi - settings.lo);
        try {
            auto h = solve_hss(model, at(a), seed);
            if (!h.state.allFinite()) continue;
            magnitude = magnitude.cwiseMax(h.state.cwiseAbs());
            if (!start) {
                start = h;
                alpha_start = a;
            }
        } catch (const Error&) {
        }
    }
    if (!start) throw NotApplicableError("no homogeneous steady state found for " + param + " in the range");

    LpaDiagram diagram;
    diagram.param = param;
    const auto problem = lpa_continuation_problem(system, params, param);
    const Vector y0 = system.embed(start->state);
    const ContinuationSettings cs = scaled(settings.continuation, settings, system.embed(magnitude));

    Branch fwd = continue_branch(problem, y0, alpha_start, +1, cs);
    Branch bwd = continue_branch(problem, y0, alpha_start, -1, cs);
    diagram.branches.push_back({"global", join_branches(bwd, fwd, true)});

    auto covered = [&](const Vector& y, double alpha) {
        const Vector ul = y.tail(m);
        for (std::size_t i = 1; i < diagram.branches.size(); ++i) {
            for (const Vector& s : states_at(diagram.branches[i].branch, alpha)) {
                const double d = (s.tail(m) - ul).lpNorm<Eigen::Infinity>();
                if (d <= 2e-2 * (1.0 + ul.lpNorm<Eigen::Infinity>())) return true;
            }
        }
        return false;
    };

    auto add_local = [&](Branch b) {
        diagram.branches.push_back({"local" + std::to_string(diagram.branches.size()), std::move(b)});
    };

    // Local branches through branch points of the global branch.
    for (const auto& bp : diagram.global().bifurcations) {
        if (bp.kind != BifurcationKind::BranchPoint) continue;
        if (covered(bp.x, bp.alpha)) continue;
        Branch sides[2];
        bool have[2] = {false, false};
        for (int k = 0; k < 2; ++k) {
            const int side = k == 0 ? +1 : -1;
            try {
                auto sw = branch_switch(problem, bp, side, cs, settings.switch_offset);
                sides[k] = continue_branch(problem, sw.x, sw.alpha, sw.tangent, cs);
                have[k] = true;
                if (sides[k].termination == BranchEnd::ClosedLoop) break;
            } catch (const Error&) {
            }
        }
        if (have[0] && have[1]) {
            add_local(join_branches(sides[1], sides[0], false));
        } else if (have[0] || have[1]) {
            add_local(std::move(have[0] ? sides[0] : sides[1]));
        }
    }

    // Local branches that do not touch the global branch in the range.
    if (settings.isolated_samples > 0) {
        LocalRootSettings lrs;
        lrs.random_starts = settings.random_starts;
        lrs.seed = settings.seed;
        for (int k = 0; k < settings.isolated_samples; ++k) {
            const double alpha = settings.lo + (k + 0.5) * (settings.hi - settings.lo) / settings.isolated_samples;
            const auto globals = states_at(diagram.global(), alpha);
            if (globals.empty()) continue;
            HomogeneousSteadyState hss;
            try {
                hss = solve_hss(model, at(alpha), system.global_part(globals.front()));
            } catch (const Error&) {
                continue;
            }
            for (const auto& root : find_local_roots(system, hss, {}, lrs)) {
                if (root.kind != BranchKind::Local || covered(root.state, alpha)) continue;
                const Vector excess = root.state.tail(m).cwiseAbs() - settings.isolated_bound * magnitude.head(m);
                if (settings.isolated_bound > 0 && excess.maxCoeff() > 0) continue;
                try {
                    Branch f = continue_branch(problem, root.state, alpha, +1, cs);
                    Branch b;
                    if (f.termination != BranchEnd::ClosedLoop) b = continue_branch(problem, root.state, alpha, -1, cs);
                    add_local(b.points.empty() ? std::move(f) : join_branches(b, f, true));
                } catch (const Error&) {
                }
            }
        }
    }

    // Partition the range at every bifurcation.
    std::vector<double> cuts{settings.lo, settings.hi};
    for (const auto& lb : diagram.branches) {
        for (const auto& b : lb.branch.bifurcations) {
            if (b.kind == BifurcationKind::Hopf && &lb != &diagram.branches.front()) continue;
            if (b.alpha > settings.lo && b.alpha < settings.hi) cuts.push_back(b.alpha);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](double a, double b) { return std::abs(a - b) <= 1e-9 * (1.0 + std::abs(a)); }),
               cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        Region r;
        r.lo = cuts[i];
        r.hi = cuts[i + 1];
        const auto globals = states_at(diagram.global(), mid);
        if (globals.empty()) continue;
        bool stable = true;
        for (const Vector& g : globals) {
            Vector y = g;
            try {
                y = newton_solve([&](const Vector& v) { return problem.residual(v, mid); },
                                 [&](const Vector& v) { return problem.jacobian(v, mid); }, g)
                        .x;
            } catch (const Error&) {
            }
            for (const auto& l : problem.eigenvalues(y, mid)) stable = stable && l.real() < 0;
        }
        r.global_stable = stable;
        for (std::size_t b = 1; b < diagram.branches.size(); ++b) {
            r.local_states += static_cast<int>(states_at(diagram.branches[b].branch, mid).size());
        }
        r.kind = !stable ? RegionKind::Unstable : (r.local_states > 0 ? RegionKind::Nonlinear : RegionKind::Stable);
        if (!diagram.regions.empty() && diagram.regions.back().kind == r.kind) {
            diagram.regions.back().hi = r.hi;
            diagram.regions.back().local_states = std::max(diagram.regions.back().local_states, r.local_states);
        } else {
            diagram.regions.push_back(r);
        }
    }
    return diagram;
}

}  // namespace lpakit
