#include <lpakit/lsa.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lpakit {

Matrix jacobian_k(const Matrix& j0, const Vector& diffusivities, double k) {
    Matrix jk = j0;
    jk.diagonal() -= k * k * diffusivities;
    return jk;
}

Matrix jacobian_k(const ReactionModel& model, const HomogeneousSteadyState& hss, double k) {
    return jacobian_k(model.jacobian(hss.state, hss.params), model.diffusivities(hss.params), k);
}

ParameterSet with_eps_d(const ParameterSet& p, std::optional<double> eps, std::optional<double> d) {
    ParameterSet q = p;
    if (eps && q.contains("eps")) q.set("eps", *eps);
    if (d && q.contains("D")) q.set("D", *d);
    return q;
}

ModeSet ModeSet::cosine(int n_max) {
    ModeSet m;
    for (int n = 0; n <= n_max; ++n) m.ks.push_back(n * std::numbers::pi / 2);
    return m;
}

ModeSet ModeSet::single(double k) { return ModeSet{{k}}; }

ModeSet ModeSet::continuous(double k_max, int samples) {
    ModeSet m;
    samples = std::max(samples, 2);
    for (int i = 0; i < samples; ++i) m.ks.push_back(k_max * i / (samples - 1));
    return m;
}

DispersionResult dispersion(const ReactionModel& model, const HomogeneousSteadyState& hss, const ModeSet& modes) {
    if (modes.ks.empty()) throw ConfigError("mode set is empty");
    const Matrix j0 = model.jacobian(hss.state, hss.params);
    const Vector diff = model.diffusivities(hss.params);
    DispersionResult out;
    out.max_growth = -std::numeric_limits<double>::infinity();
    for (double k : modes.ks) {
        DispersionMode m{k, eig_real(jacobian_k(j0, diff, k))};
        const double g = m.eigenvalues.front().real();
        if (g > out.max_growth) {
            out.max_growth = g;
            out.argmax_k = k;
        }
        out.modes.push_back(std::move(m));
    }
    return out;
}

namespace {

struct GrowthEval {
    const ReactionModel& model;
    ParameterSet params;
    std::size_t index;
    const ModeSet& modes;
    Vector guess;

    double operator()(double alpha) {
        params[index] = alpha;
        auto hss = solve_hss(model, params, guess);
        guess = hss.state;
        return dispersion(model, hss, modes).max_growth;
    }
};

}  // namespace

TuringEdges turing_edge(const ReactionModel& model, const ParameterSet& params, const std::string& param, double lo,
                        double hi, const ModeSet& modes, const TuringEdgeSettings& settings) {
    if (!(hi > lo)) throw ConfigError("parameter range must have lo < hi");
    GrowthEval growth{model, params, params.index(param), modes,
                      settings.seed ? *settings.seed : model.default_seed()};
    const int n = std::max(settings.samples, 2);
    std::vector<double> alphas, values;
    std::vector<Vector> states;
    for (int i = 0; i <= n; ++i) {
        const double a = lo + (hi - lo) * i / n;
        double g;
        try {
            g = growth(a);
        } catch (const Error&) {
            continue;  // no steady state here; the scan skips the point
        }
        if (!std::isfinite(g)) continue;
        alphas.push_back(a);
        values.push_back(g);
        states.push_back(growth.guess);
    }
    TuringEdges edges;
    for (std::size_t i = 0; i + 1 < alphas.size(); ++i) {
        if ((values[i] > 0) == (values[i + 1] > 0)) continue;
        double a = alphas[i], b = alphas[i + 1];
        const bool left_positive = values[i] > 0;
        growth.guess = states[i];
        while (b - a > settings.tol) {
            const double mid = 0.5 * (a + b);
            ((growth(mid) > 0) == left_positive ? a : b) = mid;
        }
        edges.all.push_back(0.5 * (a + b));
    }
    if (edges.all.empty()) {
        const bool unstable = !values.empty() && values.front() > 0;
        throw NotApplicableError("no Turing edge for " + param + " in [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]: the range is entirely " +
                                 (values.empty() ? std::string("without a steady state")
                                                 : unstable ? std::string("unstable") : std::string("stable")));
    }
    edges.right = edges.all.back();
    return edges;
}

GershgorinReport gershgorin_disks(const Matrix& a, std::size_t slow_count) {
    if (a.rows() != a.cols()) throw ConfigError("Gershgorin disks need a square matrix");
    GershgorinReport r;
    const auto n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        r.disks.push_back({Complex(a(i, i), 0.0), a.row(i).cwiseAbs().sum() - std::abs(a(i, i))});
    }
    const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(slow_count, n));
    r.separated = true;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = m; j < n; ++j) {
            if (std::abs(r.disks[i].center - r.disks[j].center) <= r.disks[i].radius + r.disks[j].radius) {
                r.separated = false;
            }
        }
    }
    r.contained = true;
    for (const Complex& l : eig_real(a)) {
        bool in = false;
        for (const Disk& d : r.disks) {
            in = in || std::abs(l - d.center) <= d.radius * (1 + 1e-10) + 1e-10;
        }
        r.contained = r.contained && in;
    }
    return r;
}

namespace {

bool in_class(const Complex& l, const std::vector<Disk>& disks, std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) {
        if (std::abs(l - disks[i].center) <= disks[i].radius * (1 + 1e-10) + 1e-10) return true;
    }
    return false;
}

}  // namespace

TheoremOneReport theorem1_check(const ReactionModel& model, const HomogeneousSteadyState& hss, double k,
                                const std::vector<double>& eps_list, const std::vector<double>& d_list) {
    if (!(k > 0)) throw ConfigError("theorem check needs k > 0");
    TheoremOneReport report;
    report.k = k;
    const std::size_t m = model.slow_count();
    const std::size_t dim = model.dimension();
    for (double eps : eps_list) {
        for (double d : d_list) {
            TheoremOneRow row;
            row.eps = eps;
            row.d = d;
            const ParameterSet p = with_eps_d(hss.params, eps, d);
            const auto state = solve_hss(model, p, hss.state);
            const Matrix j0 = model.jacobian(state.state, p);
            const Vector diff = model.diffusivities(p);
            const Matrix jk = jacobian_k(j0, diff, k);
            const auto g = gershgorin_disks(jk, m);
            row.separated = g.separated;
            if (!g.separated) {
                row.note = "slow and fast Gershgorin disks overlap; comparison skipped";
                report.rows.push_back(std::move(row));
                continue;
            }
            for (const Complex& l : eig_real(jk)) {
                (in_class(l, g.disks, 0, m) ? row.slow : row.fast).push_back(l);
            }
            // Local block of the LPA Jacobian, shifted by the mode.
            const Matrix local = jacobian_k(j0.topLeftCorner(m, m), diff.head(m), k);
            std::vector<Complex> predicted = eig_real(local);
            for (const Complex& l : row.slow) {
                double best = std::numeric_limits<double>::infinity();
                std::size_t at = 0;
                for (std::size_t i = 0; i < predicted.size(); ++i) {
                    if (std::abs(l - predicted[i]) < best) {
                        best = std::abs(l - predicted[i]);
                        at = i;
                    }
                }
                row.deviation.push_back(best);
                if (!predicted.empty()) predicted.erase(predicted.begin() + static_cast<std::ptrdiff_t>(at));
            }
            // Most negative eigenvalue pairs with the largest diffusivity.
            std::vector<double> fast_d(diff.data() + m, diff.data() + dim);
            std::sort(fast_d.begin(), fast_d.end(), std::greater<>());
            std::vector<Complex> fast = row.fast;
            std::sort(fast.begin(), fast.end(), [](const Complex& a, const Complex& b) { return a.real() < b.real(); });
            for (std::size_t j = 0; j < std::min(fast.size(), fast_d.size()); ++j) {
                row.fast_ratio.push_back(fast[j].real() / (-k * k * fast_d[j]));
            }
            if (row.slow.size() != m) row.note = "slow class holds " + std::to_string(row.slow.size()) + " eigenvalues";
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

}  // namespace lpakit
