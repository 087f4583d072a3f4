#include <lpakit/lsa.hpp>
#include <lpakit/parallel.hpp>
#include <lpakit/pde.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lpakit {

Grid1D::Grid1D(int n_cells) : n_(n_cells), h_(2.0 / n_cells) {
    if (n_cells < 16) throw ConfigError("grid needs at least 16 cells, got " + std::to_string(n_cells));
}

Vector Grid1D::centers() const {
    Vector x(n_);
    for (int i = 0; i < n_; ++i) x[i] = this->x(i);
    return x;
}

std::string Grid1D::resolution_warning(double eps) const {
    if (eps > 0 && n_ < 10.0 * (2.0 / eps)) {
        std::ostringstream os;
        os << "grid of " << n_ << " cells resolves a layer of width " << eps << " with fewer than 10 cells (want "
           << static_cast<long>(std::ceil(20.0 / eps)) << ")";
        return os.str();
    }
    return {};
}

Vector uniform_field(const Grid1D& grid, const Vector& state) {
    const int n = grid.size();
    Vector y(state.size() * n);
    for (Eigen::Index v = 0; v < state.size(); ++v) y.segment(v * n, n).setConstant(state[v]);
    return y;
}

Vector variable_profile(const Grid1D& grid, const Vector& field, std::size_t var) {
    return field.segment(static_cast<Eigen::Index>(var) * grid.size(), grid.size());
}

Vector apply_perturbation(const ReactionModel& model, const Vector& hss_state, const Grid1D& grid,
                          const PerturbationSpec& spec) {
    if (!(spec.window > 0 && spec.window < 1)) throw ConfigError("perturbation window must lie in (0, 1)");
    if (static_cast<std::size_t>(spec.amplitudes.size()) != model.slow_count()) {
        throw ConfigError("need one perturbation amplitude per slow variable");
    }
    Vector y = uniform_field(grid, hss_state);
    const double half = spec.window;  // window fraction of a domain of length 2
    const int n = grid.size();
    for (int i = 0; i < n; ++i) {
        if (std::abs(grid.x(i) - spec.center) >= half) continue;
        for (std::size_t v = 0; v < model.slow_count(); ++v) y[v * n + i] += spec.amplitudes[v];
    }
    return y;
}

Vector add_noise(const ReactionModel& model, const Grid1D& grid, Vector field, double amp, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-amp, amp);
    const auto n = static_cast<std::size_t>(grid.size());
    for (std::size_t k = 0; k < model.slow_count() * n; ++k) field[k] += u(rng);
    return field;
}

std::string_view to_string(PdeEnd e) {
    switch (e) {
        case PdeEnd::ReachedEnd: return "reached_end";
        case PdeEnd::Steady: return "steady";
        case PdeEnd::Stopped: return "stopped";
    }
    return "?";
}

std::string_view to_string(PatternClass c) {
    switch (c) {
        case PatternClass::Homogeneous: return "homogeneous";
        case PatternClass::Spike: return "spike";
        case PatternClass::Interface: return "interface";
        case PatternClass::Other: return "other";
    }
    return "?";
}

std::string_view to_string(ResponseStatus s) {
    switch (s) {
        case ResponseStatus::Thresholded: return "threshold";
        case ResponseStatus::NoPattern: return "no_pattern";
        case ResponseStatus::Unstable: return "unstable";
        case ResponseStatus::NoSteadyState: return "no_steady_state";
    }
    return "?";
}

namespace {

class Discretization {
public:
    Discretization(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid)
        : model_(model),
          params_(params),
          n_(grid.size()),
          dim_(model.dimension()),
          inv_h2_(1.0 / (grid.spacing() * grid.spacing())),
          diff_(model.diffusivities(params)),
          cell_(dim_),
          out_(dim_) {}

    void kinetics(const Vector& y, Vector& r) {
        r.resize(y.size());
        for (int i = 0; i < n_; ++i) {
            for (std::size_t v = 0; v < dim_; ++v) cell_[v] = y[v * n_ + i];
            model_.kinetics_into(cell_, params_.values(), out_);
            for (std::size_t v = 0; v < dim_; ++v) r[v * n_ + i] = out_[v];
        }
    }

    void add_diffusion(const Vector& y, Vector& r) const {
        for (std::size_t v = 0; v < dim_; ++v) {
            const double c = diff_[v] * inv_h2_;
            if (c == 0.0) continue;
            const double* u = y.data() + v * n_;
            double* o = r.data() + v * n_;
            for (int i = 0; i < n_; ++i) {
                const double left = u[i > 0 ? i - 1 : 0];
                const double right = u[i + 1 < n_ ? i + 1 : n_ - 1];
                o[i] += c * (left - 2 * u[i] + right);
            }
        }
    }

    /// Solves (I - tau * Laplacian * D) x = rhs in place, species by species.
    void implicit_diffusion(double tau, Vector& x) {
        upper_.resize(n_);
        for (std::size_t v = 0; v < dim_; ++v) {
            const double c = tau * diff_[v] * inv_h2_;
            if (c == 0.0) continue;
            double* d = x.data() + v * n_;
            // Thomas algorithm; rows 0 and n-1 have one neighbour.
            double b0 = 1 + c;
            upper_[0] = -c / b0;
            d[0] /= b0;
            for (int i = 1; i < n_; ++i) {
                const double b = (i == n_ - 1 ? 1 + c : 1 + 2 * c) + c * upper_[i - 1];
                upper_[i] = -c / b;
                d[i] = (d[i] + c * d[i - 1]) / b;
            }
            for (int i = n_ - 2; i >= 0; --i) d[i] -= upper_[i] * d[i + 1];
        }
    }

    Vector rhs(const Vector& y) {
        Vector r;
        kinetics(y, r);
        add_diffusion(y, r);
        return r;
    }

    Matrix jacobian(const Vector& y) const {
        const auto big = static_cast<Eigen::Index>(dim_ * n_);
        Matrix j = Matrix::Zero(big, big);
        Vector cell(dim_);
        for (int i = 0; i < n_; ++i) {
            for (std::size_t v = 0; v < dim_; ++v) cell[v] = y[v * n_ + i];
            const Matrix jc = model_.jacobian(cell, params_);
            for (std::size_t v = 0; v < dim_; ++v) {
                for (std::size_t w = 0; w < dim_; ++w) j(v * n_ + i, w * n_ + i) = jc(v, w);
            }
        }
        for (std::size_t v = 0; v < dim_; ++v) {
            const double c = diff_[v] * inv_h2_;
            for (int i = 0; i < n_; ++i) {
                const auto row = static_cast<Eigen::Index>(v * n_ + i);
                const auto left = static_cast<Eigen::Index>(v * n_ + (i > 0 ? i - 1 : 0));
                const auto right = static_cast<Eigen::Index>(v * n_ + (i + 1 < n_ ? i + 1 : n_ - 1));
                j(row, row) -= 2 * c;
                j(row, left) += c;
                j(row, right) += c;
            }
        }
        return j;
    }

    int cells() const { return n_; }

private:
    const ReactionModel& model_;
    const ParameterSet& params_;
    int n_;
    std::size_t dim_;
    double inv_h2_;
    Vector diff_;
    std::vector<double> cell_, out_;
    std::vector<double> upper_;
};

[[noreturn]] void report_nonfinite(const ReactionModel& model, const Vector& y, int n, double t) {
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        if (!std::isfinite(y[k])) {
            std::ostringstream os;
            os << "non-finite " << model.variables()[k / n].name << " in cell " << k % n << " at t=" << t;
            throw IntegrationError(os.str(), t);
        }
    }
    throw IntegrationError("non-finite state", t);
}

}  // namespace

Vector pde_rhs(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid, const Vector& y) {
    Discretization disc(model, params, grid);
    return disc.rhs(y);
}

Matrix pde_jacobian(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid, const Vector& y) {
    return Discretization(model, params, grid).jacobian(y);
}

PdeRun simulate(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid, const Vector& y0,
                double t_end, const PdeSettings& s) {
    const int n = grid.size();
    if (y0.size() != static_cast<Eigen::Index>(model.dimension()) * n) {
        throw ConfigError("initial field has the wrong size");
    }
    if (!y0.allFinite()) throw ConfigError("initial field is not finite");
    Discretization disc(model, params, grid);

    // ARS(2,2,2): L-stable implicit part, stiffly accurate.
    const double gamma = 1.0 - 1.0 / std::sqrt(2.0);
    const double delta = 1.0 - 1.0 / (2.0 * gamma);

    PdeRun run;
    run.state = y0;
    run.min_value = y0.minCoeff();
    double t = 0.0;
    double dt = std::min(s.initial_step, std::max(t_end, 1e-300));
    double next_sample = 0.0;
    if (s.sample_interval > 0) {
        run.samples.emplace_back(0.0, y0);
        next_sample = s.sample_interval;
    }
    Vector k1, k2, y2, y3, euler, rhs;
    int steady_hits = 0;
    Vector& y = run.state;

    while (t < t_end) {
        if (run.accepted + run.rejected >= s.max_steps) {
            throw IntegrationError("step limit reached at t=" + std::to_string(t), t);
        }
        if (t + dt > t_end) dt = t_end - t;
        disc.kinetics(y, k1);

        y2 = y + dt * gamma * k1;
        disc.implicit_diffusion(dt * gamma, y2);
        const Vector l2 = (y2 - y - dt * gamma * k1) / (dt * gamma);  // diffusion at stage 2
        disc.kinetics(y2, k2);

        y3 = y + dt * (delta * k1 + (1 - delta) * k2 + (1 - gamma) * l2);
        disc.implicit_diffusion(dt * gamma, y3);

        euler = y + dt * k1;
        disc.implicit_diffusion(dt, euler);

        if (!y3.allFinite()) {
            if (dt <= s.min_step) report_nonfinite(model, y3, n, t + dt);
            dt *= 0.25;
            ++run.rejected;
            continue;
        }
        const auto scale = (s.abs_tol + s.rel_tol * y.cwiseAbs().cwiseMax(y3.cwiseAbs()).array()).matrix();
        const double err = std::sqrt(((y3 - euler).cwiseQuotient(scale)).squaredNorm() / y.size());
        if (err > 1.0) {
            ++run.rejected;
            dt *= std::max(0.2, 0.9 / std::sqrt(err));
            if (dt < s.min_step) throw IntegrationError("step size collapsed at t=" + std::to_string(t), t);
            continue;
        }
        t += dt;
        y.swap(y3);
        ++run.accepted;
        run.min_value = std::min(run.min_value, y.minCoeff());
        run.t = t;
        if (s.sample_interval > 0 && t >= next_sample - 1e-12) {
            run.samples.emplace_back(t, y);
            while (next_sample <= t + 1e-12) next_sample += s.sample_interval;
        }
        if (s.stop && s.stop(t, y)) {
            run.termination = PdeEnd::Stopped;
            return run;
        }
        if (s.stop_when_steady) {
            rhs = disc.rhs(y);
            steady_hits = rhs.lpNorm<Eigen::Infinity>() < s.steady_tol ? steady_hits + 1 : 0;
            if (steady_hits >= s.steady_count) {
                run.termination = PdeEnd::Steady;
                return run;
            }
        }
        const double grow = err > 0 ? 0.9 / std::sqrt(err) : 5.0;
        dt = std::min(dt * std::clamp(grow, 0.2, 5.0), s.max_step);
    }
    run.termination = PdeEnd::ReachedEnd;
    return run;
}

PatternMetrics pattern_metrics(const ReactionModel& model, const Grid1D& grid, const Vector& field) {
    PatternMetrics m;
    const int n = grid.size();
    const double scale = 1.0 + field.lpNorm<Eigen::Infinity>();
    bool flat = true;
    std::size_t pick = 0;
    double best = -1.0;
    for (std::size_t v = 0; v < model.dimension(); ++v) {
        const Vector p = variable_profile(grid, field, v);
        const double amp = p.maxCoeff() - p.minCoeff();
        m.amplitude.push_back(amp);
        flat = flat && amp < 1e-5 * scale;
        const double rel = amp / (1.0 + p.cwiseAbs().maxCoeff());
        if (v < model.slow_count() && rel > best) {
            best = rel;
            pick = v;
        }
    }
    if (flat) {
        m.classification = PatternClass::Homogeneous;
        return m;
    }
    const Vector p = variable_profile(grid, field, pick);
    const double lo = p.minCoeff(), hi = p.maxCoeff(), amp = hi - lo;
    const double half = lo + 0.5 * amp;

    int runs = 0, above = 0;
    for (int i = 0; i < n; ++i) {
        if (p[i] > half) {
            ++above;
            if (i == 0 || p[i - 1] <= half) ++runs;
        }
    }
    const double width = above * grid.spacing();
    if (runs == 1 && width < 0.5) {
        Eigen::Index at;
        p.maxCoeff(&at);
        m.spike = SpikeShape{hi, grid.x(static_cast<int>(at)), width};
        m.classification = PatternClass::Spike;
        return m;
    }

    // Interface: monotone, with flat ends.
    const Vector d = p.tail(n - 1) - p.head(n - 1);
    const double max_slope = d.cwiseAbs().maxCoeff();
    const double tiny = 1e-9 * amp;
    bool up = true, down = true;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        up = up && d[i] >= -tiny;
        down = down && d[i] <= tiny;
    }
    const bool flat_ends = std::abs(d[0]) < 1e-2 * max_slope && std::abs(d[d.size() - 1]) < 1e-2 * max_slope;
    m.classification = (up || down) && flat_ends ? PatternClass::Interface : PatternClass::Other;
    return m;
}

double SpikeAsymptotic::u(double x) const {
    const double s = 1.0 / std::cosh(x / (2 * eps));
    return a + b / (2 * eps) * s * s;
}

SpikeAsymptotic spike_asymptotic(double a, double b, double eps) {
    if (!(eps > 0) || !(b > 0)) throw ConfigError("spike asymptotics need eps > 0 and b > 0");
    return SpikeAsymptotic{a, b, eps, a + b / (2 * eps), 3 * eps / b};
}

SpikeComparison compare_spike(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid,
                              const Vector& field, const SpikeAsymptotic& asym) {
    const auto metrics = pattern_metrics(model, grid, field);
    if (metrics.classification != PatternClass::Spike) {
        throw NotApplicableError(std::string("field is classified as ") +
                                 std::string(to_string(metrics.classification)) + ", not a spike");
    }
    SpikeComparison c;
    const Vector u = variable_profile(grid, field, 0);
    const Vector v = variable_profile(grid, field, model.slow_count());
    c.simulated_peak = u.maxCoeff();
    c.simulated_v = v.mean();
    c.v_variation = (v.maxCoeff() - v.minCoeff()) / std::abs(c.simulated_v);
    c.peak_error = std::abs(c.simulated_peak - asym.peak) / std::abs(asym.peak);
    c.v_error = std::abs(c.simulated_v - asym.v_level) / std::abs(asym.v_level);
    if (params.contains("D") && params.get("D") * asym.eps < 10.0) {
        c.note = "D*eps = " + std::to_string(params.get("D") * asym.eps) +
                 "; the asymptotics assume D much larger than 1/eps";
    }
    return c;
}

namespace {

double field_amplitude(const ReactionModel& model, const Grid1D& grid, const Vector& y) {
    double amp = 0.0;
    for (std::size_t v = 0; v < model.dimension(); ++v) {
        const Vector p = variable_profile(grid, y, v);
        amp = std::max(amp, p.maxCoeff() - p.minCoeff());
    }
    return amp;
}

ResponseRow response_at(const ReactionModel& model, ParameterSet params, std::size_t index, double value,
                        const Grid1D& grid, const ThresholdSettings& s) {
    ResponseRow row;
    row.param = value;
    params[index] = value;
    HomogeneousSteadyState hss;
    try {
        hss = solve_hss(model, params, model.default_seed());
    } catch (const Error&) {
        row.status = ResponseStatus::NoSteadyState;
        return row;
    }
    const double grew_level = 0.1 * (1.0 + hss.state.lpNorm<Eigen::Infinity>());
    const Vector base = uniform_field(grid, hss.state);

    PdeSettings pde = s.pde;
    pde.stop = [&](double, const Vector& y) { return (y - base).lpNorm<Eigen::Infinity>() < 1e-6; };
    auto grows = [&](const Vector& y0) {
        const auto run = simulate(model, params, grid, y0, s.t_end, pde);
        return field_amplitude(model, grid, run.state) > grew_level;
    };

    const bool unstable = dispersion(model, hss, ModeSet::cosine(grid.size())).max_growth > 0;
    if (unstable) {
        row.status = ResponseStatus::Unstable;
        pde.stop = nullptr;
        row.noise_patterned = grows(add_noise(model, grid, base, s.noise, s.seed));
        return row;
    }

    PerturbationSpec spec;
    spec.window = s.window;
    spec.amplitudes = Vector::Zero(static_cast<Eigen::Index>(model.slow_count()));
    auto perturbed = [&](double amp) {
        spec.amplitudes[0] = amp;
        return apply_perturbation(model, hss.state, grid, spec);
    };
    double last_decay = 0.0;
    for (double amp : s.amplitudes) {
        const bool g = grows(perturbed(amp));
        row.responses.emplace_back(amp, g);
        if (g) {
            row.threshold = amp;
            break;
        }
        last_decay = amp;
    }
    if (!row.threshold) {
        row.status = ResponseStatus::NoPattern;
        return row;
    }
    row.status = ResponseStatus::Thresholded;
    double lo = last_decay, hi = *row.threshold;
    for (int i = 0; i < s.refine; ++i) {
        const double mid = 0.5 * (lo + hi);
        const bool g = grows(perturbed(mid));
        row.responses.emplace_back(mid, g);
        (g ? hi : lo) = mid;
    }
    row.threshold = hi;
    std::sort(row.responses.begin(), row.responses.end());
    return row;
}

}  // namespace

ThresholdTable threshold_scan(const ReactionModel& model, const ParameterSet& params, const std::string& param,
                              const std::vector<double>& values, const Grid1D& grid, const ThresholdSettings& s) {
    const std::size_t index = params.index(param);
    ThresholdTable table;
    table.rows = parallel_map(
        values, [&](double value) { return response_at(model, params, index, value, grid, s); }, s.jobs);
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& r : table.rows) {
        if (r.status != ResponseStatus::Thresholded) continue;
        if (*r.threshold < prev) table.monotone = false;
        prev = *r.threshold;
    }
    return table;
}

ContinuationProblem pde_continuation_problem(const ReactionModel& model, const ParameterSet& params,
                                             const std::string& param, const Grid1D& grid) {
    const std::size_t index = params.index(param);
    auto with = [params, index](double a) {
        ParameterSet q = params;
        q[index] = a;
        return q;
    };
    ContinuationProblem prob;
    prob.dimension = model.dimension() * static_cast<std::size_t>(grid.size());
    prob.residual = [model, grid, with](const Vector& y, double a) { return pde_rhs(model, with(a), grid, y); };
    prob.jacobian = [model, grid, with](const Vector& y, double a) { return pde_jacobian(model, with(a), grid, y); };
    return prob;
}

PatternedBranch patterned_branch(const ReactionModel& model, const ParameterSet& params, const std::string& param,
                                 double lo, double hi, const Grid1D& grid, const PatternedBranchSettings& settings) {
    if (!(hi > lo)) throw ConfigError("parameter range must have lo < hi");
    ParameterSet p = params;
    p.set(param, settings.start);
    const auto hss = solve_hss(model, p, model.default_seed());
    PerturbationSpec spec = settings.perturbation;
    if (spec.amplitudes.size() == 0) spec.amplitudes = Vector::Constant(static_cast<Eigen::Index>(model.slow_count()), 2.0);
    const auto run = simulate(model, p, grid, apply_perturbation(model, hss.state, grid, spec), settings.t_end, settings.pde);
    const auto metrics = pattern_metrics(model, grid, run.state);
    if (metrics.classification == PatternClass::Homogeneous) {
        throw NotApplicableError("the perturbation decayed at " + param + " = " + std::to_string(settings.start));
    }

    PatternedBranch out;
    const auto n = grid.size();
    for (std::size_t v = 1; v < model.slow_count(); ++v) {
        if (metrics.amplitude[v] > metrics.amplitude[out.variable]) out.variable = v;
    }
    const auto problem = pde_continuation_problem(model, params, param, grid);
    ContinuationSettings cs = settings.continuation;
    cs.alpha_min = lo;
    cs.alpha_max = hi;
    if (cs.state_scales.size() == 0 && cs.state_scale == 1.0) cs.state_scale = std::max(run.state.lpNorm<Eigen::Infinity>(), 1.0);
    const Branch fwd = continue_branch(problem, run.state, settings.start, +1, cs);
    const Branch bwd = continue_branch(problem, run.state, settings.start, -1, cs);
    out.branch = join_branches(bwd, fwd, true);

    const double floor = 1e-3 * (1.0 + hss.state.lpNorm<Eigen::Infinity>());
    for (const auto& pt : out.branch.points) {
        const Vector u = pt.x.segment(static_cast<Eigen::Index>(out.variable) * n, n);
        const double amp = u.maxCoeff() - u.minCoeff();
        out.amplitude.push_back(amp);
        if (pt.stable && amp > floor && (!out.stable_reach || pt.alpha > *out.stable_reach)) out.stable_reach = pt.alpha;
    }
    return out;
}

}  // namespace lpakit
