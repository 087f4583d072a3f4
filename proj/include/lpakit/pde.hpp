#pragma once

// Method-of-lines reaction-diffusion solver on [-1, 1] with no-flux
// boundaries, plus the experiments built on it: localized perturbations,
// threshold scans, the spike asymptotics and a discretized steady-state
// residual for continuation.
//
// Fields are stored variable-major: value of variable v in cell i is
// y[v * n_cells + i].

#include <lpakit/continuation.hpp>
#include <lpakit/model.hpp>
#include <lpakit/numerics.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lpakit {

class Grid1D {
public:
    explicit Grid1D(int n_cells = 400);  // throws ConfigError below 16 cells

    int size() const { return n_; }
    double spacing() const { return h_; }
    double x(int i) const { return -1.0 + (i + 0.5) * h_; }
    Vector centers() const;

    /// Non-empty when fewer than 10 cells cover a layer of width eps.
    std::string resolution_warning(double eps) const;

private:
    int n_;
    double h_;
};

/// Field with every cell at `state`.
Vector uniform_field(const Grid1D& grid, const Vector& state);
/// Values of variable `var` across the grid.
Vector variable_profile(const Grid1D& grid, const Vector& field, std::size_t var);

struct PerturbationSpec {
    double window = 0.10;  // fraction of the domain
    double center = 0.0;   // window centre in [-1, 1]
    Vector amplitudes;     // one per slow variable
};

/// HSS everywhere, slow variables offset inside the window (top hat).
Vector apply_perturbation(const ReactionModel& model, const Vector& hss_state, const Grid1D& grid,
                          const PerturbationSpec& spec);

/// Adds uniform noise in [-amp, amp] to the slow variables.
Vector add_noise(const ReactionModel& model, const Grid1D& grid, Vector field, double amp, std::uint64_t seed);

struct PdeSettings {
    double rel_tol = 1e-5;
    double abs_tol = 1e-8;
    double initial_step = 1e-3;
    double max_step = 10.0;
    double min_step = 1e-12;
    long max_steps = 5'000'000;
    bool stop_when_steady = true;
    double steady_tol = 1e-8;   // ||dy/dt||_inf
    int steady_count = 3;       // consecutive accepted steps below steady_tol
    double sample_interval = 0.0;  // record the field every this many time units; 0 records nothing
    /// Checked after each accepted step; returning true ends the run.
    std::function<bool(double t, const Vector& y)> stop;
};

enum class PdeEnd { ReachedEnd, Steady, Stopped };
std::string_view to_string(PdeEnd e);

struct PdeRun {
    Vector state;
    double t = 0.0;
    PdeEnd termination = PdeEnd::ReachedEnd;
    std::vector<std::pair<double, Vector>> samples;
    long accepted = 0;
    long rejected = 0;
    double min_value = 0.0;  // most negative value seen; negative concentrations are flagged, not fatal
};

/// IMEX integration: diffusion implicit (one tridiagonal solve per species
/// per stage), kinetics explicit, second order with an embedded first-order
/// error estimate. Throws IntegrationError on non-finite values (naming the
/// time, variable and cell) or step-size collapse.
PdeRun simulate(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid, const Vector& y0,
                double t_end, const PdeSettings& settings = {});

/// Semi-discrete right-hand side: kinetics plus diffusion.
Vector pde_rhs(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid, const Vector& y);
Matrix pde_jacobian(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid, const Vector& y);

enum class PatternClass { Homogeneous, Spike, Interface, Other };
std::string_view to_string(PatternClass c);

struct SpikeShape {
    double height = 0.0;
    double location = 0.0;
    double width = 0.0;  // width at half maximum above the background
};

struct PatternMetrics {
    std::vector<double> amplitude;  // max - min per variable
    std::optional<SpikeShape> spike;
    PatternClass classification = PatternClass::Homogeneous;
};

/// Shape of the slow variable with the largest relative amplitude.
PatternMetrics pattern_metrics(const ReactionModel& model, const Grid1D& grid, const Vector& field);

struct SpikeAsymptotic {
    double a = 0.0, b = 0.0, eps = 0.0;
    double peak = 0.0;     // a + b / (2 eps)
    double v_level = 0.0;  // 3 eps / b
    double u(double x) const;
};

/// Leading-order spike of the Schnakenberg system for small eps and large D.
SpikeAsymptotic spike_asymptotic(double a, double b, double eps);

struct SpikeComparison {
    double simulated_peak = 0.0;
    double simulated_v = 0.0;      // mean of the fast field
    double v_variation = 0.0;      // (max - min) / mean of the fast field
    double peak_error = 0.0;       // relative
    double v_error = 0.0;          // relative
    std::string note;
};

/// Compares a simulated Schnakenberg spike with the asymptotics. Throws
/// NotApplicableError unless the field is classified as a spike.
SpikeComparison compare_spike(const ReactionModel& model, const ParameterSet& params, const Grid1D& grid,
                              const Vector& field, const SpikeAsymptotic& asym);

struct ThresholdSettings {
    std::vector<double> amplitudes{0.25, 0.5, 1, 1.5, 2, 3, 4, 6, 8};
    int refine = 0;          // bisection steps between the last decaying and first growing amplitude
    double t_end = 200.0;
    double noise = 1e-3;     // probe for linearly unstable states
    std::uint64_t seed = 0;
    double window = 0.10;
    int jobs = 1;
    PdeSettings pde;
};

enum class ResponseStatus { Thresholded, NoPattern, Unstable, NoSteadyState };
std::string_view to_string(ResponseStatus s);

struct ResponseRow {
    double param = 0.0;
    ResponseStatus status = ResponseStatus::NoPattern;
    bool noise_patterned = false;           // for unstable states: did noise grow into a pattern
    std::optional<double> threshold;        // smallest amplitude that patterned
    std::vector<std::pair<double, bool>> responses;  // (amplitude, grew)
};

struct ThresholdTable {
    std::vector<ResponseRow> rows;
    bool monotone = true;  // thresholds nondecreasing across the thresholded rows
};

/// Perturbs the first slow variable in the middle window at each parameter
/// value. "Grew" means the final amplitude exceeds 0.1 * (1 + ||HSS||_inf).
ThresholdTable threshold_scan(const ReactionModel& model, const ParameterSet& params, const std::string& param,
                              const std::vector<double>& values, const Grid1D& grid,
                              const ThresholdSettings& settings = {});

/// Discretized steady-state problem in `param`; pairs with continue_branch.
ContinuationProblem pde_continuation_problem(const ReactionModel& model, const ParameterSet& params,
                                             const std::string& param, const Grid1D& grid);

struct PatternedBranchSettings {
    double start = 0.0;               // parameter value of the seeding simulation
    PerturbationSpec perturbation;    // default: amplitude 2 on each slow variable in the middle window
    double t_end = 2000.0;
    PdeSettings pde;
    ContinuationSettings continuation;  // alpha bounds are set from the range
};

struct PatternedBranch {
    Branch branch;
    std::vector<double> amplitude;  // max - min of the patterned slow variable at each point
    std::size_t variable = 0;
    /// Largest parameter value with a stable point of non-negligible amplitude.
    std::optional<double> stable_reach;
};

/// Settles a perturbed steady state at `settings.start` into a pattern and
/// continues the discretized steady-state problem both ways over [lo, hi].
/// Throws NotApplicableError if the perturbation decays.
PatternedBranch patterned_branch(const ReactionModel& model, const ParameterSet& params, const std::string& param,
                                 double lo, double hi, const Grid1D& grid, const PatternedBranchSettings& settings = {});

}  // namespace lpakit
