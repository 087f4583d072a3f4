#pragma once

// Local perturbation analysis: the ODE system tracking a narrow, large
// perturbation u^l of the slow species on top of the well-mixed state
// (u^g, v^g). State order is (u^g, v^g, u^l) everywhere.
//
//   du^g/dt = f(u^g, v^g)
//   dv^g/dt = g(u^g, v^g) [+ sqrt(eps) (g(u^l, v^g) - g(u^g, v^g))]
//   du^l/dt = f(u^l, v^g)
//
// The bracketed coupling is the optional first correction in the width of
// the perturbation; it is off by default.

#include <lpakit/continuation.hpp>
#include <lpakit/model.hpp>
#include <lpakit/numerics.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace lpakit {

class LpaSystem {
public:
    LpaSystem(ReactionModel model, bool corrected = false, double epsilon = 0.0);

    const ReactionModel& base() const { return model_; }
    std::size_t slow_count() const { return model_.slow_count(); }
    std::size_t fast_count() const { return model_.fast_count(); }
    std::size_t dimension() const { return 2 * slow_count() + fast_count(); }
    bool corrected() const { return corrected_; }
    double epsilon() const { return epsilon_; }

    /// Names like "u_g", "v_g", "u_l".
    std::vector<std::string> state_names() const;

    Vector rhs(const Vector& y, const ParameterSet& p) const;
    Matrix jacobian(const Vector& y, const ParameterSet& p) const;

    /// (u, v) -> (u, v, u).
    Vector embed(const Vector& well_mixed) const;
    Vector global_part(const Vector& y) const;
    Vector local_part(const Vector& y) const;

    /// Base-model conservation laws carried over to the LPA state.
    std::vector<Vector> conservation_rows() const;
    Vector steady_residual(const Vector& y, const ParameterSet& p) const;
    Matrix steady_jacobian(const Vector& y, const ParameterSet& p) const;
    /// Eigenvalues of the Jacobian restricted to the conserved subspace.
    std::vector<Complex> stability_eigenvalues(const Vector& y, const ParameterSet& p) const;

private:
    ReactionModel model_;
    bool corrected_;
    double epsilon_;
};

/// Throws ConfigError if `corrected` and epsilon <= 0.
LpaSystem build_lpa(const ReactionModel& model, bool corrected = false, double epsilon = 0.0);

/// Jacobian of the LPA system at the embedded steady state.
Matrix lpa_jacobian_at_hss(const LpaSystem& system, const HomogeneousSteadyState& hss);

enum class BranchKind { Global, Local, Degenerate };
std::string_view to_string(BranchKind k);

struct LpaBranchPoint {
    double param_value = std::numeric_limits<double>::quiet_NaN();
    Vector state;  // (u^g, v^g, u^l)
    std::vector<Complex> eigenvalues;
    bool stable = false;
    BranchKind kind = BranchKind::Global;
};

struct LocalRootSettings {
    double dedupe_tol = 1e-6;
    double kind_tol = 1e-6;
    int random_starts = 0;  // extra seeds drawn around the steady state
    std::uint64_t seed = 0;
    NewtonSettings newton;
};

/// Roots u^l of f(u^l, v^s) = 0 with (u^g, v^g) pinned at the steady state,
/// from each seed (an M-vector of u^l values) plus optional random starts.
std::vector<LpaBranchPoint> find_local_roots(const LpaSystem& system, const HomogeneousSteadyState& hss,
                                             const std::vector<Vector>& seeds, const LocalRootSettings& settings = {});

enum class PerturbationOutcome { Decayed, Grew, Settled, Unresolved };
std::string_view to_string(PerturbationOutcome o);

struct PerturbationResult {
    PerturbationOutcome outcome = PerturbationOutcome::Unresolved;
    Vector final_state;
    double final_time = 0.0;
};

struct PerturbationSettings {
    double decay_tol = 1e-6;
    double blowup = 1e6;
    double settle_tol = 1e-6;  // |rhs| below this at t_end counts as settled
    OdeSettings ode;
};

/// Integrates from (u^s, v^s, u^s + amplitude). Throws IntegrationError if
/// the integrator fails.
PerturbationResult simulate_perturbation(const LpaSystem& system, const HomogeneousSteadyState& hss,
                                         const Vector& amplitude, double t_end,
                                         const PerturbationSettings& settings = {});

/// Steady states of the LPA system as a one-parameter problem in `param`.
ContinuationProblem lpa_continuation_problem(const LpaSystem& system, const ParameterSet& params,
                                             const std::string& param);

/// Homogeneous steady states of the base model in `param`.
ContinuationProblem hss_continuation_problem(const ReactionModel& model, const ParameterSet& params,
                                             const std::string& param);

/// LPA steady states as a two-parameter problem.
TwoParameterProblem lpa_two_parameter_problem(const LpaSystem& system, const ParameterSet& params,
                                              const std::string& p1, const std::string& p2);

}  // namespace lpakit
