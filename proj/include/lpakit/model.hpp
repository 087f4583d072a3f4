#pragma once

// Reaction-diffusion models: species split into a slow-diffusing class u
// (M variables) and a fast-diffusing class v (N variables). State vectors
// always list the slow variables first, then the fast ones.

#include <lpakit/errors.hpp>
#include <lpakit/numerics.hpp>

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lpakit {

enum class DiffusionClass { Slow, Fast };

std::string_view to_string(DiffusionClass c);

struct Variable {
    std::string name;
    DiffusionClass cls;
};

struct Parameter {
    std::string name;
    std::optional<double> default_value;
    std::string description;
};

/// Ordered parameter values with lookup by name.
class ParameterSet {
public:
    ParameterSet() = default;
    ParameterSet(std::vector<std::string> names, std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool contains(std::string_view name) const;
    std::size_t index(std::string_view name) const;  // throws ConfigError
    double get(std::string_view name) const;
    void set(std::string_view name, double value);
    std::map<std::string, double> to_map() const;

private:
    std::vector<std::string> names_;
    std::vector<double> values_;
};

using KineticsFn = std::function<void(std::span<const double> state, std::span<const double> params,
                                      std::span<double> out)>;
/// Writes the row-major (M+N)x(M+N) Jacobian into `out`.
using JacobianFn = std::function<void(std::span<const double> state, std::span<const double> params,
                                      std::span<double> out)>;
using DiffusivityFn = std::function<double(std::span<const double> params)>;

/// A linear first integral sum_i coeff_i * x_i = params[total]. In steady
/// state solves the equation `replaces` is swapped for the constraint so the
/// Jacobian is not structurally singular.
struct ConservationLaw {
    std::vector<std::pair<std::size_t, double>> terms;
    std::string total;
    std::size_t replaces;
};

struct ModelDefinition {
    std::string name;
    std::string description;
    std::vector<Variable> variables;  // slow class first
    std::vector<Parameter> parameters;
    KineticsFn kinetics;
    JacobianFn jacobian;  // optional
    std::vector<DiffusivityFn> diffusivity;
    std::vector<std::string> kinetics_text;
    std::vector<std::string> diffusivity_text;
    std::vector<ConservationLaw> conservation;
    std::vector<double> default_seed;  // starting guess for the HSS
};

class ReactionModel {
public:
    explicit ReactionModel(ModelDefinition def);

    const std::string& name() const { return def_.name; }
    const std::string& description() const { return def_.description; }
    std::size_t slow_count() const { return slow_count_; }
    std::size_t fast_count() const { return def_.variables.size() - slow_count_; }
    std::size_t dimension() const { return def_.variables.size(); }
    const std::vector<Variable>& variables() const { return def_.variables; }
    const std::vector<Parameter>& parameters() const { return def_.parameters; }
    std::size_t variable_index(std::string_view name) const;  // throws ConfigError
    bool has_analytic_jacobian() const { return static_cast<bool>(def_.jacobian); }

    /// (f, g) at `state`. Throws EvaluationError naming the first
    /// non-finite component.
    Vector kinetics(const Vector& state, const ParameterSet& p) const;
    /// Unchecked evaluation into caller storage.
    void kinetics_into(std::span<const double> state, std::span<const double> p, std::span<double> out) const {
        def_.kinetics(state, p, out);
    }

    Matrix jacobian(const Vector& state, const ParameterSet& p) const;
    Matrix finite_difference_jacobian(const Vector& state, const ParameterSet& p) const;

    Vector diffusivities(const ParameterSet& p) const;

    const std::vector<std::string>& kinetics_text() const { return def_.kinetics_text; }
    const std::vector<std::string>& diffusivity_text() const { return def_.diffusivity_text; }
    const std::vector<ConservationLaw>& conservation_laws() const { return def_.conservation; }

    /// Parameter defaults; throws ConfigError if any parameter lacks one.
    ParameterSet default_parameters() const;
    /// Defaults overridden by `values`. Unknown names and parameters with
    /// neither a default nor a value are ConfigErrors.
    ParameterSet parameters_from(const std::map<std::string, double>& values) const;

    Vector default_seed() const;

private:
    ModelDefinition def_;
    std::size_t slow_count_ = 0;
};

struct HomogeneousSteadyState {
    Vector state;
    ParameterSet params;
    double residual_norm = 0.0;
};

/// Kinetics with each conservation law's equation replaced by the law.
Vector steady_state_residual(const ReactionModel& model, const Vector& state, const ParameterSet& p);
Matrix steady_state_jacobian(const ReactionModel& model, const Vector& state, const ParameterSet& p);

/// Newton solve of the homogeneous steady state. The returned residual is
/// that of the raw kinetics.
HomogeneousSteadyState solve_hss(const ReactionModel& model, const ParameterSet& p, const Vector& seed,
                                 const NewtonSettings& settings = {});

/// Coefficient rows of the model's conservation laws.
std::vector<Vector> conservation_rows(const ReactionModel& model);

/// Eigenvalues of J restricted to {x : c.x = 0 for every row c}. For a
/// first integral c^T J = 0, so that subspace is J-invariant and the
/// restriction drops the structural zero eigenvalues. With no rows this is
/// eig_real(J).
std::vector<Complex> restricted_eigenvalues(const Matrix& jac, const std::vector<Vector>& rows);

}  // namespace lpakit
