#include <lpakit/model.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace lpakit {

std::string_view to_string(DiffusionClass c) { return c == DiffusionClass::Slow ? "slow" : "fast"; }

ParameterSet::ParameterSet(std::vector<std::string> names, std::vector<double> values)
    : names_(std::move(names)), values_(std::move(values)) {
    if (names_.size() != values_.size()) throw ConfigError("parameter names and values differ in length");
}

bool ParameterSet::contains(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t ParameterSet::index(std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        std::ostringstream msg;
        msg << "unknown parameter '" << name << "'; known:";
        for (const auto& n : names_) msg << ' ' << n;
        throw ConfigError(msg.str());
    }
    return static_cast<std::size_t>(it - names_.begin());
}

double ParameterSet::get(std::string_view name) const { return values_[index(name)]; }

void ParameterSet::set(std::string_view name, double value) { values_[index(name)] = value; }

std::map<std::string, double> ParameterSet::to_map() const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < names_.size(); ++i) out[names_[i]] = values_[i];
    return out;
}

ReactionModel::ReactionModel(ModelDefinition def) : def_(std::move(def)) {
    const auto& vars = def_.variables;
    std::set<std::string> seen;
    bool in_fast = false;
    for (const auto& v : vars) {
        if (!seen.insert(v.name).second) throw ConfigError("duplicate variable '" + v.name + "'");
        if (v.cls == DiffusionClass::Fast) {
            in_fast = true;
        } else {
            if (in_fast) throw ConfigError("slow variables must precede fast variables");
            ++slow_count_;
        }
    }
    if (slow_count_ == 0 || slow_count_ == vars.size()) {
        throw ConfigError("model '" + def_.name + "' needs at least one slow and one fast variable");
    }
    for (const auto& p : def_.parameters) {
        if (!seen.insert(p.name).second) throw ConfigError("name '" + p.name + "' declared twice");
    }
    if (!def_.kinetics) throw ConfigError("model '" + def_.name + "' has no kinetics");
    if (def_.diffusivity.size() != vars.size()) throw ConfigError("one diffusivity per variable is required");
    for (const auto& law : def_.conservation) {
        if (law.replaces >= vars.size()) throw ConfigError("conservation law replaces an unknown equation");
        for (const auto& [i, c] : law.terms) {
            if (i >= vars.size()) throw ConfigError("conservation law references an unknown variable");
        }
        bool found = false;
        for (const auto& p : def_.parameters) found = found || p.name == law.total;
        if (!found) throw ConfigError("conservation total '" + law.total + "' is not a parameter");
    }
    if (def_.default_seed.empty()) def_.default_seed.assign(vars.size(), 1.0);
    if (def_.default_seed.size() != vars.size()) throw ConfigError("default seed has the wrong length");
}

std::size_t ReactionModel::variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < def_.variables.size(); ++i) {
        if (def_.variables[i].name == name) return i;
    }
    throw ConfigError("model '" + def_.name + "' has no variable '" + std::string(name) + "'");
}

Vector ReactionModel::kinetics(const Vector& state, const ParameterSet& p) const {
    if (static_cast<std::size_t>(state.size()) != dimension()) throw ConfigError("state has the wrong dimension");
    if (p.size() != def_.parameters.size()) throw ConfigError("parameter set does not match model");
    Vector out(state.size());
    def_.kinetics({state.data(), static_cast<std::size_t>(state.size())}, p.values(),
                  {out.data(), static_cast<std::size_t>(out.size())});
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out[i])) {
            const auto& name = def_.variables[static_cast<std::size_t>(i)].name;
            throw EvaluationError("kinetics for '" + name + "' evaluated to a non-finite value", name);
        }
    }
    return out;
}

Matrix ReactionModel::finite_difference_jacobian(const Vector& state, const ParameterSet& p) const {
    return lpakit::finite_diff_jacobian([&](const Vector& x) { return kinetics(x, p); }, state);
}

Matrix ReactionModel::jacobian(const Vector& state, const ParameterSet& p) const {
    if (!def_.jacobian) return finite_difference_jacobian(state, p);
    const auto n = static_cast<Eigen::Index>(dimension());
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> jac(n, n);
    def_.jacobian({state.data(), static_cast<std::size_t>(n)}, p.values(),
                  {jac.data(), static_cast<std::size_t>(n * n)});
    if (!jac.allFinite()) throw EvaluationError("Jacobian evaluated to a non-finite value", def_.name);
    return jac;
}

Vector ReactionModel::diffusivities(const ParameterSet& p) const {
    Vector out(static_cast<Eigen::Index>(dimension()));
    for (std::size_t i = 0; i < dimension(); ++i) out[static_cast<Eigen::Index>(i)] = def_.diffusivity[i](p.values());
    return out;
}

ParameterSet ReactionModel::default_parameters() const { return parameters_from({}); }

ParameterSet ReactionModel::parameters_from(const std::map<std::string, double>& values) const {
    std::vector<std::string> names;
    std::vector<double> vals;
    for (const auto& [k, v] : values) {
        bool known = false;
        for (const auto& p : def_.parameters) known = known || p.name == k;
        if (!known) throw ConfigError("model '" + def_.name + "' has no parameter '" + k + "'");
    }
    for (const auto& p : def_.parameters) {
        names.push_back(p.name);
        if (auto it = values.find(p.name); it != values.end()) {
            vals.push_back(it->second);
        } else if (p.default_value) {
            vals.push_back(*p.default_value);
        } else {
            throw ConfigError("missing value for parameter '" + p.name + "'");
        }
    }
    return ParameterSet(std::move(names), std::move(vals));
}

Vector ReactionModel::default_seed() const {
    return Eigen::Map<const Vector>(def_.default_seed.data(), static_cast<Eigen::Index>(def_.default_seed.size()));
}

std::vector<Vector> conservation_rows(const ReactionModel& model) {
    std::vector<Vector> rows;
    for (const auto& law : model.conservation_laws()) {
        Vector c = Vector::Zero(static_cast<Eigen::Index>(model.dimension()));
        for (const auto& [i, coeff] : law.terms) c[static_cast<Eigen::Index>(i)] += coeff;
        rows.push_back(std::move(c));
    }
    return rows;
}

Vector steady_state_residual(const ReactionModel& model, const Vector& state, const ParameterSet& p) {
    Vector r = model.kinetics(state, p);
    for (const auto& law : model.conservation_laws()) {
        double s = -p.get(law.total);
        for (const auto& [i, c] : law.terms) s += c * state[static_cast<Eigen::Index>(i)];
        r[static_cast<Eigen::Index>(law.replaces)] = s;
    }
    return r;
}

Matrix steady_state_jacobian(const ReactionModel& model, const Vector& state, const ParameterSet& p) {
    Matrix jac = model.jacobian(state, p);
    for (const auto& law : model.conservation_laws()) {
        const auto row = static_cast<Eigen::Index>(law.replaces);
        jac.row(row).setZero();
        for (const auto& [i, c] : law.terms) jac(row, static_cast<Eigen::Index>(i)) += c;
    }
    return jac;
}

HomogeneousSteadyState solve_hss(const ReactionModel& model, const ParameterSet& p, const Vector& seed,
                                 const NewtonSettings& settings) {
    if (!seed.allFinite()) throw ConfigError("steady-state seed must be finite");
    auto res = newton_solve([&](const Vector& x) { return steady_state_residual(model, x, p); },
                            [&](const Vector& x) { return steady_state_jacobian(model, x, p); }, seed, settings);
    HomogeneousSteadyState out;
    out.state = res.x;
    out.params = p;
    out.residual_norm = model.kinetics(res.x, p).lpNorm<Eigen::Infinity>();
    return out;
}

std::vector<Complex> restricted_eigenvalues(const Matrix& jac, const std::vector<Vector>& rows) {
    if (rows.empty()) return eig_real(jac);
    Matrix c(static_cast<Eigen::Index>(rows.size()), jac.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) c.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    // Orthonormal basis of the null space of C from a full QR of C^T.
    Eigen::HouseholderQR<Matrix> qr(c.transpose());
    const Matrix q = qr.householderQ();
    const Matrix basis = q.rightCols(jac.cols() - c.rows());
    return eig_real(basis.transpose() * jac * basis);
}

}  // namespace lpakit
