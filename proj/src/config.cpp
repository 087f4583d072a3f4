#include <lpakit/builtin_models.hpp>
#include <lpakit/config.hpp>
#include <lpakit/expr.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

namespace lpakit {

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("model config is missing \"") + key + "\"");
    return j.at(key);
}

void check_symbols(const expr::Expr& e, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& s : expr::free_symbols(e)) {
        if (!allowed.count(s)) throw ConfigError(where + " uses undeclared symbol \"" + s + "\"");
    }
}

ReactionModel parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("model config must be a JSON object");

    ModelDefinition def;
    def.name = require(doc, "name").get<std::string>();
    def.description = doc.value("description", "");

    // Parameters, as an object of defaults or a list of {name, default, description}.
    const json& params = require(doc, "parameters");
    if (params.is_object()) {
        for (const auto& [name, value] : params.items()) {
            def.parameters.push_back({name, value.is_null() ? std::nullopt : std::optional(value.get<double>()), ""});
        }
    } else if (params.is_array()) {
        for (const auto& p : params) {
            std::optional<double> dflt;
            if (p.contains("default") && !p.at("default").is_null()) dflt = p.at("default").get<double>();
            def.parameters.push_back({require(p, "name").get<std::string>(), dflt, p.value("description", "")});
        }
    } else {
        throw ConfigError("\"parameters\" must be an object or a list");
    }
    std::vector<std::string> param_names;
    for (const auto& p : def.parameters) param_names.push_back(p.name);

    // Variables, slow class first.
    struct Raw {
        std::string name;
        DiffusionClass cls;
        json diffusivity;
    };
    std::vector<Raw> raw;
    for (const auto& v : require(doc, "variables")) {
        const std::string cls = require(v, "class").get<std::string>();
        if (cls != "slow" && cls != "fast") throw ConfigError("variable class must be \"slow\" or \"fast\", got " + cls);
        raw.push_back({require(v, "name").get<std::string>(), cls == "slow" ? DiffusionClass::Slow : DiffusionClass::Fast,
                       require(v, "diffusivity")});
    }
    std::stable_partition(raw.begin(), raw.end(), [](const Raw& r) { return r.cls == DiffusionClass::Slow; });
    const auto slow = std::count_if(raw.begin(), raw.end(), [](const Raw& r) { return r.cls == DiffusionClass::Slow; });
    if (slow == 0 || slow == static_cast<long>(raw.size())) {
        throw ConfigError("a model needs at least one slow and one fast variable");
    }
    std::set<std::string> names;
    std::vector<std::string> var_names;
    for (const auto& r : raw) {
        if (!names.insert(r.name).second) throw ConfigError("duplicate name \"" + r.name + "\"");
        var_names.push_back(r.name);
        def.variables.push_back({r.name, r.cls});
    }
    for (const auto& p : param_names) {
        if (!names.insert(p).second) throw ConfigError("duplicate name \"" + p + "\"");
    }
    const std::set<std::string> param_set(param_names.begin(), param_names.end());

    for (const auto& r : raw) {
        const std::string text = r.diffusivity.is_number() ? json(r.diffusivity.get<double>()).dump()
                                                           : r.diffusivity.get<std::string>();
        const auto e = expr::parse(text);
        check_symbols(e, param_set, "diffusivity of " + r.name);
        auto compiled = std::make_shared<expr::CompiledExpr>(e, param_names);
        def.diffusivity.push_back([compiled](std::span<const double> p) { return (*compiled)(p); });
        def.diffusivity_text.push_back(expr::to_string(e));
    }

    // Kinetics over slots (variables..., parameters...).
    const json& kin = require(doc, "kinetics");
    std::vector<std::string> slots = var_names;
    slots.insert(slots.end(), param_names.begin(), param_names.end());
    const std::set<std::string> all(slots.begin(), slots.end());
    std::vector<expr::CompiledExpr> rates;
    for (const auto& v : var_names) {
        if (!kin.contains(v)) throw ConfigError("no kinetics given for variable \"" + v + "\"");
        const auto e = expr::parse(kin.at(v).get<std::string>());
        check_symbols(e, all, "kinetics of " + v);
        rates.emplace_back(e, slots);
        def.kinetics_text.push_back(expr::to_string(e));
    }
    for (const auto& [k, _] : kin.items()) {
        if (!std::count(var_names.begin(), var_names.end(), k)) {
            throw ConfigError("kinetics given for undeclared variable \"" + k + "\"");
        }
    }
    const std::size_t nv = var_names.size();
    def.kinetics = [rates = std::move(rates), nv](std::span<const double> x, std::span<const double> p,
                                                   std::span<double> out) {
        thread_local std::vector<double> buf;
        buf.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nv));
        buf.insert(buf.end(), p.begin(), p.end());
        for (std::size_t i = 0; i < rates.size(); ++i) out[i] = rates[i](buf);
    };

    if (doc.contains("seed")) {
        const json& seed = doc.at("seed");
        for (const auto& v : var_names) def.default_seed.push_back(seed.value(v, 1.0));
    }

    if (doc.contains("conservation")) {
        auto var_index = [&](const std::string& n) -> std::size_t {
            auto it = std::find(var_names.begin(), var_names.end(), n);
            if (it == var_names.end()) throw ConfigError("conservation law names unknown variable \"" + n + "\"");
            return static_cast<std::size_t>(it - var_names.begin());
        };
        for (const auto& law : doc.at("conservation")) {
            ConservationLaw c;
            for (const auto& [n, coeff] : require(law, "terms").items()) c.terms.emplace_back(var_index(n), coeff.get<double>());
            c.total = require(law, "total").get<std::string>();
            if (!param_set.count(c.total)) throw ConfigError("conservation total \"" + c.total + "\" is not a parameter");
            c.replaces = var_index(require(law, "replaces").get<std::string>());
            def.conservation.push_back(std::move(c));
        }
    }
    return ReactionModel(std::move(def));
}

}  // namespace

ReactionModel parse_model_config(const std::string& json_text) {
    try {
        return parse_config(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
}

ReactionModel load_model_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model_config(ss.str());
}

ReactionModel resolve_model(const std::string& name_or_path) {
    if (name_or_path.size() > 5 && name_or_path.ends_with(".json")) return load_model_config(name_or_path);
    return builtin(name_or_path);
}

}  // namespace lpakit
