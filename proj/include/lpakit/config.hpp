#pragma once

// User-defined models from a JSON document:
//
//   {
//     "name": "brusselator",
//     "variables": [
//       {"name": "u", "class": "slow", "diffusivity": "eps^2"},
//       {"name": "v", "class": "fast", "diffusivity": "D"}
//     ],
//     "parameters": {"a": 1.0, "b": 2.5, "eps": 0.05, "D": 10},
//     "kinetics": {"u": "a - (b+1)*u + u^2*v", "v": "b*u - u^2*v"},
//     "seed": {"u": 1.0, "v": 2.5},
//     "conservation": [{"terms": {"u": 1, "v": 1}, "total": "T", "replaces": "v"}]
//   }
//
// "description", "seed" and "conservation" are optional. A diffusivity is a
// number or an expression in the parameters; kinetics may use variables,
// parameters and the functions exp, log, sqrt, sech, abs, min, max.

#include <lpakit/model.hpp>

#include <string>

namespace lpakit {

/// Throws ConfigError (or expr::ParseError for a malformed expression).
ReactionModel parse_model_config(const std::string& json_text);
ReactionModel load_model_config(const std::string& path);

/// A built-in name, or a path to a config file when it ends in ".json".
ReactionModel resolve_model(const std::string& name_or_path);

}  // namespace lpakit
