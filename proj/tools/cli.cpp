#include "cli.hpp"

#include <lpakit/builtin_models.hpp>
#include <lpakit/config.hpp>
#include <lpakit/expr.hpp>
#include <lpakit/io.hpp>
#include <lpakit/lpa_diagram.hpp>
#include <lpakit/lsa.hpp>
#include <lpakit/parallel.hpp>
#include <lpakit/pde.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <sstream>

namespace lpakit {

namespace {

using nlohmann::json;

struct ModelArgs {
    std::string model;
    std::vector<std::string> fixed;
    std::vector<double> eps;
    std::vector<double> d;
};

struct Loaded {
    ReactionModel model;
    ParameterSet params;
};

std::pair<double, double> parse_pair(const std::string& text, const char* what) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError(std::string(what) + " must look like A:B, got " + text);
    try {
        std::size_t used = 0;
        const double a = std::stod(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(text);
        const std::string rest = text.substr(colon + 1);
        const double b = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(text);
        return {a, b};
    } catch (const std::logic_error&) {
        throw ConfigError(std::string(what) + " must look like A:B, got " + text);
    }
}

std::pair<double, double> parse_range(const std::string& text) {
    const auto r = parse_pair(text, "--range");
    if (!(r.second > r.first)) throw ConfigError("--range needs LO < HI, got " + text);
    return r;
}

Loaded load(const ModelArgs& args) {
    ReactionModel model = resolve_model(args.model);
    std::map<std::string, double> values;
    for (const auto& kv : args.fixed) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--fixed expects NAME=VALUE, got " + kv);
        try {
            values[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::logic_error&) {
            throw ConfigError("--fixed expects a number after '=', got " + kv);
        }
    }
    ParameterSet params = model.parameters_from(values);
    std::optional<double> eps, d;
    if (!args.eps.empty()) eps = args.eps.front();
    if (!args.d.empty()) d = args.d.front();
    if ((eps && !params.contains("eps")) || (d && !params.contains("D"))) {
        throw ConfigError("model '" + model.name() + "' has no eps/D parameters; use --fixed");
    }
    params = with_eps_d(params, eps, d);
    return {std::move(model), std::move(params)};
}

void add_model_options(CLI::App* cmd, ModelArgs& args, bool eps_d = true) {
    cmd->add_option("--model", args.model, "built-in name or path to a .json model")->required();
    cmd->add_option("--fixed", args.fixed, "parameter override NAME=VALUE (repeatable)");
    if (eps_d) {
        cmd->add_option("--eps", args.eps, "slow diffusion length scale")->delimiter(',');
        cmd->add_option("--D", args.d, "fast diffusivity")->delimiter(',');
    }
}

std::vector<std::string> variable_names(const ReactionModel& m) {
    std::vector<std::string> out;
    for (const auto& v : m.variables()) out.push_back(v.name);
    return out;
}

std::string json_path_for(const std::string& out, const std::string& explicit_path) {
    if (!explicit_path.empty()) return explicit_path;
    if (out.empty() || out == "-") return "";
    return std::filesystem::path(out).replace_extension(".json").string();
}

// models

void models_list() {
    for (const auto& n : builtin_names()) std::cout << n << '\n';
}

void models_show(const std::string& name) {
    const ReactionModel m = resolve_model(name);
    std::cout << "model " << m.name() << '\n';
    if (!m.description().empty()) std::cout << m.description() << '\n';
    std::cout << "variables:\n";
    for (std::size_t i = 0; i < m.dimension(); ++i) {
        const auto& v = m.variables()[i];
        std::cout << "  " << v.name << "  " << to_string(v.cls) << "  D = " << m.diffusivity_text()[i] << '\n';
    }
    std::cout << "kinetics:\n";
    for (std::size_t i = 0; i < m.dimension(); ++i) {
        std::cout << "  d" << m.variables()[i].name << "/dt = " << m.kinetics_text()[i] << '\n';
    }
    std::cout << "parameters:\n";
    for (const auto& p : m.parameters()) {
        std::cout << "  " << p.name << " = " << (p.default_value ? format_number(*p.default_value) : "(required)");
        if (!p.description.empty()) std::cout << "  # " << p.description;
        std::cout << '\n';
    }
    for (const auto& c : m.conservation_laws()) {
        std::cout << "conserved: ";
        for (std::size_t i = 0; i < c.terms.size(); ++i) {
            std::cout << (i ? " + " : "") << format_number(c.terms[i].second) << "*" << m.variables()[c.terms[i].first].name;
        }
        std::cout << " = " << c.total << '\n';
    }
}

// lpa-branch

struct LpaArgs {
    ModelArgs model;
    std::string param;
    std::string range;
    std::string out = "-";
    std::string json_out;
    double max_step = 0.02;
    double initial_step = 0.005;
    bool corrected = false;
    std::uint64_t seed = 0;
};

LpaDiagramSettings diagram_settings(double lo, double hi, double max_step, double initial_step, std::uint64_t seed) {
    LpaDiagramSettings s;
    s.lo = lo;
    s.hi = hi;
    s.continuation.max_step = max_step;
    s.continuation.initial_step = initial_step;
    s.seed = seed;
    return s;
}

LpaSystem make_system(const Loaded& in, bool corrected) {
    if (!corrected) return LpaSystem(in.model);
    if (!in.params.contains("eps")) throw ConfigError("--corrected needs a model with an eps parameter");
    return LpaSystem(in.model, true, in.params.get("eps"));
}

int lpa_branch(const LpaArgs& a, const std::string& invocation) {
    const Loaded in = load(a.model);
    const auto [lo, hi] = parse_range(a.range);
    in.params.index(a.param);
    const LpaSystem system = make_system(in, a.corrected);
    const auto diagram =
        compute_lpa_diagram(system, in.params, a.param, diagram_settings(lo, hi, a.max_step, a.initial_step, a.seed));

    const auto names = system.state_names();
    Table t;
    t.header = {"branch", "point", a.param};
    t.header.insert(t.header.end(), names.begin(), names.end());
    t.header.push_back("stable");
    json bifs = json::array();
    for (const auto& lb : diagram.branches) {
        for (std::size_t i = 0; i < lb.branch.points.size(); ++i) {
            const auto& p = lb.branch.points[i];
            std::vector<std::string> row{lb.label, std::to_string(i), format_number(p.alpha)};
            for (Eigen::Index j = 0; j < p.x.size(); ++j) row.push_back(format_number(p.x[j]));
            row.push_back(p.stable ? "1" : "0");
            t.add_row(std::move(row));
        }
        for (const auto& b : lb.branch.bifurcations) {
            json j = to_json(b, names);
            j["branch"] = lb.label;
            bifs.push_back(std::move(j));
        }
    }
    write_csv_file(a.out, t, invocation);

    json regions = json::array();
    for (const auto& r : diagram.regions) {
        regions.push_back({{"lo", r.lo}, {"hi", r.hi}, {"kind", std::string(to_string(r.kind))},
                           {"local_states", r.local_states}});
    }
    json doc{{"model", in.model.name()}, {"param", a.param}, {"range", {lo, hi}},
             {"bifurcations", bifs}, {"regions", regions}, {"invocation", invocation}};
    const std::string jpath = json_path_for(a.out, a.json_out);
    if (!jpath.empty()) write_json_file(jpath, doc);

    std::ostream& log = (a.out.empty() || a.out == "-") ? std::cerr : std::cout;
    for (const auto& b : bifs) {
        log << b["branch"].get<std::string>() << ": " << b["kind"].get<std::string>() << " at " << a.param << " = "
            << format_number(b["param"].get<double>()) << '\n';
    }
    for (const auto& r : diagram.regions) {
        log << "region [" << format_number(r.lo) << ", " << format_number(r.hi) << "] " << to_string(r.kind) << '\n';
    }
    return 0;
}

// lsa

struct LsaArgs {
    ModelArgs model;
    std::optional<double> k;
    std::optional<double> kmax;
    int modes = 40;
    int samples = 401;
    std::string param;
    std::string range;
    std::string out = "-";
    std::vector<double> seed;
};

ModeSet mode_set(const LsaArgs& a) {
    if (a.k) return ModeSet::single(*a.k);
    if (a.kmax) return ModeSet::continuous(*a.kmax, a.samples);
    return ModeSet::cosine(a.modes);
}

HomogeneousSteadyState hss_of(const Loaded& in, const std::vector<double>& seed) {
    Vector s = in.model.default_seed();
    if (!seed.empty()) {
        if (seed.size() != in.model.dimension()) throw ConfigError("--hss-seed needs one value per variable");
        s = Eigen::Map<const Vector>(seed.data(), static_cast<Eigen::Index>(seed.size()));
    }
    return solve_hss(in.model, in.params, s);
}

int lsa_dispersion(const LsaArgs& a, const std::string& invocation) {
    const Loaded in = load(a.model);
    const auto hss = hss_of(in, a.seed);
    const auto res = dispersion(in.model, hss, mode_set(a));
    Table t;
    t.header = {"k"};
    for (std::size_t i = 1; i <= in.model.dimension(); ++i) {
        t.header.push_back("re" + std::to_string(i));
        t.header.push_back("im" + std::to_string(i));
    }
    for (const auto& m : res.modes) {
        std::vector<std::string> row{format_number(m.k)};
        for (const auto& l : m.eigenvalues) {
            row.push_back(format_number(l.real()));
            row.push_back(format_number(l.imag()));
        }
        t.add_row(std::move(row));
    }
    write_csv_file(a.out, t, invocation);
    std::cerr << "max growth " << format_number(res.max_growth) << " at k = " << format_number(res.argmax_k) << '\n';
    return 0;
}

int lsa_edge(const LsaArgs& a, const std::string& invocation) {
    const Loaded in = load(a.model);
    if (a.param.empty()) throw ConfigError("edge needs --param");
    const auto [lo, hi] = parse_range(a.range);
    TuringEdgeSettings s;
    if (!a.seed.empty()) s.seed = hss_of(in, a.seed).state;
    const auto edges = turing_edge(in.model, in.params, a.param, lo, hi, mode_set(a), s);
    Table t;
    t.header = {"crossing", a.param};
    for (std::size_t i = 0; i < edges.all.size(); ++i) t.add_row({std::to_string(i), format_number(edges.all[i])});
    write_csv_file(a.out, t, invocation);
    ((a.out.empty() || a.out == "-") ? std::cerr : std::cout) << "edge " << a.param << " = " << format_number(edges.right) << '\n';
    return 0;
}

int lsa_theorem1(const LsaArgs& a, const std::string& invocation) {
    ModelArgs base = a.model;
    base.eps.clear();
    base.d.clear();
    const Loaded in = load(base);
    const auto hss = hss_of(in, a.seed);
    if (a.model.eps.empty() || a.model.d.empty()) throw ConfigError("theorem1 needs --eps and --D lists");
    const double k = a.k.value_or(std::numbers::pi);
    const auto report = theorem1_check(in.model, hss, k, a.model.eps, a.model.d);
    Table t;
    t.header = {"eps", "D", "separated", "slow_deviation", "fast_ratio_min", "fast_ratio_max", "note"};
    for (const auto& r : report.rows) {
        const auto dev = r.deviation.empty() ? std::nan("") : *std::max_element(r.deviation.begin(), r.deviation.end());
        auto [lo, hi] = std::minmax_element(r.fast_ratio.begin(), r.fast_ratio.end());
        t.add_row({format_number(r.eps), format_number(r.d), r.separated ? "1" : "0", format_number(dev),
                   r.fast_ratio.empty() ? "nan" : format_number(*lo), r.fast_ratio.empty() ? "nan" : format_number(*hi),
                   r.note});
    }
    write_csv_file(a.out, t, invocation);
    return 0;
}

int lsa_gershgorin(const LsaArgs& a, const std::string& invocation) {
    const Loaded in = load(a.model);
    const auto hss = hss_of(in, a.seed);
    const double k = a.k.value_or(std::numbers::pi);
    const Matrix jk = jacobian_k(in.model, hss, k);
    const auto g = gershgorin_disks(jk, in.model.slow_count());
    Table t;
    t.header = {"row", "variable", "class", "center_re", "center_im", "radius"};
    for (std::size_t i = 0; i < g.disks.size(); ++i) {
        const auto& v = in.model.variables()[i];
        t.add_row({std::to_string(i), v.name, std::string(to_string(v.cls)), format_number(g.disks[i].center.real()),
                   format_number(g.disks[i].center.imag()), format_number(g.disks[i].radius)});
    }
    write_csv_file(a.out, t, invocation);
    std::ostream& log = (a.out.empty() || a.out == "-") ? std::cerr : std::cout;
    log << "separated " << (g.separated ? "yes" : "no") << ", eigenvalues contained " << (g.contained ? "yes" : "no")
        << '\n';
    return 0;
}

// pde

struct PdeArgs {
    ModelArgs model;
    int cells = 400;
    double t_end = 200.0;
    std::string perturb;
    double center = 0.0;
    double noise = 0.0;
    std::uint64_t seed = 0;
    double sample_interval = 0.0;
    std::string samples_out;
    std::string out = "-";
    std::string json_out;
    std::string param;
    std::vector<double> values;
    std::vector<double> amplitudes;
    int refine = 0;
    int jobs = default_jobs();
    std::string range;
    std::optional<double> start;
    double max_step = 0.05;
    double a = 0.0, b = 1.0;
};

void warn_resolution(const Grid1D& grid, const ParameterSet& p) {
    if (!p.contains("eps")) return;
    const std::string w = grid.resolution_warning(p.get("eps"));
    if (!w.empty()) std::cerr << "warning: " << w << '\n';
}

Table profile_table(const ReactionModel& model, const Grid1D& grid, const Vector& field) {
    Table t;
    t.header = {"x"};
    for (const auto& n : variable_names(model)) t.header.push_back(n);
    for (int i = 0; i < grid.size(); ++i) {
        std::vector<std::string> row{format_number(grid.x(i))};
        for (std::size_t v = 0; v < model.dimension(); ++v) {
            row.push_back(format_number(field[static_cast<Eigen::Index>(v) * grid.size() + i]));
        }
        t.add_row(std::move(row));
    }
    return t;
}

int pde_simulate(const PdeArgs& a, const std::string& invocation) {
    const Loaded in = load(a.model);
    const Grid1D grid(a.cells);
    warn_resolution(grid, in.params);
    const auto hss = solve_hss(in.model, in.params, in.model.default_seed());
    Vector y0 = uniform_field(grid, hss.state);
    if (!a.perturb.empty()) {
        const auto [window, amp] = parse_pair(a.perturb, "--perturb");
        PerturbationSpec spec;
        spec.window = window;
        spec.center = a.center;
        spec.amplitudes = Vector::Constant(static_cast<Eigen::Index>(in.model.slow_count()), amp);
        y0 = apply_perturbation(in.model, hss.state, grid, spec);
    }
    if (a.noise > 0) y0 = add_noise(in.model, grid, y0, a.noise, a.seed);
    PdeSettings s;
    s.sample_interval = a.sample_interval;
    const auto run = simulate(in.model, in.params, grid, y0, a.t_end, s);
    write_csv_file(a.out, profile_table(in.model, grid, run.state), invocation);

    if (!a.samples_out.empty()) {
        Table t;
        t.header = {"t", "x"};
        for (const auto& n : variable_names(in.model)) t.header.push_back(n);
        for (const auto& [time, field] : run.samples) {
            const Table p = profile_table(in.model, grid, field);
            for (auto row : p.rows) {
                row.insert(row.begin(), format_number(time));
                t.add_row(std::move(row));
            }
        }
        write_csv_file(a.samples_out, t, invocation);
    }

    const auto metrics = pattern_metrics(in.model, grid, run.state);
    json doc = to_json(metrics, variable_names(in.model));
    doc["t"] = run.t;
    doc["termination"] = std::string(to_string(run.termination));
    doc["accepted_steps"] = run.accepted;
    doc["rejected_steps"] = run.rejected;
    doc["min_value"] = run.min_value;
    doc["invocation"] = invocation;
    const std::string jpath = json_path_for(a.out, a.json_out);
    if (jpath.empty()) {
        std::cerr << doc.dump(2) << '\n';
    } else {
        write_json_file(jpath, doc);
    }
    if (run.min_value < 0) std::cerr << "warning: negative values reached " << format_number(run.min_value) << '\n';
    return 0;
}

int pde_threshold(const PdeArgs& a, const std::string& invocation) {
    const Loaded in = load(a.model);
    if (a.param.empty() || a.values.empty()) throw ConfigError("threshold needs --param and --values");
    const Grid1D grid(a.cells);
    warn_resolution(grid, in.params);
    ThresholdSettings s;
    if (!a.amplitudes.empty()) s.amplitudes = a.amplitudes;
    s.refine = a.refine;
    s.t_end = a.t_end;
    if (a.noise > 0) s.noise = a.noise;
    s.seed = a.seed;
    if (!a.perturb.empty()) s.window = parse_pair(a.perturb + ":0", "--perturb").first;
    s.jobs = a.jobs;
    const auto table = threshold_scan(in.model, in.params, a.param, a.values, grid, s);
    Table t;
    t.header = {a.param, "status", "noise_patterned", "threshold", "responses"};
    for (const auto& r : table.rows) {
        std::string resp;
        for (const auto& [amp, grew] : r.responses) resp += (resp.empty() ? "" : " ") + format_number(amp) + (grew ? ":x" : ":o");
        t.add_row({format_number(r.param), std::string(to_string(r.status)), r.noise_patterned ? "1" : "0",
                   r.threshold ? format_number(*r.threshold) : "", resp});
    }
    write_csv_file(a.out, t, invocation);
    ((a.out.empty() || a.out == "-") ? std::cerr : std::cout)
        << "thresholds " << (table.monotone ? "nondecreasing" : "not monotone") << '\n';
    return 0;
}

int pde_branch(const PdeArgs& a, const std::string& invocation) {
    const Loaded in = load(a.model);
    if (a.param.empty()) throw ConfigError("branch needs --param");
    const auto [lo, hi] = parse_range(a.range);
    const Grid1D grid(a.cells);
    warn_resolution(grid, in.params);
    PatternedBranchSettings s;
    s.start = a.start.value_or(in.params.get(a.param));
    if (!a.perturb.empty()) {
        const auto [window, amp] = parse_pair(a.perturb, "--perturb");
        s.perturbation.window = window;
        s.perturbation.amplitudes = Vector::Constant(static_cast<Eigen::Index>(in.model.slow_count()), amp);
    }
    s.perturbation.center = a.center;
    s.t_end = a.t_end;
    s.continuation.max_step = a.max_step;
    const auto pb = patterned_branch(in.model, in.params, a.param, lo, hi, grid, s);

    Table t;
    t.header = {"point", a.param, "amplitude", "stable"};
    for (std::size_t i = 0; i < pb.branch.points.size(); ++i) {
        t.add_row({std::to_string(i), format_number(pb.branch.points[i].alpha), format_number(pb.amplitude[i]),
                   pb.branch.points[i].stable ? "1" : "0"});
    }
    write_csv_file(a.out, t, invocation);

    json bifs = json::array();
    for (const auto& b : pb.branch.bifurcations) {
        bifs.push_back({{"kind", std::string(to_string(b.kind))}, {"param", b.alpha}});
    }
    json doc{{"model", in.model.name()}, {"param", a.param}, {"bifurcations", bifs},
             {"termination", std::string(to_string(pb.branch.termination))}, {"invocation", invocation}};
    doc["stable_reach"] = pb.stable_reach ? json(*pb.stable_reach) : json(nullptr);
    try {
        const auto edge = turing_edge(in.model, in.params, a.param, lo, hi, ModeSet::cosine(grid.size()));
        doc["turing_edge"] = edge.right;
    } catch (const NotApplicableError&) {
        doc["turing_edge"] = nullptr;
    }
    const std::string jpath = json_path_for(a.out, a.json_out);
    if (jpath.empty()) {
        std::cerr << doc.dump(2) << '\n';
    } else {
        write_json_file(jpath, doc);
    }
    return 0;
}

int pde_spike_check(const PdeArgs& a, const std::string&) {
    const ReactionModel model = schnakenberg();
    if (a.model.eps.empty() || a.model.d.empty()) throw ConfigError("spike-check needs --eps and --D");
    const double eps = a.model.eps.front();
    ParameterSet p = model.parameters_from({{"a", a.a}, {"b", a.b}, {"eps", eps}, {"D", a.model.d.front()}});
    const Grid1D grid(a.cells);
    warn_resolution(grid, p);
    const auto hss = solve_hss(model, p, model.default_seed());
    PerturbationSpec spec;
    spec.amplitudes = Vector::Constant(1, 2.0);
    spec.center = a.center;
    const auto run = simulate(model, p, grid, apply_perturbation(model, hss.state, grid, spec), a.t_end);
    const auto asym = spike_asymptotic(a.a, a.b, eps);
    const auto c = compare_spike(model, p, grid, run.state, asym);
    json doc{{"predicted_peak", asym.peak},   {"predicted_v", asym.v_level}, {"simulated_peak", c.simulated_peak},
             {"simulated_v", c.simulated_v},  {"v_variation", c.v_variation}, {"peak_error", c.peak_error},
             {"v_error", c.v_error},          {"note", c.note}};
    write_json_file(a.json_out.empty() ? a.out : a.json_out, doc);
    return 0;
}

// two-param

struct TwoParamArgs {
    ModelArgs model;
    std::string kind;
    std::string p1;
    std::string p2;
    std::string range;
    std::string p2_range;
    std::string out = "-";
    std::string json_out;
    double max_step = 0.05;
    std::uint64_t seed = 0;
};

int two_param(const TwoParamArgs& a, const std::string& invocation) {
    const Loaded in = load(a.model);
    const auto [lo, hi] = parse_range(a.range);
    const auto [blo, bhi] = parse_range(a.p2_range);
    const double beta0 = in.params.get(a.p2);
    const LpaSystem system(in.model);
    const auto diagram = compute_lpa_diagram(system, in.params, a.p1, diagram_settings(lo, hi, 0.02, 0.005, a.seed));
    const auto problem = lpa_two_parameter_problem(system, in.params, a.p1, a.p2);

    TwoParamSettings s;
    s.alpha_min = lo;
    s.alpha_max = hi;
    s.beta_min = blo;
    s.beta_max = bhi;
    s.continuation.max_step = a.max_step;
    s.continuation.initial_step = std::min(0.01, a.max_step);

    std::vector<TwoParamCurve> curves;
    // A seed already traced by an earlier curve is skipped.
    auto on_curve = [&](const Bifurcation& b) {
        for (const auto& x : crossings_at(curves, beta0)) {
            if (std::abs(x - b.alpha) <= 1e-4 * (1.0 + std::abs(b.alpha))) return true;
        }
        return false;
    };
    if (a.kind == "bp") {
        const auto seeds = diagram.global_bifurcations(BifurcationKind::BranchPoint);
        if (seeds.empty()) throw NotApplicableError("no branch point on the global branch over the range");
        for (const auto& b : seeds) {
            if (!on_curve(b)) curves.push_back(continue_branchpoint_2par(problem, b, beta0, s));
        }
    } else {
        const auto seeds = diagram.local_bifurcations(BifurcationKind::Fold);
        if (seeds.empty()) throw NotApplicableError("no fold on a local branch over the range");
        for (const auto& b : seeds) {
            if (!on_curve(b)) curves.push_back(continue_fold_2par(problem, b, beta0, s));
        }
    }

    Table t;
    t.header = {"curve", "point", a.p1, a.p2, "genuine", "unfolding"};
    json events = json::array();
    double beta_top = beta0, beta_bottom = beta0;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        for (std::size_t i = 0; i < curves[c].points.size(); ++i) {
            const auto& p = curves[c].points[i];
            t.add_row({std::to_string(c), std::to_string(i), format_number(p.alpha), format_number(p.beta),
                       p.genuine ? "1" : "0", format_number(p.unfolding)});
            beta_top = std::max(beta_top, p.beta);
            beta_bottom = std::min(beta_bottom, p.beta);
        }
        for (const auto& e : curves[c].events) {
            events.push_back({{"curve", c}, {"kind", e.kind}, {a.p1, e.alpha}, {a.p2, e.beta}});
        }
    }
    write_csv_file(a.out, t, invocation);
    json doc{{"model", in.model.name()}, {"kind", a.kind}, {"p1", a.p1}, {"p2", a.p2}, {"events", events},
             {"invocation", invocation}};
    if (a.kind == "fold") {
        doc["band_area"] = band_area(curves, beta_bottom, beta_top);
        doc["band_window"] = {beta_bottom, beta_top};
    }
    const std::string jpath = json_path_for(a.out, a.json_out);
    if (!jpath.empty()) write_json_file(jpath, doc);

    std::ostream& log = (a.out.empty() || a.out == "-") ? std::cerr : std::cout;
    for (const auto& e : events) {
        log << "curve " << e["curve"].get<std::size_t>() << ": " << e["kind"].get<std::string>() << " at " << a.p1
            << " = " << format_number(e[a.p1].get<double>()) << ", " << a.p2 << " = " << format_number(e[a.p2].get<double>())
            << '\n';
    }
    if (doc.contains("band_area")) log << "band area " << format_number(doc["band_area"].get<double>()) << '\n';
    return 0;
}

std::string join_args(int argc, char** argv) {
    std::string s = "lpakit";
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.find_first_of(" \t\"'") != std::string::npos) arg = "'" + arg + "'";
        s += " " + arg;
    }
    return s;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Local perturbation analysis, linear stability and PDE experiments for reaction-diffusion models"};
    app.require_subcommand(1);
    const std::string invocation = join_args(argc, argv);
    std::function<int()> action;

    // models
    auto* models = app.add_subcommand("models", "list or describe models");
    models->require_subcommand(1);
    models->add_subcommand("list", "built-in models")->callback([&] { action = [] { models_list(); return 0; }; });
    std::string show_name;
    auto* show = models->add_subcommand("show", "variables, parameters and kinetics of a model");
    show->add_option("name", show_name, "built-in name or .json path")->required();
    show->callback([&] { action = [&] { models_show(show_name); return 0; }; });

    // lpa-branch
    LpaArgs lpa;
    auto* lb = app.add_subcommand("lpa-branch", "global and local LPA branches over a parameter range");
    add_model_options(lb, lpa.model);
    lb->add_option("--param", lpa.param, "continuation parameter")->required();
    lb->add_option("--range", lpa.range, "LO:HI")->required();
    lb->add_option("--out", lpa.out, "branch CSV (default stdout)");
    lb->add_option("--json", lpa.json_out, "bifurcation JSON (default: --out with .json)");
    lb->add_option("--max-step", lpa.max_step, "largest arclength step")->check(CLI::PositiveNumber);
    lb->add_option("--initial-step", lpa.initial_step, "first arclength step")->check(CLI::PositiveNumber);
    lb->add_flag("--corrected", lpa.corrected, "include the first-order width correction");
    lb->add_option("--seed", lpa.seed, "seed for multi-start root finding");
    lb->callback([&] { action = [&] { return lpa_branch(lpa, invocation); }; });

    // lsa
    LsaArgs lsa;
    auto* ls = app.add_subcommand("lsa", "linear stability of the homogeneous steady state");
    ls->require_subcommand(1);
    auto lsa_common = [&](CLI::App* c) {
        add_model_options(c, lsa.model);
        c->add_option("--k", lsa.k, "single wavenumber");
        c->add_option("--kmax", lsa.kmax, "continuous wavenumbers in [0, kmax]");
        c->add_option("--modes", lsa.modes, "cosine modes n*pi/2 for n = 0..N (default)");
        c->add_option("--samples", lsa.samples, "wavenumber samples with --kmax");
        c->add_option("--hss-seed", lsa.seed, "starting guess for the steady state")->delimiter(',');
        c->add_option("--out", lsa.out, "CSV output (default stdout)");
    };
    auto* disp = ls->add_subcommand("dispersion", "eigenvalues of J - k^2 diag(D) per wavenumber");
    lsa_common(disp);
    disp->callback([&] { action = [&] { return lsa_dispersion(lsa, invocation); }; });
    auto* edge = ls->add_subcommand("edge", "parameter values where the steady state turns Turing unstable");
    lsa_common(edge);
    edge->add_option("--param", lsa.param, "parameter to scan")->required();
    edge->add_option("--range", lsa.range, "LO:HI")->required();
    edge->callback([&] { action = [&] { return lsa_edge(lsa, invocation); }; });
    auto* thm = ls->add_subcommand("theorem1", "slow eigenvalues against the shifted local block over eps x D");
    lsa_common(thm);
    thm->callback([&] { action = [&] { return lsa_theorem1(lsa, invocation); }; });
    auto* ger = ls->add_subcommand("gershgorin", "row disks of J_k by diffusion class");
    lsa_common(ger);
    ger->callback([&] { action = [&] { return lsa_gershgorin(lsa, invocation); }; });

    // pde
    PdeArgs pde;
    auto* pd = app.add_subcommand("pde", "reaction-diffusion simulations on [-1, 1]");
    pd->require_subcommand(1);
    auto pde_common = [&](CLI::App* c, bool with_model) {
        if (with_model) {
            add_model_options(c, pde.model);
        } else {
            c->add_option("--eps", pde.model.eps)->delimiter(',');
            c->add_option("--D", pde.model.d)->delimiter(',');
        }
        c->add_option("--cells", pde.cells, "grid cells")->check(CLI::Range(16, 100000));
        c->add_option("--tend", pde.t_end, "final time")->check(CLI::PositiveNumber);
        c->add_option("--center", pde.center, "perturbation window centre in [-1, 1]");
        c->add_option("--out", pde.out, "CSV output (default stdout)");
        c->add_option("--json", pde.json_out, "JSON output");
    };
    auto* sim = pd->add_subcommand("simulate", "integrate from the steady state, optionally perturbed");
    pde_common(sim, true);
    sim->add_option("--perturb", pde.perturb, "WINDOW:AMP top-hat offset on the slow variables");
    sim->add_option("--noise", pde.noise, "uniform noise amplitude on the slow variables");
    sim->add_option("--seed", pde.seed, "noise seed");
    sim->add_option("--sample-interval", pde.sample_interval, "record the field every this many time units");
    sim->add_option("--samples", pde.samples_out, "trajectory CSV");
    sim->callback([&] { action = [&] { return pde_simulate(pde, invocation); }; });
    auto* thr = pd->add_subcommand("threshold", "smallest patterning perturbation per parameter value");
    pde_common(thr, true);
    thr->add_option("--param", pde.param, "parameter to vary")->required();
    thr->add_option("--values", pde.values, "parameter values, comma separated")->delimiter(',')->required();
    thr->add_option("--amplitudes", pde.amplitudes, "perturbation amplitudes, ascending")->delimiter(',');
    thr->add_option("--perturb", pde.perturb, "WINDOW: width of the perturbed window");
    thr->add_option("--refine", pde.refine, "bisection steps on each threshold");
    thr->add_option("--noise", pde.noise, "noise amplitude for unstable states");
    thr->add_option("--seed", pde.seed, "noise seed");
    thr->add_option("--jobs", pde.jobs, "concurrent simulations (default LPAKIT_JOBS or 1)");
    thr->callback([&] { action = [&] { return pde_threshold(pde, invocation); }; });
    auto* br = pd->add_subcommand("branch", "continue a simulated pattern as a discretized steady state");
    pde_common(br, true);
    br->add_option("--param", pde.param, "continuation parameter")->required();
    br->add_option("--range", pde.range, "LO:HI")->required();
    br->add_option("--start", pde.start, "parameter value of the seeding simulation");
    br->add_option("--perturb", pde.perturb, "WINDOW:AMP seeding perturbation");
    br->add_option("--max-step", pde.max_step, "largest arclength step")->check(CLI::PositiveNumber);
    br->callback([&] { action = [&] { return pde_branch(pde, invocation); }; });
    auto* sc = pd->add_subcommand("spike-check", "Schnakenberg spike against its small-eps asymptotics");
    pde_common(sc, false);
    sc->add_option("--a", pde.a);
    sc->add_option("--b", pde.b);
    sc->callback([&] { action = [&] { return pde_spike_check(pde, invocation); }; });

    // two-param
    TwoParamArgs tp;
    auto* two = app.add_subcommand("two-param", "continue LPA branch points or folds in two parameters");
    add_model_options(two, tp.model, false);
    two->add_option("--kind", tp.kind)->required()->check(CLI::IsMember({"fold", "bp"}));
    two->add_option("--p1", tp.p1, "parameter of the seeding one-parameter run")->required();
    two->add_option("--p2", tp.p2, "second parameter")->required();
    two->add_option("--range", tp.range, "LO:HI for p1")->required();
    two->add_option("--p2-range", tp.p2_range, "LO:HI for p2")->required();
    two->add_option("--max-step", tp.max_step, "largest arclength step")->check(CLI::PositiveNumber);
    two->add_option("--seed", tp.seed, "seed for multi-start root finding");
    two->add_option("--out", tp.out, "curve CSV (default stdout)");
    two->add_option("--json", tp.json_out, "event JSON (default: --out with .json)");
    two->callback([&] { action = [&] { return two_param(tp, invocation); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return action ? action() : 2;
    } catch (const NotApplicableError& e) {
        std::cerr << "not applicable: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const expr::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace lpakit
