#include <lpakit/builtin_models.hpp>

#include <array>
#include <cmath>

namespace lpakit {

namespace {

// x^n for a real exponent, by repeated multiplication when n is a small
// integer so negative transients stay finite.
double ipow(double x, double n) {
    if (n == std::floor(n) && std::abs(n) <= 64.0) {
        auto k = static_cast<int>(std::abs(n));
        double r = 1.0, b = x;
        while (k > 0) {
            if (k & 1) r *= b;
            b *= b;
            k >>= 1;
        }
        return n < 0 ? 1.0 / r : r;
    }
    return std::pow(x, n);
}

DiffusivityFn param_value(std::size_t i) {
    return [i](std::span<const double> p) { return p[i]; };
}

DiffusivityFn param_squared(std::size_t i) {
    return [i](std::span<const double> p) { return p[i] * p[i]; };
}

}  // namespace

ReactionModel schnakenberg() {
    enum { A, B, EPS, D };
    ModelDefinition def;
    def.name = "schnakenberg";
    def.description = "Schnakenberg activator-substrate model";
    def.variables = {{"u", DiffusionClass::Slow}, {"v", DiffusionClass::Fast}};
    def.parameters = {
        {"a", 1.0, "activator production"},
        {"b", 1.0, "substrate production"},
        {"eps", 0.05, "slow diffusion length scale (D_u = eps^2)"},
        {"D", 10.0, "fast diffusivity"},
    };
    def.kinetics = [](std::span<const double> x, std::span<const double> p, std::span<double> out) {
        const double u = x[0], v = x[1];
        const double uuv = u * u * v;
        out[0] = p[A] - u + uuv;
        out[1] = p[B] - uuv;
    };
    def.jacobian = [](std::span<const double> x, std::span<const double>, std::span<double> j) {
        const double u = x[0], v = x[1];
        j[0] = -1.0 + 2.0 * u * v;
        j[1] = u * u;
        j[2] = -2.0 * u * v;
        j[3] = -u * u;
    };
    def.diffusivity = {param_squared(EPS), param_value(D)};
    def.kinetics_text = {"a-u+u^2*v", "b-u^2*v"};
    def.diffusivity_text = {"eps^2", "D"};
    def.default_seed = {2.0, 0.25};
    return ReactionModel(std::move(def));
}

ReactionModel substrate_inhibition() {
    enum { A, ALPHA, B, RHO, K, EPS, D };
    ModelDefinition def;
    def.name = "substrate_inhibition";
    def.description = "Substrate inhibition model with two co-substrates";
    def.variables = {{"u", DiffusionClass::Slow}, {"v", DiffusionClass::Fast}};
    def.parameters = {
        {"a", 100.0, "production of u"},
        {"alpha", 1.5, "relative turnover of v"},
        {"b", 80.0, "production of v"},
        {"rho", 13.0, "enzymatic reaction rate"},
        {"K", 0.125, "substrate inhibition constant"},
        {"eps", 0.05, "slow diffusion length scale (D_u = eps^2)"},
        {"D", 10.0, "fast diffusivity"},
    };
    def.kinetics = [](std::span<const double> x, std::span<const double> p, std::span<double> out) {
        const double u = x[0], v = x[1];
        const double h = p[RHO] * u * v / (1.0 + u + p[K] * u * u);
        out[0] = p[A] - u - h;
        out[1] = p[ALPHA] * (p[B] - v) - h;
    };
    def.jacobian = [](std::span<const double> x, std::span<const double> p, std::span<double> j) {
        const double u = x[0], v = x[1];
        const double q = 1.0 + u + p[K] * u * u;
        const double h_u = p[RHO] * v * (1.0 - p[K] * u * u) / (q * q);
        const double h_v = p[RHO] * u / q;
        j[0] = -1.0 - h_u;
        j[1] = -h_v;
        j[2] = -h_u;
        j[3] = -p[ALPHA] - h_v;
    };
    def.diffusivity = {param_squared(EPS), param_value(D)};
    def.kinetics_text = {"a-u-rho*u*v/(1+u+K*u^2)", "alpha*(b-v)-rho*u*v/(1+u+K*u^2)"};
    def.diffusivity_text = {"eps^2", "D"};
    def.default_seed = {10.0, 10.0};
    return ReactionModel(std::move(def));
}

ReactionModel gtpase_pi(PiClass pi_class) {
    enum {
        C_T, R_T, RHO_T, I_C, I_R1, I_R2, I_RHO, A1, A2, A3, N, ALPHA, DELTA_C, DELTA_R, DELTA_RHO,
        I_P1, DELTA_P1, K_PI5K, K_PI3K, K_PTEN, K21, P3B, DM, DC, DP, L0, F2, PARAM_COUNT
    };
    // Positions of each species in the state vector.
    struct Layout {
        std::size_t C, R, rho, P1, P2, P3, Cc, Rc, rhoc;
    };
    const Layout L = pi_class == PiClass::Slow ? Layout{0, 1, 2, 3, 4, 5, 6, 7, 8} : Layout{0, 1, 2, 6, 7, 8, 3, 4, 5};

    ModelDefinition def;
    def.name = "gtpase_pi";
    def.description = pi_class == PiClass::Slow
                          ? "Cdc42/Rac/Rho and phosphoinositide network (phosphoinositides slow)"
                          : "Cdc42/Rac/Rho and phosphoinositide network (phosphoinositides fast)";
    std::array<Variable, 9> vars;
    const auto slow = DiffusionClass::Slow, fast = DiffusionClass::Fast;
    const auto pi = pi_class == PiClass::Slow ? slow : fast;
    vars[L.C] = {"C", slow};
    vars[L.R] = {"R", slow};
    vars[L.rho] = {"rho", slow};
    vars[L.P1] = {"P1", pi};
    vars[L.P2] = {"P2", pi};
    vars[L.P3] = {"P3", pi};
    vars[L.Cc] = {"C_c", fast};
    vars[L.Rc] = {"R_c", fast};
    vars[L.rhoc] = {"rho_c", fast};
    def.variables.assign(vars.begin(), vars.end());

    def.parameters = {
        {"C_t", 2.4, "total Cdc42"},
        {"R_t", 7.5, "total Rac"},
        {"rho_t", 3.1, "total Rho"},
        {"I_C", 2.95, "Cdc42 activation rate"},
        {"I_R1", 0.2, "basal Rac activation rate"},
        {"I_R2", 0.2, "PIP3 dependent Rac activation rate"},
        {"I_rho", 6.6, "Rho activation rate"},
        {"a1", 1.25, "Rho level for half-max inhibition of Cdc42"},
        {"a2", 1.0, "Rac level for half-max inhibition of Rho"},
        {"a3", 1.25, "Rho level for half-max inhibition of Rac"},
        {"n", 3.0, "Hill coefficient"},
        {"alpha", 0.55, "Cdc42 dependent Rac activation"},
        {"delta_C", 1.0, "Cdc42 inactivation rate"},
        {"delta_R", 1.0, "Rac inactivation rate"},
        {"delta_rho", 1.0, "Rho inactivation rate"},
        {"I_P1", 10.5, "PIP1 input rate"},
        {"delta_P1", 0.21, "PIP1 decay rate"},
        {"k_PI5K", 0.084, "PI5K conversion rate"},
        {"k_PI3K", 0.00072, "PI3K conversion rate"},
        {"k_PTEN", 0.432, "PTEN conversion rate"},
        {"k21", 0.021, "PIP2 to PIP1 conversion rate"},
        {"P3b", 0.15, "typical PIP3 level"},
        {"Dm", 0.1, "membrane diffusivity (um^2/s)"},
        {"Dc", 50.0, "cytosolic diffusivity (um^2/s)"},
        {"DP", 5.0, "phosphoinositide diffusivity (um^2/s)"},
        {"L0", 20.0, "domain length (um)"},
        {"f2", 1.0, "strength of Rho to Rac inhibition"},
    };

    def.kinetics = [L](std::span<const double> x, std::span<const double> p, std::span<double> out) {
        const double C = x[L.C], R = x[L.R], rho = x[L.rho];
        const double P1 = x[L.P1], P2 = x[L.P2], P3 = x[L.P3];
        const double Cc = x[L.Cc], Rc = x[L.Rc], rhoc = x[L.rhoc];
        const double n = p[N];
        const double i_c = p[I_C] / (1.0 + ipow(rho / p[A1], n));
        const double i_r = p[I_R1] + (p[ALPHA] * C + p[I_R2] * P3 / p[P3B]) / (1.0 + p[F2] * ipow(rho / p[A3], n));
        const double i_rho = p[I_RHO] / (1.0 + ipow(R / p[A2], n));
        const double fc = i_c * Cc / p[C_T] - p[DELTA_C] * C;
        const double fr = i_r * Rc / p[R_T] - p[DELTA_R] * R;
        const double frho = i_rho * rhoc / p[RHO_T] - p[DELTA_RHO] * rho;
        const double pi3k = 0.5 * p[K_PI3K] * (1.0 + R / p[R_T]);
        const double pi5k = 0.5 * p[K_PI5K] * (1.0 + R / p[R_T]);
        const double pten = 0.5 * p[K_PTEN] * (1.0 + rho / p[RHO_T]);
        out[L.C] = fc;
        out[L.R] = fr;
        out[L.rho] = frho;
        out[L.Cc] = -fc;
        out[L.Rc] = -fr;
        out[L.rhoc] = -frho;
        out[L.P1] = p[I_P1] - p[DELTA_P1] * P1 + p[K21] * P2 - pi5k * P1;
        out[L.P2] = -p[K21] * P2 + pi5k * P1 - pi3k * P2 + pten * P3;
        out[L.P3] = pi3k * P2 - pten * P3;
    };

    def.jacobian = [L](std::span<const double> x, std::span<const double> p, std::span<double> j) {
        std::fill(j.begin(), j.end(), 0.0);
        auto at = [&](std::size_t row, std::size_t col) -> double& { return j[row * 9 + col]; };
        const double C = x[L.C], R = x[L.R], rho = x[L.rho];
        const double P1 = x[L.P1], P2 = x[L.P2], P3 = x[L.P3];
        const double Cc = x[L.Cc], Rc = x[L.Rc], rhoc = x[L.rhoc];
        const double n = p[N];

        const double h1 = ipow(rho / p[A1], n);
        const double dh1 = n / p[A1] * ipow(rho / p[A1], n - 1);
        const double i_c = p[I_C] / (1.0 + h1);
        const double di_c = -p[I_C] * dh1 / ((1.0 + h1) * (1.0 + h1));

        const double h3 = ipow(rho / p[A3], n);
        const double dh3 = n / p[A3] * ipow(rho / p[A3], n - 1);
        const double den = 1.0 + p[F2] * h3;
        const double num = p[ALPHA] * C + p[I_R2] * P3 / p[P3B];
        const double i_r = p[I_R1] + num / den;

        const double h2 = ipow(R / p[A2], n);
        const double dh2 = n / p[A2] * ipow(R / p[A2], n - 1);
        const double i_rho = p[I_RHO] / (1.0 + h2);
        const double di_rho = -p[I_RHO] * dh2 / ((1.0 + h2) * (1.0 + h2));

        // Membrane rows; cytosolic rows are their negatives.
        at(L.C, L.C) = -p[DELTA_C];
        at(L.C, L.Cc) = i_c / p[C_T];
        at(L.C, L.rho) = Cc / p[C_T] * di_c;

        at(L.R, L.R) = -p[DELTA_R];
        at(L.R, L.Rc) = i_r / p[R_T];
        at(L.R, L.C) = Rc / p[R_T] * p[ALPHA] / den;
        at(L.R, L.P3) = Rc / p[R_T] * (p[I_R2] / p[P3B]) / den;
        at(L.R, L.rho) = -Rc / p[R_T] * num * p[F2] * dh3 / (den * den);

        at(L.rho, L.rho) = -p[DELTA_RHO];
        at(L.rho, L.rhoc) = i_rho / p[RHO_T];
        at(L.rho, L.R) = rhoc / p[RHO_T] * di_rho;

        for (auto [mem, cyt] : {std::pair{L.C, L.Cc}, std::pair{L.R, L.Rc}, std::pair{L.rho, L.rhoc}}) {
            for (std::size_t col = 0; col < 9; ++col) at(cyt, col) = -at(mem, col);
        }

        const double pi3k = 0.5 * p[K_PI3K] * (1.0 + R / p[R_T]);
        const double pi5k = 0.5 * p[K_PI5K] * (1.0 + R / p[R_T]);
        const double pten = 0.5 * p[K_PTEN] * (1.0 + rho / p[RHO_T]);
        const double dpi3k = 0.5 * p[K_PI3K] / p[R_T];
        const double dpi5k = 0.5 * p[K_PI5K] / p[R_T];
        const double dpten = 0.5 * p[K_PTEN] / p[RHO_T];

        at(L.P1, L.P1) = -p[DELTA_P1] - pi5k;
        at(L.P1, L.P2) = p[K21];
        at(L.P1, L.R) = -dpi5k * P1;

        at(L.P2, L.P1) = pi5k;
        at(L.P2, L.P2) = -p[K21] - pi3k;
        at(L.P2, L.P3) = pten;
        at(L.P2, L.R) = dpi5k * P1 - dpi3k * P2;
        at(L.P2, L.rho) = dpten * P3;

        at(L.P3, L.P2) = pi3k;
        at(L.P3, L.P3) = -pten;
        at(L.P3, L.R) = dpi3k * P2;
        at(L.P3, L.rho) = -dpten * P3;
    };

    auto rescaled = [](std::size_t d) {
        return [d](std::span<const double> p) {
            const double half = 0.5 * p[L0];
            return p[d] / (half * half);
        };
    };
    def.diffusivity.resize(9);
    def.diffusivity_text.resize(9);
    for (std::size_t i : {L.C, L.R, L.rho}) {
        def.diffusivity[i] = rescaled(DM);
        def.diffusivity_text[i] = "Dm/(L0/2)^2";
    }
    for (std::size_t i : {L.P1, L.P2, L.P3}) {
        def.diffusivity[i] = rescaled(DP);
        def.diffusivity_text[i] = "DP/(L0/2)^2";
    }
    for (std::size_t i : {L.Cc, L.Rc, L.rhoc}) {
        def.diffusivity[i] = rescaled(DC);
        def.diffusivity_text[i] = "Dc/(L0/2)^2";
    }

    def.kinetics_text.resize(9);
    def.kinetics_text[L.C] = "I_C/(1+(rho/a1)^n)*C_c/C_t-delta_C*C";
    def.kinetics_text[L.R] = "(I_R1+(alpha*C+I_R2*P3/P3b)/(1+f2*(rho/a3)^n))*R_c/R_t-delta_R*R";
    def.kinetics_text[L.rho] = "I_rho/(1+(R/a2)^n)*rho_c/rho_t-delta_rho*rho";
    def.kinetics_text[L.Cc] = "-(I_C/(1+(rho/a1)^n)*C_c/C_t-delta_C*C)";
    def.kinetics_text[L.Rc] = "-((I_R1+(alpha*C+I_R2*P3/P3b)/(1+f2*(rho/a3)^n))*R_c/R_t-delta_R*R)";
    def.kinetics_text[L.rhoc] = "-(I_rho/(1+(R/a2)^n)*rho_c/rho_t-delta_rho*rho)";
    def.kinetics_text[L.P1] = "I_P1-delta_P1*P1+k21*P2-k_PI5K/2*(1+R/R_t)*P1";
    def.kinetics_text[L.P2] =
        "-k21*P2+k_PI5K/2*(1+R/R_t)*P1-k_PI3K/2*(1+R/R_t)*P2+k_PTEN/2*(1+rho/rho_t)*P3";
    def.kinetics_text[L.P3] = "k_PI3K/2*(1+R/R_t)*P2-k_PTEN/2*(1+rho/rho_t)*P3";

    def.conservation = {
        {{{L.C, 1.0}, {L.Cc, 1.0}}, "C_t", L.Cc},
        {{{L.R, 1.0}, {L.Rc, 1.0}}, "R_t", L.Rc},
        {{{L.rho, 1.0}, {L.rhoc, 1.0}}, "rho_t", L.rhoc},
    };

    std::vector<double> seed(9);
    seed[L.C] = 1.0;
    seed[L.R] = 1.0;
    seed[L.rho] = 1.5;
    seed[L.Cc] = 1.4;
    seed[L.Rc] = 6.5;
    seed[L.rhoc] = 1.6;
    seed[L.P1] = 40.0;
    seed[L.P2] = 50.0;
    seed[L.P3] = 0.1;
    def.default_seed = std::move(seed);
    static_assert(PARAM_COUNT == 27);
    return ReactionModel(std::move(def));
}

std::vector<std::string> builtin_names() { return {"schnakenberg", "substrate_inhibition", "gtpase_pi"}; }

ReactionModel builtin(std::string_view name) {
    if (name == "schnakenberg") return schnakenberg();
    if (name == "substrate_inhibition") return substrate_inhibition();
    if (name == "gtpase_pi") return gtpase_pi();
    std::string msg = "unknown model '" + std::string(name) + "'; available:";
    for (const auto& n : builtin_names()) msg += " " + n;
    throw ConfigError(msg);
}

}  // namespace lpakit
