#pragma once

// Linear stability of the homogeneous steady state against spatial modes
// cos(kx) on [-1, 1] with no-flux boundaries.

#include <lpakit/model.hpp>
#include <lpakit/numerics.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lpakit {

/// J - k^2 diag(diffusivities), diffusivities taken from hss.params.
Matrix jacobian_k(const ReactionModel& model, const HomogeneousSteadyState& hss, double k);
Matrix jacobian_k(const Matrix& j0, const Vector& diffusivities, double k);

/// Copy of `p` with the slow width `eps` and fast diffusivity `D` set,
/// when the model has parameters of those names.
ParameterSet with_eps_d(const ParameterSet& p, std::optional<double> eps, std::optional<double> d);

/// Wavenumbers to test.
struct ModeSet {
    std::vector<double> ks;

    /// k = n*pi/2 for n = 0..n_max: the no-flux modes cos(n*pi*(x+1)/2) of [-1, 1].
    static ModeSet cosine(int n_max = 40);
    static ModeSet single(double k);
    /// Evenly spaced k in [0, k_max].
    static ModeSet continuous(double k_max, int samples = 401);
};

struct DispersionMode {
    double k = 0.0;
    std::vector<Complex> eigenvalues;  // decreasing real part
};

struct DispersionResult {
    std::vector<DispersionMode> modes;
    double max_growth = 0.0;  // max over modes of Re of the leading eigenvalue
    double argmax_k = 0.0;
};

DispersionResult dispersion(const ReactionModel& model, const HomogeneousSteadyState& hss, const ModeSet& modes);

struct TuringEdgeSettings {
    int samples = 200;      // coarse scan before bisection
    double tol = 1e-4;
    std::optional<Vector> seed;
};

struct TuringEdges {
    double right = 0.0;          // largest crossing
    std::vector<double> all;     // every crossing, increasing
};

/// Crossings of max_growth through zero as `param` varies over [lo, hi].
/// Throws NotApplicableError when there is none.
TuringEdges turing_edge(const ReactionModel& model, const ParameterSet& params, const std::string& param, double lo,
                        double hi, const ModeSet& modes, const TuringEdgeSettings& settings = {});

struct Disk {
    Complex center;
    double radius = 0.0;
};

struct GershgorinReport {
    std::vector<Disk> disks;
    bool separated = false;  // slow and fast disk unions are disjoint
    bool contained = false;  // every eigenvalue lies in the union
};

/// Row disks. The first `slow_count` rows form the slow class.
GershgorinReport gershgorin_disks(const Matrix& a, std::size_t slow_count);

struct TheoremOneRow {
    double eps = 0.0;
    double d = 0.0;
    bool separated = false;
    std::vector<Complex> slow;   // eigenvalues in slow disks
    std::vector<Complex> fast;   // eigenvalues in fast disks
    std::vector<double> deviation;   // |lambda_i - (lambda_LP_i - k^2 eps_i)| per slow eigenvalue
    std::vector<double> fast_ratio;  // Re(lambda) / (-k^2 D_j) per fast eigenvalue
    std::string note;
};

struct TheoremOneReport {
    double k = 0.0;
    std::vector<TheoremOneRow> rows;
};

/// For each (eps, D) pair compares the slow eigenvalues of J_k with
/// eig(f_u - k^2 diag(slow diffusivities)), the local block of the LPA
/// Jacobian shifted by the mode. Parameters are taken from hss.params with
/// eps and D overridden; the steady state is recomputed only if it depends
/// on them.
TheoremOneReport theorem1_check(const ReactionModel& model, const HomogeneousSteadyState& hss, double k,
                                const std::vector<double>& eps_list, const std::vector<double>& d_list);

}  // namespace lpakit
