#pragma once

// One-parameter LPA bifurcation diagram: the global branch, every local
// branch reachable by branch switching or found by multi-start root
// finding, and the resulting partition of the parameter range.

#include <lpakit/continuation.hpp>
#include <lpakit/lpa.hpp>

#include <optional>
#include <string>
#include <vector>

namespace lpakit {

enum class RegionKind { Stable, Nonlinear, Unstable };
std::string_view to_string(RegionKind k);

struct Region {
    double lo = 0.0;
    double hi = 0.0;
    RegionKind kind = RegionKind::Stable;
    bool global_stable = true;
    int local_states = 0;  // local steady states at the region midpoint
};

struct LabeledBranch {
    std::string label;  // "global", "local1", ...
    Branch branch;
};

struct LpaDiagramSettings {
    double lo = 0.0;
    double hi = 1.0;
    ContinuationSettings continuation;  // alpha bounds and scales are filled in from lo/hi
    bool auto_scale = true;             // scale arclength by the range width and state magnitudes
    int isolated_samples = 12;          // parameter samples searched for branches not attached to a BP
    int random_starts = 12;
    /// Isolated local states with a component beyond this multiple of the
    /// largest steady-state magnitude in the range are ignored; 0 disables.
    double isolated_bound = 10.0;
    std::uint64_t seed = 0;
    double switch_offset = 1e-2;
    std::optional<Vector> hss_seed;     // well-mixed seed; model default otherwise
};

struct LpaDiagram {
    std::string param;
    std::vector<LabeledBranch> branches;  // branches[0] is the global branch
    std::vector<Region> regions;

    const Branch& global() const { return branches.front().branch; }
    /// Bifurcations of a given kind on the global or on the local branches.
    std::vector<Bifurcation> global_bifurcations(BifurcationKind kind) const;
    std::vector<Bifurcation> local_bifurcations(BifurcationKind kind) const;
};

/// Throws NotApplicableError if no homogeneous steady state is found in
/// the range.
LpaDiagram compute_lpa_diagram(const LpaSystem& system, const ParameterSet& params, const std::string& param,
                               const LpaDiagramSettings& settings);

}  // namespace lpakit
