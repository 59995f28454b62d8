#pragma once

#include "fha/automaton.hpp"
#include "fha/flat.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fha {

/// Continuous-state transition map x' = A x + B z of one transition.  The
/// row count is the tail state's dimension, so jumps may change nx.
struct JumpMap {
    std::size_t in_dim = 0;
    std::size_t z_dim = 0;
    std::vector<Vector> a;  // out_dim rows of in_dim entries
    std::vector<Vector> b;  // out_dim rows of z_dim entries

    [[nodiscard]] static JumpMap identity(std::size_t nx, std::size_t nz);
    [[nodiscard]] std::size_t out_dim() const { return a.size(); }
    [[nodiscard]] Vector apply(const Vector& x, const Vector& z) const;
};

struct InitialCondition {
    StateId state;
    Vector x0;
    /// Flat output at t = 0; also seeds components x does not determine.
    Vector outputs;
};

using ParameterMap = std::map<std::string, double>;

struct ModelDefinition {
    std::string family;
    ParameterMap parameters;
    Automaton automaton;
    /// Indexed by state id.
    std::vector<FlatMaps> flat;
    /// Indexed by transition id.
    std::vector<JumpMap> jumps;
    InitialCondition initial;
    std::vector<std::string> input_names;
    std::vector<std::string> output_names;
    /// Region of interest for sampling and certificates.
    Box nominal_outputs;
    /// Per output component, the unit the switching margin is scaled by.
    Vector margin_scale;
    std::map<std::string, std::string> units;

    [[nodiscard]] const FlatMaps& maps(StateId d) const { return flat.at(d.value); }
    [[nodiscard]] const JumpMap& jump(TransitionId e) const { return jumps.at(e.value); }
};

struct OneTankParams {
    double l0 = 5.0;
    double c_out = 0.5;
    double c_v1 = 0.8;
    double c_ovf = 0.2;
    double l1_0 = 0.8;
};

struct DcNetworkParams {
    double R = 5.0;
    double C = 0.8;
    double L = 7.0;
    double R_L1 = 2.0;
    double R_L2 = 3.0;
    double v0 = 6.0;
    double i0 = 0.5;
    double v_L1_0 = 0.5;
    double i_L2_0 = 0.1;
};

/// Single tank with an outlet valve v1 and an overflow at level l0.  States
/// d1..d4 are (closed, below), (open, below), (closed, above), (open, above).
[[nodiscard]] ModelDefinition one_tank(const OneTankParams& p = {});

/// DC network with switches v1, v2.  States d1..d4 carry (v1, v2) =
/// (0,0), (1,0), (0,1), (1,1); flat outputs are v_L1 and i_L2.
[[nodiscard]] ModelDefinition dc_network(const DcNetworkParams& p = {});

/// Registered family names.
[[nodiscard]] std::vector<std::string> model_families();

/// Input and output layout shared by every model of a family.
struct FamilyShape {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    Box output_domain;
};

/// Throws ModelError for unknown names.
[[nodiscard]] FamilyShape family_shape(const std::string& family);

/// Default parameters of a family.  Throws ModelError for unknown names.
[[nodiscard]] ParameterMap default_parameters(const std::string& family);

/// Built-in model of a family with some parameters overridden.  Throws
/// ModelError for unknown families, unknown parameter names or invalid
/// values.
[[nodiscard]] ModelDefinition build_model(const std::string& family, const ParameterMap& overrides = {});

/// Attaches a family's dynamics to an arbitrary automaton.  Each state gets
/// the flat maps selected by its invariant sets; each transition gets the
/// jump between its head and tail blocks.
[[nodiscard]] ModelDefinition attach_dynamics(const std::string& family, const ParameterMap& parameters,
                                              Automaton automaton, std::vector<std::string> input_names,
                                              std::vector<std::string> output_names,
                                              std::optional<InitialCondition> initial = std::nullopt);

/// Same structure, new parameter values.
[[nodiscard]] ModelDefinition with_parameters(const ModelDefinition& m, const ParameterMap& overrides);

/// Closed box inside a state's continuous invariant and the model's nominal
/// region, used to draw sample flat outputs.  Open ends are pulled inwards.
[[nodiscard]] Box sampling_box(const ModelDefinition& m, StateId d);

inline constexpr std::uint64_t kDefaultValidationSeed = 0x5eed;

struct StateCheck {
    StateId state;
    bool square = false;
    std::map<std::size_t, bool> invariant_inputs;
    std::string invariant_outputs;
    double residual = 0.0;
    std::string error;
};

struct ValidationReport {
    bool strongly_connected = false;
    std::vector<DeterminismConflict> conflicts;
    std::vector<std::string> guard_errors;
    std::vector<std::string> jump_errors;
    std::vector<StateCheck> states;
    double residual_tolerance = 1e-6;

    [[nodiscard]] bool deterministic() const { return conflicts.empty(); }
    [[nodiscard]] bool passed() const;
};

/// Construction checklist: connectivity, determinism, invertible guards,
/// invariant sets, nz = nu, flatness residuals on seeded segments and jump
/// dimensions.  State d draws its segments from a generator seeded with
/// seed + d.
[[nodiscard]] ValidationReport validate_fha(const ModelDefinition& m, std::uint64_t seed = kDefaultValidationSeed);

/// Multi-line plain-text rendering of a report.
[[nodiscard]] std::string format_report(const ValidationReport& r, const ModelDefinition& m);

}  // namespace fha
