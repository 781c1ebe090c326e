#pragma once

#include "toposd/functionals.hpp"
#include "toposd/geometry.hpp"
#include "toposd/mesh.hpp"
#include "toposd/pde.hpp"
#include "toposd/problem.hpp"
#include "toposd/rates.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toposd {

struct MeshPolicy {
    HoldAll holdall = HoldAll::square;
    /// Cells per side (square) or rings (disk).
    int n = 32;
    int refinements = 0;
};

/// One functional term as written in the config (constant u_ref).
struct FunctionalEntry {
    FunctionalTerm::Kind kind = FunctionalTerm::Kind::l2_tracking;
    double coefficient = 1.0;
    double u_ref = 0.0;
    double r = 4.0;
};

struct RunConfig {
    ProblemSpec problem;
    MeshPolicy mesh;
    std::vector<Shape> omega;
    std::optional<InclusionSeed> seed;

    /// [rate]
    std::vector<double> eps{0.2, 0.14, 0.1, 0.07, 0.05};
    NormSpec::Kind norm = NormSpec::Kind::lp;
    double p = 2.0;
    std::optional<RateCase> rate_case;
    double puncture = 0.0;
    double tolerance = 0.15;

    /// [state_derivative]
    std::vector<std::string> sd_routes{"measure"};
    std::optional<double> quotient_eps;
    std::string reference = "none";

    /// [functional]
    std::vector<FunctionalEntry> functional{FunctionalEntry{}};
    std::vector<std::string> topo_routes{"adjoint", "chain"};
    std::vector<double> fd_eps{0.1, 0.07};

    /// [solver]
    NumericOptions numeric;
    int threads = 1;

    /// [smoke] overrides applied by --smoke.
    std::optional<int> smoke_n;
    std::optional<std::vector<double>> smoke_eps, smoke_fd_eps;
    std::optional<double> smoke_quotient_eps;

    Region region() const;
    FunctionalSpec functional_spec() const;
    /// Resolution one uniform refinement below: halves n unless [smoke] sets it.
    RunConfig smoke() const;
};

/// Parses and validates; errors are ValidationError naming the line or the field.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);

/// Canonical text: every key with its resolved value, sections and keys sorted.
std::string print_config(const RunConfig &c);
/// SHA-256 hex digest of the canonical text.
std::string config_hash(const RunConfig &c);

std::string sha256_hex(const std::string &bytes);

MeshPtr build_mesh(const MeshPolicy &policy);

} // namespace toposd
