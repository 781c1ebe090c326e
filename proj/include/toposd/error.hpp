#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toposd {

enum class ErrorKind {
    Validation,
    PointOutsideMesh,
    EpsilonTooLarge,
    SeedStraddlesBoundary,
    UnsupportedSeed,
    NegativeWeight,
    NoConvergence,
    NewtonStalled,
    PatchTouchesInterface,
    OriginSingularity,
    QuadratureFailure,
    MeshTooCoarse,
    InadmissibleRoute,
    UnsupportedCase,
    DegenerateFit,
};

constexpr std::string_view error_name(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::PointOutsideMesh: return "PointOutsideMesh";
    case ErrorKind::EpsilonTooLarge: return "EpsilonTooLarge";
    case ErrorKind::SeedStraddlesBoundary: return "SeedStraddlesBoundary";
    case ErrorKind::UnsupportedSeed: return "UnsupportedSeed";
    case ErrorKind::NegativeWeight: return "NegativeWeight";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NewtonStalled: return "NewtonStalled";
    case ErrorKind::PatchTouchesInterface: return "PatchTouchesInterface";
    case ErrorKind::OriginSingularity: return "OriginSingularity";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::MeshTooCoarse: return "MeshTooCoarse";
    case ErrorKind::InadmissibleRoute: return "InadmissibleRoute";
    case ErrorKind::UnsupportedCase: return "UnsupportedCase";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    }
    return "Unknown";
}

/// Process exit code for the command-line front end.
/// 2 = invalid input, 3 = numerical failure, 4 = unsupported case.
constexpr int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::EpsilonTooLarge:
    case ErrorKind::SeedStraddlesBoundary:
    case ErrorKind::MeshTooCoarse:
        return 2;
    case ErrorKind::UnsupportedSeed:
    case ErrorKind::InadmissibleRoute:
    case ErrorKind::UnsupportedCase:
        return 4;
    default:
        return 3;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what)
        : std::runtime_error(std::string(error_name(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return error_name(kind_); }

private:
    ErrorKind kind_;
};

} // namespace toposd
