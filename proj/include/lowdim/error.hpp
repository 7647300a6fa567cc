#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lowdim {

enum class ErrorKind {
    MalformedShape,
    TripleIntersection,
    NonTransversal,
    MeshQualityFailure,
    JunctionResolutionFailure,
    JunctionMismatch,
    NonElliptic,
    NoConvergence,
    IncompatibleRHS,
    IncompatibleData,
    DomainError,
    RootNotBracketed,
    ParseError,
    ScenarioError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

/// Exception type used across the library. Carries the failing module so the
/// CLI can report provenance.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

}  // namespace lowdim
