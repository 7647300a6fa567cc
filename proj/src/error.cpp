#include "lowdim/error.hpp"

namespace lowdim {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::MalformedShape: return "MalformedShape";
        case ErrorKind::TripleIntersection: return "TripleIntersection";
        case ErrorKind::NonTransversal: return "NonTransversal";
        case ErrorKind::MeshQualityFailure: return "MeshQualityFailure";
        case ErrorKind::JunctionResolutionFailure: return "JunctionResolutionFailure";
        case ErrorKind::JunctionMismatch: return "JunctionMismatch";
        case ErrorKind::NonElliptic: return "NonElliptic";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::IncompatibleRHS: return "IncompatibleRHS";
        case ErrorKind::IncompatibleData: return "IncompatibleData";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::RootNotBracketed: return "RootNotBracketed";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ScenarioError: return "ScenarioError";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + " [" + module + "]: " + message),
      kind_(kind),
      module_(std::move(module)) {}

}  // namespace lowdim
