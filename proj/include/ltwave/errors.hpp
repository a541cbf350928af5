#pragma once

#include <stdexcept>
#include <string>

namespace ltwave {

struct IncompatibleRHS : std::runtime_error {
    explicit IncompatibleRHS(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : std::runtime_error {
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateGroundState : std::runtime_error {
    explicit DegenerateGroundState(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

struct IllPosedSymbol : std::runtime_error {
    explicit IllPosedSymbol(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientTimeDerivatives : std::runtime_error {
    explicit InsufficientTimeDerivatives(const std::string& what) : std::runtime_error(what) {}
};

struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct CFLViolation : std::runtime_error {
    explicit CFLViolation(const std::string& what) : std::runtime_error(what) {}
};

struct NonCommensurate : std::runtime_error {
    explicit NonCommensurate(const std::string& what) : std::runtime_error(what) {}
};

struct NonDivergenceFree : std::runtime_error {
    explicit NonDivergenceFree(const std::string& what) : std::runtime_error(what) {}
};

struct SymmetryViolation : std::runtime_error {
    explicit SymmetryViolation(const std::string& what) : std::runtime_error(what) {}
};

struct MissingCorrector : std::runtime_error {
    explicit MissingCorrector(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ltwave
