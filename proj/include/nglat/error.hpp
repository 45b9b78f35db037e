#pragma once

#include <stdexcept>
#include <string>

namespace nglat {

// Base for every failure the library reports. Subclasses name the condition
// so callers (and the harness error records) can dispatch on type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

#define NGLAT_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
        const char* kind() const noexcept override { return #Name; }          \
    };

NGLAT_DEFINE_ERROR(UnivalenceViolation)
NGLAT_DEFINE_ERROR(InversionDiverged)
NGLAT_DEFINE_ERROR(BlobPlacementFailed)
NGLAT_DEFINE_ERROR(Disconnected)
NGLAT_DEFINE_ERROR(BlobTouchesBoundary)
NGLAT_DEFINE_ERROR(SolverStalled)
NGLAT_DEFINE_ERROR(BudgetExceeded)
NGLAT_DEFINE_ERROR(QuadratureUnconverged)
NGLAT_DEFINE_ERROR(ObstacleInvalid)
NGLAT_DEFINE_ERROR(PairInvalid)
NGLAT_DEFINE_ERROR(ConfigError)

#undef NGLAT_DEFINE_ERROR

}  // namespace nglat
