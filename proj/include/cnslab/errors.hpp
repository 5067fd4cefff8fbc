#pragma once

#include <stdexcept>
#include <string>

namespace cnslab {

/// Failure category, used by the CLI to pick an exit code.
enum class ErrorClass { Input, Numeric, FitPrecondition };

class Error : public std::runtime_error {
public:
    Error(std::string kind, ErrorClass cls, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), cls_(cls) {}
    const std::string& kind() const noexcept { return kind_; }
    ErrorClass error_class() const noexcept { return cls_; }

private:
    std::string kind_;
    ErrorClass cls_;
};

#define CNSLAB_DEFINE_ERROR(Name, Cls)                                              \
    struct Name : Error {                                                           \
        explicit Name(const std::string& w = {}) : Error(#Name, ErrorClass::Cls, w) {} \
    };

CNSLAB_DEFINE_ERROR(InvalidInput, Input)
CNSLAB_DEFINE_ERROR(SingularTransform, Numeric)
CNSLAB_DEFINE_ERROR(RankMismatch, Numeric)
CNSLAB_DEFINE_ERROR(NoIntersection, Numeric)
CNSLAB_DEFINE_ERROR(NotInY, Numeric)
CNSLAB_DEFINE_ERROR(NotRepresentative, Numeric)
CNSLAB_DEFINE_ERROR(StepFailure, Numeric)
CNSLAB_DEFINE_ERROR(SubstepDivergence, Numeric)
CNSLAB_DEFINE_ERROR(BoundaryLeak, Numeric)
CNSLAB_DEFINE_ERROR(DomainError, Numeric)
CNSLAB_DEFINE_ERROR(NegativeDiscriminant, Numeric)
CNSLAB_DEFINE_ERROR(GridMismatch, Numeric)
CNSLAB_DEFINE_ERROR(InsufficientSnapshots, FitPrecondition)
CNSLAB_DEFINE_ERROR(InsufficientSpan, FitPrecondition)

#undef CNSLAB_DEFINE_ERROR

} // namespace cnslab
