#pragma once

#include <stdexcept>
#include <string>

namespace singvar {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SINGVAR_ERROR(Name)                       \
    struct Name : Error {                         \
        using Error::Error;                       \
        Name() : Error(#Name) {}                  \
    }

SINGVAR_ERROR(InvalidDirection);
SINGVAR_ERROR(RuleTooCoarse);
SINGVAR_ERROR(OutsideDomain);
SINGVAR_ERROR(NearBoundary);
SINGVAR_ERROR(DualDiverged);
SINGVAR_ERROR(InvalidEta);
SINGVAR_ERROR(ProjectionFailed);
SINGVAR_ERROR(EmptySublevel);
SINGVAR_ERROR(LosesCoercivity);
SINGVAR_ERROR(BoundaryContact);
SINGVAR_ERROR(InfeasibleStart);
SINGVAR_ERROR(NotElliptic);
SINGVAR_ERROR(BallOutsideDomain);
SINGVAR_ERROR(TooFewCells);
SINGVAR_ERROR(StepTooLarge);
SINGVAR_ERROR(ConfigError);
SINGVAR_ERROR(SingularMatrix);
SINGVAR_ERROR(IoError);

#undef SINGVAR_ERROR

} // namespace singvar
