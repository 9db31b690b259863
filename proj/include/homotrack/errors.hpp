#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace homotrack {

// Base for all library failures. Callers that only care about "something in
// homotrack failed" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HOMOTRACK_ERROR(Name)                   \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    }

HOMOTRACK_ERROR(InvalidEnvironment);
HOMOTRACK_ERROR(ConstructionFailed);
HOMOTRACK_ERROR(UndefinedWinding);
HOMOTRACK_ERROR(DegenerateTrajectory);
HOMOTRACK_ERROR(BoundaryViolation);
HOMOTRACK_ERROR(RejectionBudgetExceeded);
HOMOTRACK_ERROR(InsufficientClassMembers);
HOMOTRACK_ERROR(AllWeightsZero);
HOMOTRACK_ERROR(NumericalFailure);
HOMOTRACK_ERROR(EmptyInstance);
HOMOTRACK_ERROR(NoFeasibleAction);
HOMOTRACK_ERROR(InstanceTooLarge);
HOMOTRACK_ERROR(ToyTooLarge);
HOMOTRACK_ERROR(LabelMismatch);
HOMOTRACK_ERROR(ConfigError);

#undef HOMOTRACK_ERROR

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace homotrack
