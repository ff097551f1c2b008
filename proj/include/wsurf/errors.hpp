#pragma once

#include <stdexcept>
#include <string>

namespace wsurf {

enum class ErrorKind { usage, numeric, io };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& name, const std::string& what)
        : std::runtime_error(name + ": " + what), kind_(kind), name_(name) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

    /// Process exit code for the CLI: 2 usage, 3 numeric, 4 I/O.
    int exit_code() const noexcept {
        switch (kind_) {
        case ErrorKind::usage: return 2;
        case ErrorKind::numeric: return 3;
        case ErrorKind::io: return 4;
        }
        return 3;
    }

private:
    ErrorKind kind_;
    std::string name_;
};

#define WSURF_DEFINE_ERROR(Name, Kind)                                              \
    class Name : public Error {                                                     \
    public:                                                                         \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, #Name, what) {} \
    };

WSURF_DEFINE_ERROR(UsageError, usage)
WSURF_DEFINE_ERROR(DomainError, usage)
WSURF_DEFINE_ERROR(UnknownSurfaceError, usage)

WSURF_DEFINE_ERROR(RegularityError, numeric)
WSURF_DEFINE_ERROR(NotPrincipalError, numeric)
WSURF_DEFINE_ERROR(UmbilicError, numeric)
WSURF_DEFINE_ERROR(QuadratureError, numeric)
WSURF_DEFINE_ERROR(FitError, numeric)
WSURF_DEFINE_ERROR(MonotonicityError, numeric)
WSURF_DEFINE_ERROR(SingularOffsetError, numeric)
WSURF_DEFINE_ERROR(DegenerateRelationError, numeric)
WSURF_DEFINE_ERROR(ReciprocalSingularityError, numeric)
WSURF_DEFINE_ERROR(NonConvergenceError, numeric)
WSURF_DEFINE_ERROR(RangeViolationError, numeric)
WSURF_DEFINE_ERROR(CFLError, numeric)
WSURF_DEFINE_ERROR(IllPosedError, numeric)
WSURF_DEFINE_ERROR(RangeError, numeric)
WSURF_DEFINE_ERROR(SmoothnessError, numeric)
WSURF_DEFINE_ERROR(PDEResidualError, numeric)
WSURF_DEFINE_ERROR(CompatibilityError, numeric)

WSURF_DEFINE_ERROR(ParseError, io)
WSURF_DEFINE_ERROR(IOError, io)

#undef WSURF_DEFINE_ERROR

} // namespace wsurf
