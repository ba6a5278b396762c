#pragma once

#include <stdexcept>
#include <string>

namespace xva {

// Each family maps to a CLI exit code, see tools/main.cpp.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct ArgumentError : Error { using Error::Error; };
struct UnsupportedError : Error { using Error::Error; };
struct RegimeError : Error { using Error::Error; };
struct AuthorizationError : Error { using Error::Error; };

struct DegeneracyError : Error { using Error::Error; };
struct StepSizeError : Error { using Error::Error; };
struct HedgeError : Error { using Error::Error; };

struct IdentityError : Error {
    IdentityError(const std::string& msg, double residual, double se)
        : Error(msg), residual(residual), se(se) {}
    double residual;
    double se;
};

// mixed-sign payoff under replacement close-out
struct PreconditionError : Error { using Error::Error; };

struct TableMismatch : Error { using Error::Error; };

}  // namespace xva
