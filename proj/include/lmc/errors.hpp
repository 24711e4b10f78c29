#pragma once

#include <stdexcept>
#include <string>

namespace lmc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShiftOutOfRange : Error { using Error::Error; };
struct BadExponent : Error { using Error::Error; };
struct NonpositiveWeight : Error { using Error::Error; };
struct UnknownIdentifier : Error { using Error::Error; };
struct UnboundVariable : Error { using Error::Error; };
struct NonfiniteResult : Error { using Error::Error; };
struct IncompatibleSpecs : Error { using Error::Error; };
struct DegenerateFit : Error { using Error::Error; };
struct ResolutionGuard : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

struct PositivityLoss : Error {
    double t;
    std::string variable;
    PositivityLoss(double t_, std::string var)
        : Error("positivity loss in " + var + " at t = " + std::to_string(t_)), t(t_), variable(std::move(var)) {}
};

struct NonlinearDivergence : Error {
    long step;
    explicit NonlinearDivergence(long s)
        : Error("Picard iteration did not converge at step " + std::to_string(s)), step(s) {}
};

}  // namespace lmc
