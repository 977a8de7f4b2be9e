#pragma once

#include <stdexcept>
#include <string>

namespace boxres {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (r <= 0, E <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Invalid integration grid or solver parameters.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// NaN or Inf produced while integrating the radial equation.
class IntegrationError : public Error {
public:
    using Error::Error;
};

/// Energy bracket does not contain the requested eigenvalue.
class BracketError : public Error {
public:
    using Error::Error;
};

/// Energy bracket contains more than one eigenvalue.
class AmbiguityError : public Error {
public:
    using Error::Error;
};

/// An EigenState that no longer satisfies the box boundary condition.
class StaleStateError : public Error {
public:
    using Error::Error;
};

/// Width formula denominator vanishes.
class SingularWidthError : public Error {
public:
    using Error::Error;
};

/// Breit-Wigner fit failure; carries the best grid point found.
class FitError : public Error {
public:
    FitError(const std::string& what, double best_e_gamma, double best_width)
        : Error(what), best_e_gamma_(best_e_gamma), best_width_(best_width) {}

    double best_e_gamma() const noexcept { return best_e_gamma_; }
    double best_width() const noexcept { return best_width_; }

private:
    double best_e_gamma_;
    double best_width_;
};

/// Configuration text could not be parsed or is out of range.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Output file already exists and overwriting was not requested.
class OutputExistsError : public Error {
public:
    using Error::Error;
};

} // namespace boxres
