#ifndef HPV_ERROR_HPP
#define HPV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hpv {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad parameter, control, config value or precondition violation.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A state left the feasible region or an integration diverged.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A cost-effectiveness ratio with a zero denominator.
class UndefinedRatio : public Error {
public:
    using Error::Error;
};

/// Calibration target not bracketed by the free control's range.
class NoBracket : public Error {
public:
    using Error::Error;
};

} // namespace hpv

#endif // HPV_ERROR_HPP
