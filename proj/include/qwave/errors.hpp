#pragma once

#include <stdexcept>
#include <string>

namespace qwave {

/// Precondition violated by a caller (bad grid, bad parameter, empty range).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Base of the blow-up guard errors raised while evolving.
class GuardTrip : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// u left the domain on which the coefficient model is admissible.
class CoefficientDomainExceeded : public GuardTrip {
public:
    CoefficientDomainExceeded(const std::string& what, double t, double r, double u)
        : GuardTrip(what), t_(t), r_(r), u_(u) {}

    double t() const { return t_; }
    double r() const { return r_; }
    double u() const { return u_; }

private:
    double t_, r_, u_;
};

class NonFinite : public GuardTrip {
public:
    NonFinite(const std::string& what, double t) : GuardTrip(what), t_(t) {}
    double t() const { return t_; }

private:
    double t_;
};

/// The outer boundary could be reached before the final time.
class DomainTooSmall : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reading or writing an artifact failed; the message names the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qwave
