#ifndef CMCHAIN_ERRORS_HPP
#define CMCHAIN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cmchain {

/// A SystemSpec or argument violates its declared invariants.
class InvalidSpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The assembled stiffness matrix has a zero mode; carries a description
/// of the offending null space.
class SingularModelError : public std::runtime_error {
public:
    SingularModelError(const std::string& what, std::string null_space)
        : std::runtime_error(what), null_space_(std::move(null_space)) {}
    const std::string& null_space() const { return null_space_; }

private:
    std::string null_space_;
};

/// The grid eigensolver failed to converge within its iteration budget.
class OracleFailureError : public std::runtime_error {
public:
    OracleFailureError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Too few usable points for a fit.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested operation outside its documented applicability range.
class UnsupportedScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cmchain

#endif  // CMCHAIN_ERRORS_HPP
