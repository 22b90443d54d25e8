#pragma once

#include <stdexcept>
#include <string>

namespace fracstorm {

/// Precondition violated: an argument lies outside the admissible parameter set.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A computation failed to reach its accuracy target (quadrature, factorisation, overflow).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void domain_fail(const std::string& what) { throw DomainError(what); }
[[noreturn]] inline void numerical_fail(const std::string& what) { throw NumericalError(what); }

inline void require(bool cond, const std::string& what) {
    if (!cond) domain_fail(what);
}

}  // namespace fracstorm
