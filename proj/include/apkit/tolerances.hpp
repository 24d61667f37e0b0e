#pragma once

#include <stdexcept>
#include <string>

namespace apkit {

/// Numerical tolerances shared by every module.
namespace tol {
/// Membership and orthonormality checks.
inline constexpr double membership = 1e-10;
/// Exact arithmetic identities (norms, Pythagorean sums).
inline constexpr double identity = 1e-12;
/// Precondition slack for "point lies in the set".
inline constexpr double precondition = 1e-8;
/// Relative distance gap below which two nearest-point candidates are a tie.
inline constexpr double tie = 1e-9;
/// Relative singular-value cut for span estimation.
inline constexpr double rank = 1e-8;
}  // namespace tol

/// Input dimensions disagree.
class dimension_error : public std::invalid_argument {
public:
    explicit dimension_error(const std::string& what) : std::invalid_argument(what) {}
};

/// An operation was called outside its domain (point not in set, x == y, ...).
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Arithmetic produced a non-finite value or a fit could not be formed.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace apkit
