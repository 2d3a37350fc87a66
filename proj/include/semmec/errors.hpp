#pragma once

#include <stdexcept>
#include <string>

namespace semmec {

// A formula was evaluated outside its domain (non-positive distance, factor
// outside (0, 1], ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A dual search failed to bracket or shrink its multiplier.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration value or malformed config/sweep file. The message always
// names the offending key.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Brute-force oracle found no feasible point.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A per-slot invariant of the controller was broken (objective increase
// across BCD rounds, ledger drift, infeasible decision).
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace semmec
