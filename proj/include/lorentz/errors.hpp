#pragma once

#include <stdexcept>
#include <string>

namespace lorentz
{
//! Parameters outside the regime where a formula applies.
class RegimeError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

//! Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

//! A numerical guard tripped (runaway event count, non-finite state).
class NumericalGuardError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace lorentz
