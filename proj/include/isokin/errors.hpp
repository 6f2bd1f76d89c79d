#pragma once

#include <stdexcept>
#include <string>

namespace isokin {

//! Point outside the chart's admissible region
class DomainError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Caller violated a documented precondition
class PreconditionError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

//! Invalid experiment configuration; carries the offending line when known
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string const& msg, int line = -1)
        : std::runtime_error(line >= 0
                                 ? "line " + std::to_string(line) + ": " + msg
                                 : msg)
        , line_(line)
    {
    }
    int line() const { return line_; }

  private:
    int line_;
};

//! Numerical failure during a named stage of a computation
class NumericalError : public std::runtime_error
{
  public:
    NumericalError(std::string stage, std::string const& msg)
        : std::runtime_error(stage + ": " + msg), stage_(std::move(stage))
    {
    }
    std::string const& stage() const { return stage_; }

  private:
    std::string stage_;
};

//! Riccati solution escaped to infinity (non-Anosov regime)
class ConjugatePointError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

//! Fundamental-domain reduction did not terminate
class ReductionError : public NumericalError
{
  public:
    using NumericalError::NumericalError;
};

}  // namespace isokin
