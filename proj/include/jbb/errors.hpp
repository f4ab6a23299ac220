// SPDX-License-Identifier: Apache-2.0
//
// jbb: joint beamforming and broadcasting for massive MIMO downlinks
// ------------------------------------------------------------------------

#ifndef JBB_ERRORS_HPP
#define JBB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace jbb
{

// Base of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// A configuration or scenario violates one of its invariants.
class ValidationError : public Error
{
public:
    ValidationError(std::string field, const std::string &constraint)
        : Error(field + ": " + constraint), field_(std::move(field)) {}

    const std::string &field() const noexcept { return field_; }

private:
    std::string field_;
};

// The frame has no downlink payload symbols left after the O-terminal pilots.
class InfeasibleFrameError : public Error
{
public:
    using Error::Error;
};

// A formula was evaluated outside its domain (e.g. the Jensen bound at M' = 1).
class DomainError : public Error
{
public:
    using Error::Error;
};

// The requested rate cannot be reached at any power.
class InfeasibleTargetError : public Error
{
public:
    using Error::Error;
};

// Quadrature did not reach the requested tolerance.
class NumericalError : public Error
{
public:
    using Error::Error;
};

// The estimated channel matrix is (numerically) rank deficient.
class SingularChannelError : public Error
{
public:
    using Error::Error;
};

// Subspace dimension does not fit the available degrees of freedom.
class DimensionError : public Error
{
public:
    using Error::Error;
};

} // namespace jbb

#endif
