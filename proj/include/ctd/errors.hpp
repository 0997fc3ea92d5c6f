#pragma once

#include <stdexcept>
#include <string>

namespace ctd {

/// Base of every exception raised by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// A multi-index component lies outside its mode dimension.
class BoundsError : public Error {
public:
	using Error::Error;
};

/// Operand shapes do not conform.
class ShapeError : public Error {
public:
	using Error::Error;
};

/// Mode partition or mode grouping is not a partition of {1..N}.
class PartitionError : public Error {
public:
	using Error::Error;
};

/// Wrong number of operands, or an unsupported model order.
class ArityError : public Error {
public:
	using Error::Error;
};

/// An operation's documented precondition does not hold for the input.
class PreconditionError : public Error {
public:
	using Error::Error;
};

/// A least-squares system lacks the column rank needed to identify the unknowns.
class IdentifiabilityError : public Error {
public:
	using Error::Error;
};

/// Numerically singular transform (e.g. an ill-conditioned gauge matrix).
class NumericError : public Error {
public:
	using Error::Error;
};

/// Malformed tensor, matrix or model file.
class FormatError : public Error {
public:
	using Error::Error;
};

}  // namespace ctd
