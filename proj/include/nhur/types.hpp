#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace nhur
{

template <typename Real>
using Complex = std::complex<Real>;

// Dense operator on a finite-dimensional complex space.
template <typename Real>
using Operator = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

// Column vector; a State is a Vector normalized under the product in use.
template <typename Real>
using Vector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using State = Vector<Real>;

using OperatorXcd = Operator<double>;
using VectorXcd = Vector<double>;

class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

// Numerical guards: the computation cannot be carried out reliably.
class NumericalGuard : public Error
{
public:
	using Error::Error;
};

class Overflow : public NumericalGuard
{
public:
	using NumericalGuard::NumericalGuard;
};

class DegenerateSpectrum : public NumericalGuard
{
public:
	using NumericalGuard::NumericalGuard;
};

class IllConditionedMetric : public NumericalGuard
{
public:
	using NumericalGuard::NumericalGuard;
};

class TruncationTooSmall : public NumericalGuard
{
public:
	TruncationTooSmall(const std::string& what, int minimal_truncation)
		: NumericalGuard(what), minimal_truncation_(minimal_truncation)
	{
	}

	int minimal_truncation() const noexcept { return minimal_truncation_; }

private:
	int minimal_truncation_;
};

// Contract violations by the caller.
class NotNormalized : public Error
{
public:
	using Error::Error;
};

class NotHermitian : public Error
{
public:
	using Error::Error;
};

class DimensionMismatch : public Error
{
public:
	using Error::Error;
};

class BadCoefficients : public Error
{
public:
	using Error::Error;
};

class PreconditionFailed : public Error
{
public:
	using Error::Error;
};

} // namespace nhur
