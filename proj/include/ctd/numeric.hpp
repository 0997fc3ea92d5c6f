#pragma once

// Shared numeric-rank policy. Every rank decision in the library (mode-n
// ranks, k-ranks, identifiability checks, precondition checks) goes
// through numeric_rank so that a single threshold applies repo-wide.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <vector>

namespace ctd {

using Index = Eigen::Index;
using Dims = std::vector<Index>;
using Modes = std::vector<int>;
using Complex = std::complex<double>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using RealOf = typename Eigen::NumTraits<Scalar>::Real;

template <class Scalar>
inline constexpr bool is_complex_v = Eigen::NumTraits<Scalar>::IsComplex;

/// Singular values in decreasing order.
template <class Derived>
Vector<RealOf<typename Derived::Scalar>> singular_values(const Eigen::MatrixBase<Derived>& m)
{
	using Scalar = typename Derived::Scalar;
	if (m.size() == 0)
		return {};
	Eigen::JacobiSVD<Matrix<Scalar>> svd(m.eval());
	return svd.singularValues();
}

/// Threshold below which a singular value counts as zero:
/// max(rows, cols) * eps * sigma_max, eps = 2^-52 for doubles.
template <class Real>
Real rank_tolerance(Index rows, Index cols, Real sigma_max)
{
	return static_cast<Real>(std::max(rows, cols)) * std::numeric_limits<Real>::epsilon() * sigma_max;
}

template <class Derived>
Index numeric_rank(const Eigen::MatrixBase<Derived>& m)
{
	const auto s = singular_values(m);
	if (s.size() == 0)
		return 0;
	const auto tol = rank_tolerance(m.rows(), m.cols(), s(0));
	Index r = 0;
	for (Index i = 0; i < s.size(); ++i)
		if (s(i) > tol)
			++r;
	return r;
}

template <class Derived>
bool full_column_rank(const Eigen::MatrixBase<Derived>& m)
{
	return numeric_rank(m) == m.cols();
}

/// 2-norm condition number; +inf when the matrix is numerically singular.
template <class Derived>
double condition_number(const Eigen::MatrixBase<Derived>& m)
{
	const auto s = singular_values(m);
	if (s.size() == 0)
		return 1.0;
	const double smin = static_cast<double>(s(s.size() - 1));
	if (smin <= 0.0)
		return std::numeric_limits<double>::infinity();
	return static_cast<double>(s(0)) / smin;
}

/// ||a - b||_F / max(||b||_F, tiny). Shapes must match.
template <class DA, class DB>
double relative_error(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b)
{
	const double den = std::max<double>(b.norm(), std::numeric_limits<double>::min());
	return static_cast<double>((a - b).norm()) / den;
}

/// I.i.d. standard normal entries (complex: independent real and imaginary
/// parts of variance 1/2).
template <class Scalar>
Matrix<Scalar> gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng)
{
	std::normal_distribution<double> normal;
	Matrix<Scalar> m(rows, cols);
	for (Index j = 0; j < cols; ++j)
		for (Index i = 0; i < rows; ++i) {
			if constexpr (is_complex_v<Scalar>)
				m(i, j) = Scalar(normal(rng), normal(rng)) / std::sqrt(2.0);
			else
				m(i, j) = static_cast<Scalar>(normal(rng));
		}
	return m;
}

}  // namespace ctd
