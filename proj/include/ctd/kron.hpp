#pragma once

// Kronecker, Khatri-Rao and Hadamard products, their block-wise variants,
// and tensor extensions of matrices. Multi-operand products associate left
// to right; operand order is the caller's.

#include "ctd/errors.hpp"
#include "ctd/numeric.hpp"

#include <numeric>
#include <string>
#include <vector>

namespace ctd {

template <class Scalar>
Matrix<Scalar> ones(Index rows, Index cols)
{
	return Matrix<Scalar>::Ones(rows, cols);
}

template <class Scalar>
Matrix<Scalar> eye(Index n)
{
	return Matrix<Scalar>::Identity(n, n);
}

template <class DA, class DB>
Matrix<typename DA::Scalar> kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b)
{
	using Scalar = typename DA::Scalar;
	const Index br = b.rows(), bc = b.cols();
	Matrix<Scalar> k(a.rows() * br, a.cols() * bc);
	for (Index j = 0; j < a.cols(); ++j)
		for (Index i = 0; i < a.rows(); ++i)
			k.block(i * br, j * bc, br, bc) = a(i, j) * b;
	return k;
}

template <class Scalar>
Matrix<Scalar> kron(const std::vector<Matrix<Scalar>>& mats)
{
	if (mats.empty())
		throw ArityError("kron needs at least one operand");
	Matrix<Scalar> k = mats.front();
	for (std::size_t i = 1; i < mats.size(); ++i)
		k = kron(k, mats[i]);
	return k;
}

/// Column-wise Kronecker product.
template <class DA, class DB>
Matrix<typename DA::Scalar> khatri_rao(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b)
{
	using Scalar = typename DA::Scalar;
	if (a.cols() != b.cols())
		throw ShapeError("Khatri-Rao operands have " + std::to_string(a.cols()) + " and " + std::to_string(b.cols()) +
		                 " columns");
	const Index br = b.rows();
	Matrix<Scalar> k(a.rows() * br, a.cols());
	for (Index r = 0; r < a.cols(); ++r)
		for (Index i = 0; i < a.rows(); ++i)
			k.col(r).segment(i * br, br) = a(i, r) * b.col(r);
	return k;
}

template <class Scalar>
Matrix<Scalar> khatri_rao(const std::vector<Matrix<Scalar>>& mats)
{
	if (mats.empty())
		throw ArityError("khatri_rao needs at least one operand");
	Matrix<Scalar> k = mats.front();
	for (std::size_t i = 1; i < mats.size(); ++i)
		k = khatri_rao(k, mats[i]);
	return k;
}

template <class Scalar>
Matrix<Scalar> hadamard(const std::vector<Matrix<Scalar>>& mats)
{
	if (mats.empty())
		throw ArityError("hadamard needs at least one operand");
	Matrix<Scalar> h = mats.front();
	for (std::size_t i = 1; i < mats.size(); ++i) {
		if (mats[i].rows() != h.rows() || mats[i].cols() != h.cols())
			throw ShapeError("Hadamard operand " + std::to_string(i + 1) + " has a different shape");
		h = h.cwiseProduct(mats[i]);
	}
	return h;
}

/// Column-stacking vec of a matrix.
template <class Derived>
Vector<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& m)
{
	Matrix<typename Derived::Scalar> c = m;
	return Eigen::Map<Vector<typename Derived::Scalar>>(c.data(), c.size());
}

/// Checks vec(ACE) = (E^T kron A) vec(C) and vec(A diag(x) C) = (C^T kr A) x
/// to `tol` relative; x has length cols(A).
template <class Scalar>
bool vec_identities_check(const Matrix<Scalar>& a, const Matrix<Scalar>& c, const Matrix<Scalar>& e,
                          const Vector<Scalar>& x, double tol = 1e-12)
{
	if (a.cols() != c.rows() || c.cols() != e.rows() || x.size() != a.cols())
		return false;
	const Vector<Scalar> lhs1 = vec((a * c * e).eval());
	const Vector<Scalar> rhs1 = kron(e.transpose(), a) * vec(c);
	const Vector<Scalar> lhs2 = vec((a * x.asDiagonal() * c).eval());
	const Vector<Scalar> rhs2 = khatri_rao(c.transpose(), a) * x;
	return relative_error(lhs1, rhs1) <= tol && relative_error(lhs2, rhs2) <= tol;
}

/// Matrix partitioned column-wise into blocks of the given widths.
template <class Scalar>
struct BlockMatrix {
	Matrix<Scalar> m;
	std::vector<Index> block_cols;

	Index blocks() const { return static_cast<Index>(block_cols.size()); }

	void validate() const
	{
		Index total = 0;
		for (Index w : block_cols) {
			if (w < 1)
				throw ShapeError("block width must be positive");
			total += w;
		}
		if (total != m.cols())
			throw ShapeError("block widths sum to " + std::to_string(total) + " but matrix has " +
			                 std::to_string(m.cols()) + " columns");
	}

	Matrix<Scalar> block(Index p) const
	{
		const Index start = std::accumulate(block_cols.begin(), block_cols.begin() + p, Index{0});
		return m.middleCols(start, block_cols[static_cast<std::size_t>(p)]);
	}
};

namespace detail {

template <class Scalar, class Op>
BlockMatrix<Scalar> blockwise(const BlockMatrix<Scalar>& a, const BlockMatrix<Scalar>& b, Op op)
{
	a.validate();
	b.validate();
	if (a.blocks() != b.blocks())
		throw ShapeError("block-wise product operands have " + std::to_string(a.blocks()) + " and " +
		                 std::to_string(b.blocks()) + " blocks");
	std::vector<Matrix<Scalar>> parts;
	std::vector<Index> widths;
	Index cols = 0;
	for (Index p = 0; p < a.blocks(); ++p) {
		parts.push_back(op(a.block(p), b.block(p)));
		widths.push_back(parts.back().cols());
		cols += widths.back();
	}
	Matrix<Scalar> out(parts.front().rows(), cols);
	Index c = 0;
	for (const auto& part : parts) {
		out.middleCols(c, part.cols()) = part;
		c += part.cols();
	}
	return {out, widths};
}

}  // namespace detail

/// [A^(1) kron B^(1), ..., A^(P) kron B^(P)].
template <class Scalar>
BlockMatrix<Scalar> block_kron(const BlockMatrix<Scalar>& a, const BlockMatrix<Scalar>& b)
{
	return detail::blockwise(a, b, [](const Matrix<Scalar>& x, const Matrix<Scalar>& y) { return kron(x, y); });
}

/// [A^(1) kr B^(1), ..., A^(P) kr B^(P)].
template <class Scalar>
BlockMatrix<Scalar> block_khatri_rao(const BlockMatrix<Scalar>& a, const BlockMatrix<Scalar>& b)
{
	return detail::blockwise(a, b, [](const Matrix<Scalar>& x, const Matrix<Scalar>& y) { return khatri_rao(x, y); });
}

/// Block-diagonal matrix of the arguments.
template <class Scalar>
Matrix<Scalar> bdiag(const std::vector<Matrix<Scalar>>& blocks)
{
	Index rows = 0, cols = 0;
	for (const auto& b : blocks) {
		rows += b.rows();
		cols += b.cols();
	}
	Matrix<Scalar> out = Matrix<Scalar>::Zero(rows, cols);
	Index r = 0, c = 0;
	for (const auto& b : blocks) {
		out.block(r, c, b.rows(), b.cols()) = b;
		r += b.rows();
		c += b.cols();
	}
	return out;
}

/// 1 kron .. kron I_{reps[position]} kron .. kron 1, with all-ones row
/// vectors (rows = false) or column vectors (rows = true) elsewhere.
template <class Scalar>
Matrix<Scalar> replication_matrix(const std::vector<Index>& reps, int position, bool rows = false)
{
	if (position < 1 || position > static_cast<int>(reps.size()))
		throw ShapeError("extension position " + std::to_string(position) + " out of range for " +
		                 std::to_string(reps.size()) + " modes");
	Matrix<Scalar> k = Matrix<Scalar>::Ones(1, 1);
	for (std::size_t n = 0; n < reps.size(); ++n) {
		if (reps[n] < 1)
			throw ShapeError("replication count must be positive");
		Matrix<Scalar> f;
		if (static_cast<int>(n) + 1 == position)
			f = eye<Scalar>(reps[n]);
		else
			f = rows ? ones<Scalar>(reps[n], 1) : ones<Scalar>(1, reps[n]);
		k = kron(k, f);
	}
	return k;
}

/// A = B (1^T_{R1} kron .. kron I_{R_pos} kron .. kron 1^T_{RN}):
/// a_{i, r1..rN} = b_{i, r_pos}.
template <class Derived>
Matrix<typename Derived::Scalar> tensor_extension(const Eigen::MatrixBase<Derived>& b, int position,
                                                  const std::vector<Index>& reps)
{
	using Scalar = typename Derived::Scalar;
	const auto psi = replication_matrix<Scalar>(reps, position);
	if (psi.rows() != b.cols())
		throw ShapeError("extended mode has " + std::to_string(psi.rows()) + " entries but matrix has " +
		                 std::to_string(b.cols()) + " columns");
	return b * psi;
}

/// A = (1_{I1} kron .. kron I_{I_pos} kron .. kron 1_{IN}) B.
template <class Derived>
Matrix<typename Derived::Scalar> tensor_extension_rows(const Eigen::MatrixBase<Derived>& b, int position,
                                                       const std::vector<Index>& reps)
{
	using Scalar = typename Derived::Scalar;
	const auto psi = replication_matrix<Scalar>(reps, position, true);
	if (psi.cols() != b.rows())
		throw ShapeError("extended mode has " + std::to_string(psi.cols()) + " entries but matrix has " +
		                 std::to_string(b.rows()) + " rows");
	return psi * b;
}

}  // namespace ctd
