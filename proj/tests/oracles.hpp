#pragma once

// Brute-force reference implementations and seeded generators for tests.
// Oracles use plain index loops and never call the stride machinery under test.

#include "ctd/ctd.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using ctd::Complex;
using ctd::Dims;
using ctd::Index;
using ctd::Matrix;
using ctd::Modes;
using ctd::Vector;

/// Visit every 1-based multi-index of dims in lexicographic order (last fastest).
inline void for_each_index(const Dims& dims, const std::function<void(const Dims&)>& f)
{
	Index total = 1;
	for (Index d : dims)
		total *= d;
	Dims idx(dims.size(), 1);
	for (Index k = 0; k < total; ++k) {
		f(idx);
		for (std::size_t n = dims.size(); n-- > 0;) {
			if (++idx[n] <= dims[n])
				break;
			idx[n] = 1;
		}
	}
}

/// 1-based position found by enumerating all multi-indices.
inline Index enumerate_position(const Dims& dims, const Dims& target)
{
	Index pos = 0, found = -1;
	for_each_index(dims, [&](const Dims& idx) {
		++pos;
		if (idx == target)
			found = pos;
	});
	return found;
}

/// Horner-style position of the sub-index over `modes` (last listed fastest), 0-based.
inline Index group_position(const Dims& dims, const Dims& idx, const Modes& modes)
{
	Index p = 0;
	for (int m : modes)
		p = p * dims[static_cast<std::size_t>(m - 1)] + idx[static_cast<std::size_t>(m - 1)] - 1;
	return p;
}

template <class S>
Matrix<S> matricize(const ctd::DenseTensor<S>& x, const Modes& s1, const Modes& s2)
{
	Index rows = 1, cols = 1;
	for (int m : s1)
		rows *= x.dims()[static_cast<std::size_t>(m - 1)];
	for (int m : s2)
		cols *= x.dims()[static_cast<std::size_t>(m - 1)];
	Matrix<S> out(rows, cols);
	for_each_index(x.dims(), [&](const Dims& idx) {
		out(group_position(x.dims(), idx, s1), group_position(x.dims(), idx, s2)) = x.at(idx);
	});
	return out;
}

template <class S>
Matrix<S> kron(const Matrix<S>& a, const Matrix<S>& b)
{
	Matrix<S> out(a.rows() * b.rows(), a.cols() * b.cols());
	for (Index i = 0; i < a.rows(); ++i)
		for (Index j = 0; j < a.cols(); ++j)
			for (Index k = 0; k < b.rows(); ++k)
				for (Index l = 0; l < b.cols(); ++l)
					out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
	return out;
}

template <class S>
Matrix<S> khatri_rao(const Matrix<S>& a, const Matrix<S>& b)
{
	Matrix<S> out(a.rows() * b.rows(), a.cols());
	for (Index r = 0; r < a.cols(); ++r)
		for (Index i = 0; i < a.rows(); ++i)
			for (Index k = 0; k < b.rows(); ++k)
				out(i * b.rows() + k, r) = a(i, r) * b(k, r);
	return out;
}

template <class S>
ctd::DenseTensor<S> parafac(const std::vector<Matrix<S>>& f, const Vector<S>& g = {})
{
	Dims dims;
	for (const auto& a : f)
		dims.push_back(a.rows());
	const Index r = f.front().cols();
	return ctd::DenseTensor<S>::generate(dims, [&](const Dims& idx) {
		S s(0);
		for (Index k = 0; k < r; ++k) {
			S p = g.size() ? g(k) : S(1);
			for (std::size_t n = 0; n < f.size(); ++n)
				p *= f[n](idx[n] - 1, k);
			s += p;
		}
		return s;
	});
}

/// x_{i} = sum_r g_r prod_n a^(n)_{i_n r_n}, factors beyond f.size() are identities.
template <class S>
ctd::DenseTensor<S> tucker(const ctd::DenseTensor<S>& core, const std::vector<Matrix<S>>& f)
{
	Dims dims = core.dims();
	for (std::size_t n = 0; n < f.size(); ++n)
		dims[n] = f[n].rows();
	return ctd::DenseTensor<S>::generate(dims, [&](const Dims& idx) {
		S s(0);
		for_each_index(core.dims(), [&](const Dims& r) {
			S p = core.at(r);
			for (std::size_t n = 0; n < dims.size(); ++n) {
				if (n < f.size())
					p *= f[n](idx[n] - 1, r[n] - 1);
				else if (idx[n] != r[n])
					p = S(0);
			}
			s += p;
		});
		return s;
	});
}

/// Scalar definition of PARATUCK-(N1,N).
template <class S>
ctd::DenseTensor<S> paratuck(const ctd::ParatuckModel<S>& m)
{
	const auto n1 = static_cast<std::size_t>(m.n1);
	Dims dims, ranks;
	for (const auto& a : m.factors) {
		dims.push_back(a.rows());
		ranks.push_back(a.cols());
	}
	dims.push_back(m.constraints[0].cols());
	for (std::size_t k = n1; k < m.input.dims().size(); ++k)
		dims.push_back(m.input.dims()[k]);
	return ctd::DenseTensor<S>::generate(dims, [&](const Dims& idx) {
		S s(0);
		for_each_index(ranks, [&](const Dims& r) {
			Dims cidx = r;
			for (std::size_t k = n1 + 1; k < dims.size(); ++k)
				cidx.push_back(idx[k]);
			S p = m.input.at(cidx);
			for (std::size_t n = 0; n < n1; ++n)
				p *= m.factors[n](idx[n] - 1, r[n] - 1) * m.constraints[n](r[n] - 1, idx[n1] - 1);
			s += p;
		});
		return s;
	});
}

/// Numerical rank by full-pivot LU with the repo threshold, independent of SVD code paths.
template <class S>
Index lu_rank(const Matrix<S>& a)
{
	if (a.size() == 0)
		return 0;
	if (a.cwiseAbs().maxCoeff() == 0)
		return 0;
	Eigen::FullPivLU<Matrix<S>> lu(a);
	lu.setThreshold(1e-10);  // relative to the largest pivot
	return lu.rank();
}

/// k-rank by testing every column subset.
template <class S>
Index k_rank(const Matrix<S>& a)
{
	const Index r = a.cols();
	for (Index c = 0; c < r; ++c)
		if (a.col(c).norm() == 0)
			return 0;
	Index best = 0;
	for (Index k = 1; k <= r; ++k) {
		bool all = true;
		for (unsigned mask = 0; mask < (1u << r) && all; ++mask) {
			if (__builtin_popcount(mask) != static_cast<int>(k))
				continue;
			Matrix<S> sub(a.rows(), k);
			Index c = 0;
			for (Index j = 0; j < r; ++j)
				if (mask & (1u << j))
					sub.col(c++) = a.col(j);
			all = lu_rank(sub) == k;
		}
		if (!all)
			break;
		best = k;
	}
	return best;
}

/// Seeded source of random shapes, matrices and tensors.
struct Gen {
	std::mt19937_64 rng;
	explicit Gen(std::uint64_t seed) : rng(seed) {}

	Index uniform(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); }
	double normal() { return std::normal_distribution<double>()(rng); }

	template <class S>
	S scalar()
	{
		if constexpr (ctd::is_complex_v<S>)
			return S(normal(), normal());
		else
			return S(normal());
	}

	Dims dims(int order, Index lo, Index hi)
	{
		Dims d;
		for (int k = 0; k < order; ++k)
			d.push_back(uniform(lo, hi));
		return d;
	}

	template <class S = double>
	Matrix<S> matrix(Index rows, Index cols)
	{
		Matrix<S> m(rows, cols);
		for (Index j = 0; j < cols; ++j)
			for (Index i = 0; i < rows; ++i)
				m(i, j) = scalar<S>();
		return m;
	}

	template <class S = double>
	Vector<S> vector(Index n)
	{
		return matrix<S>(n, 1);
	}

	template <class S = double>
	ctd::DenseTensor<S> tensor(const Dims& d)
	{
		return ctd::DenseTensor<S>::generate(d, [&](const Dims&) { return scalar<S>(); });
	}

	/// 0/1 matrix with one 1 per column and every row used (rows <= cols).
	Matrix<double> allocation(Index rows, Index cols)
	{
		Matrix<double> m = Matrix<double>::Zero(rows, cols);
		std::vector<Index> order(static_cast<std::size_t>(cols));
		for (Index j = 0; j < cols; ++j)
			order[static_cast<std::size_t>(j)] = j < rows ? j : uniform(0, rows - 1);
		std::shuffle(order.begin(), order.end(), rng);
		for (Index j = 0; j < cols; ++j)
			m(order[static_cast<std::size_t>(j)], j) = 1;
		return m;
	}

	/// Random partition of {1..order} into nonempty s1 and s2, both shuffled.
	ctd::ModePartition partition(int order)
	{
		Modes all;
		for (int k = 1; k <= order; ++k)
			all.push_back(k);
		std::shuffle(all.begin(), all.end(), rng);
		const auto cut = static_cast<std::ptrdiff_t>(uniform(1, order - 1));
		return {Modes(all.begin(), all.begin() + cut), Modes(all.begin() + cut, all.end())};
	}

	template <class S = double>
	ctd::ParatuckModel<S> paratuck(int n1, int n, Index dim_hi = 3, Index rank_hi = 3)
	{
		ctd::ParatuckModel<S> m;
		m.n1 = n1;
		m.n = n;
		Dims cdims;
		const Index i_alloc = uniform(1, dim_hi);
		for (int k = 0; k < n1; ++k) {
			const Index r = uniform(1, rank_hi);
			m.factors.push_back(matrix<S>(uniform(1, dim_hi), r));
			m.constraints.push_back(matrix<S>(r, i_alloc));
			cdims.push_back(r);
		}
		for (int k = n1 + 2; k <= n; ++k)
			cdims.push_back(uniform(1, dim_hi));
		m.input = tensor<S>(cdims);
		return m;
	}
};

}  // namespace oracle
