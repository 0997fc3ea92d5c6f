#pragma once

// Decomposition families: Tucker / Tucker-(N1,N), PARAFAC, PARALIND and
// CONFAC, nested Tucker, block CONFAC, and PARATUCK-(N1,N). Each family
// offers a synthesis (tensor realization) and a closed-form unfolding for
// any mode partition.

#include "ctd/errors.hpp"
#include "ctd/kron.hpp"
#include "ctd/numeric.hpp"
#include "ctd/tensor.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ctd {

namespace detail {

template <class Scalar>
std::vector<Matrix<Scalar>> pick(const std::vector<Matrix<Scalar>>& mats, const Modes& modes)
{
	std::vector<Matrix<Scalar>> out;
	out.reserve(modes.size());
	for (int m : modes)
		out.push_back(mats[static_cast<std::size_t>(m - 1)]);
	return out;
}

inline std::string mode_str(std::size_t n0) { return std::to_string(n0 + 1); }

}  // namespace detail

// --- Tucker ------------------------------------------------------------------

/// X = G x_1 A^(1) ... x_N1 A^(N1); modes beyond `active` carry identity factors.
template <class Scalar>
struct TuckerModel {
	DenseTensor<Scalar> core;
	std::vector<Matrix<Scalar>> factors;
	int active = -1;  ///< N1; negative means factors.size()

	int order() const { return core.order(); }
	int n1() const { return active < 0 ? static_cast<int>(factors.size()) : active; }

	void validate() const
	{
		const int n = order();
		if (n1() > n || static_cast<int>(factors.size()) != n1())
			throw ShapeError("Tucker model has " + std::to_string(factors.size()) + " factors for " +
			                 std::to_string(n1()) + " active modes of an order-" + std::to_string(n) + " core");
		for (std::size_t k = 0; k < factors.size(); ++k)
			if (factors[k].cols() != core.dims()[k])
				throw ShapeError("factor " + detail::mode_str(k) + " has " + std::to_string(factors[k].cols()) +
				                 " columns, core dim is " + std::to_string(core.dims()[k]));
	}

	/// All N factors, identities filled in beyond `active`.
	std::vector<Matrix<Scalar>> full_factors() const
	{
		auto f = factors;
		for (int n = n1() + 1; n <= order(); ++n)
			f.push_back(eye<Scalar>(core.dim(n)));
		return f;
	}

	Dims dims() const
	{
		Dims d = core.dims();
		for (std::size_t k = 0; k < factors.size(); ++k)
			d[k] = factors[k].rows();
		return d;
	}
};

template <class Scalar>
DenseTensor<Scalar> synth_tucker(const TuckerModel<Scalar>& m)
{
	m.validate();
	DenseTensor<Scalar> x = m.core;
	for (std::size_t k = 0; k < m.factors.size(); ++k)
		x = mode_n_product(x, m.factors[k], static_cast<int>(k) + 1);
	return x;
}

/// (kron_{S1} A) G_{S1;S2} (kron_{S2} A)^T.
template <class Scalar>
Matrix<Scalar> tucker_unfold(const TuckerModel<Scalar>& m, const ModePartition& p)
{
	m.validate();
	p.validate(m.order());
	const auto f = m.full_factors();
	return kron(detail::pick(f, p.s1)) * matricize(m.core, p) * kron(detail::pick(f, p.s2)).transpose();
}

// --- PARAFAC -----------------------------------------------------------------

/// x = sum_r g_r prod_n a^(n)_{i_n, r}; empty weights mean g = 1.
template <class Scalar>
struct ParafacModel {
	std::vector<Matrix<Scalar>> factors;
	Vector<Scalar> weights;

	int order() const { return static_cast<int>(factors.size()); }
	Index rank() const { return factors.empty() ? 0 : factors.front().cols(); }

	Vector<Scalar> g() const { return weights.size() ? weights : Vector<Scalar>::Ones(rank()); }

	Dims dims() const
	{
		Dims d;
		for (const auto& f : factors)
			d.push_back(f.rows());
		return d;
	}

	void validate() const
	{
		if (factors.empty())
			throw ArityError("PARAFAC model needs at least one factor");
		for (std::size_t k = 0; k < factors.size(); ++k)
			if (factors[k].cols() != rank())
				throw ShapeError("factor " + detail::mode_str(k) + " has " + std::to_string(factors[k].cols()) +
				                 " columns, expected " + std::to_string(rank()));
		if (weights.size() && weights.size() != rank())
			throw ShapeError("weight vector length differs from rank");
	}

	/// Unit-norm columns in every factor, scale moved to g (made real positive
	/// by absorbing phases into the first factor).
	void normalize()
	{
		validate();
		Vector<Scalar> w = g();
		for (auto& f : factors)
			for (Index r = 0; r < rank(); ++r) {
				const auto nrm = f.col(r).norm();
				if (nrm > 0) {
					f.col(r) /= nrm;
					w(r) *= nrm;
				}
			}
		for (Index r = 0; r < rank(); ++r) {
			const auto mag = std::abs(w(r));
			if (mag > 0) {
				factors.front().col(r) *= w(r) / mag;
				w(r) = mag;
			}
		}
		weights = w;
	}
};

template <class Scalar>
DenseTensor<Scalar> synth_parafac(const ParafacModel<Scalar>& m)
{
	m.validate();
	// Khatri-Rao of all factors in mode order lists entries in vectorize order.
	const Vector<Scalar> v = khatri_rao(m.factors) * m.g();
	return DenseTensor<Scalar>(m.dims(), std::vector<Scalar>(v.data(), v.data() + v.size()));
}

/// (kr_{S1} A) diag(g) (kr_{S2} A)^T.
template <class Scalar>
Matrix<Scalar> parafac_unfold(const ParafacModel<Scalar>& m, const ModePartition& p)
{
	m.validate();
	p.validate(m.order());
	return khatri_rao(detail::pick(m.factors, p.s1)) * m.g().asDiagonal() *
	       khatri_rao(detail::pick(m.factors, p.s2)).transpose();
}

// --- PARALIND / CONFAC -------------------------------------------------------

/// PARAFAC with factors A^(n) Phi^(n). Constraints cover the first `active`
/// modes (default: all of them); later modes have Phi = I and R_n = R.
template <class Scalar>
struct ConfacModel {
	std::vector<Matrix<Scalar>> factors;      ///< A^(n), I_n x R_n
	std::vector<Matrix<Scalar>> constraints;  ///< Phi^(n), R_n x R
	int active = -1;

	int order() const { return static_cast<int>(factors.size()); }
	int n1() const { return active < 0 ? static_cast<int>(constraints.size()) : active; }
	Index rank() const
	{
		if (!constraints.empty())
			return constraints.front().cols();
		return factors.empty() ? 0 : factors.front().cols();
	}

	Dims dims() const
	{
		Dims d;
		for (const auto& f : factors)
			d.push_back(f.rows());
		return d;
	}

	Matrix<Scalar> constraint(int n) const
	{
		if (n <= n1())
			return constraints[static_cast<std::size_t>(n - 1)];
		return eye<Scalar>(rank());
	}

	std::vector<Matrix<Scalar>> all_constraints() const
	{
		std::vector<Matrix<Scalar>> out;
		for (int n = 1; n <= order(); ++n)
			out.push_back(constraint(n));
		return out;
	}

	void validate() const
	{
		if (factors.empty())
			throw ArityError("CONFAC model needs at least one factor");
		if (static_cast<int>(constraints.size()) != n1() || n1() > order())
			throw ShapeError("CONFAC model has " + std::to_string(constraints.size()) + " constraints for " +
			                 std::to_string(n1()) + " active modes");
		for (std::size_t k = 0; k < factors.size(); ++k) {
			const auto phi = constraint(static_cast<int>(k) + 1);
			if (phi.cols() != rank())
				throw ShapeError("constraint " + detail::mode_str(k) + " has " + std::to_string(phi.cols()) +
				                 " columns, expected " + std::to_string(rank()));
			if (factors[k].cols() != phi.rows())
				throw ShapeError("factor " + detail::mode_str(k) + " has " + std::to_string(factors[k].cols()) +
				                 " columns but its constraint has " + std::to_string(phi.rows()) + " rows");
		}
	}

	/// CONFAC-specific requirements on each active Phi: canonical columns,
	/// full row rank, every resource used (sum_r D_r(Phi) = I_R).
	bool is_confac(std::string* why = nullptr) const
	{
		for (int n = 1; n <= n1(); ++n) {
			const auto& phi = constraints[static_cast<std::size_t>(n - 1)];
			auto fail = [&](const std::string& s) {
				if (why)
					*why = "constraint " + std::to_string(n) + ": " + s;
				return false;
			};
			for (Index r = 0; r < phi.cols(); ++r) {
				int ones_count = 0;
				for (Index i = 0; i < phi.rows(); ++i) {
					if (phi(i, r) == Scalar(1))
						++ones_count;
					else if (phi(i, r) != Scalar(0))
						return fail("column " + std::to_string(r + 1) + " is not a canonical vector");
				}
				if (ones_count != 1)
					return fail("column " + std::to_string(r + 1) + " is not a canonical vector");
			}
			Matrix<Scalar> cover = Matrix<Scalar>::Zero(phi.cols(), phi.cols());
			for (Index i = 0; i < phi.rows(); ++i)
				cover += phi.row(i).asDiagonal();
			if (!cover.isIdentity(0.0))
				return fail("columns do not cover the identity");
			if (numeric_rank(phi) != phi.rows())
				return fail("not full row rank");
		}
		return true;
	}

	std::vector<Matrix<Scalar>> constrained_factors() const
	{
		std::vector<Matrix<Scalar>> out;
		for (int n = 1; n <= order(); ++n)
			out.push_back(n <= n1() ? Matrix<Scalar>(factors[static_cast<std::size_t>(n - 1)] * constraint(n))
			                        : factors[static_cast<std::size_t>(n - 1)]);
		return out;
	}

	ParafacModel<Scalar> as_parafac() const
	{
		validate();
		return {constrained_factors(), {}};
	}

	/// Constrained Tucker view: core I_{N,R} x_n Phi^(n), factors A^(n).
	TuckerModel<Scalar> as_tucker() const
	{
		validate();
		DenseTensor<Scalar> g = identity_tensor<Scalar>(order(), rank());
		for (int n = 1; n <= n1(); ++n)
			g = mode_n_product(g, constraint(n), n);
		return {g, factors, order()};
	}
};

template <class Scalar>
DenseTensor<Scalar> synth_confac(const ConfacModel<Scalar>& m)
{
	return synth_parafac(m.as_parafac());
}

/// (kron_{S1} A)(kr_{S1} Phi)(kr_{S2} Phi)^T(kron_{S2} A)^T.
template <class Scalar>
Matrix<Scalar> confac_unfold(const ConfacModel<Scalar>& m, const ModePartition& p)
{
	m.validate();
	p.validate(m.order());
	const auto phi = m.all_constraints();
	return kron(detail::pick(m.factors, p.s1)) * khatri_rao(detail::pick(phi, p.s1)) *
	       khatri_rao(detail::pick(phi, p.s2)).transpose() * kron(detail::pick(m.factors, p.s2)).transpose();
}

/// Gamma^(n1,n2) = Phi^(n1) Phi^(n2)^T.
template <class Scalar>
Matrix<Scalar> interaction_matrix(const ConfacModel<Scalar>& m, int n1, int n2)
{
	if (n1 < 1 || n2 < 1 || n1 > m.order() || n2 > m.order())
		throw PartitionError("interaction modes out of range");
	return m.constraint(n1) * m.constraint(n2).transpose();
}

/// Xi^(n) = Phi^(n)^T Phi^(n); unit diagonal for CONFAC.
template <class Scalar>
Matrix<Scalar> xi_matrix(const ConfacModel<Scalar>& m, int n)
{
	return m.constraint(n).transpose() * m.constraint(n);
}

// --- Nested Tucker -----------------------------------------------------------

/// X^(p) = X^(p-1) x_n A^(p,n), X^(0) = core; chains[n][p-1] = A^(p,n).
template <class Scalar>
struct NestedTuckerModel {
	DenseTensor<Scalar> core;
	std::vector<std::vector<Matrix<Scalar>>> chains;

	void validate() const
	{
		if (static_cast<int>(chains.size()) != core.order())
			throw ShapeError("nested Tucker needs one chain per core mode");
		for (std::size_t n = 0; n < chains.size(); ++n) {
			Index inner = core.dims()[n];
			for (std::size_t p = 0; p < chains[n].size(); ++p) {
				if (chains[n][p].cols() != inner)
					throw ShapeError("chain of mode " + detail::mode_str(n) + ", level " + std::to_string(p + 1) +
					                 ": expected " + std::to_string(inner) + " columns, got " +
					                 std::to_string(chains[n][p].cols()));
				inner = chains[n][p].rows();
			}
		}
	}

	/// A^(P,n) ... A^(1,n) for each mode.
	std::vector<Matrix<Scalar>> effective_factors() const
	{
		validate();
		std::vector<Matrix<Scalar>> out;
		for (std::size_t n = 0; n < chains.size(); ++n) {
			Matrix<Scalar> f = eye<Scalar>(core.dims()[n]);
			for (const auto& a : chains[n])
				f = (a * f).eval();
			out.push_back(f);
		}
		return out;
	}

	TuckerModel<Scalar> as_tucker() const { return {core, effective_factors(), core.order()}; }
};

/// Recursive evaluation, one level at a time.
template <class Scalar>
DenseTensor<Scalar> synth_nested_tucker(const NestedTuckerModel<Scalar>& m)
{
	m.validate();
	std::size_t levels = 0;
	for (const auto& c : m.chains)
		levels = std::max(levels, c.size());
	DenseTensor<Scalar> x = m.core;
	for (std::size_t p = 0; p < levels; ++p)
		for (std::size_t n = 0; n < m.chains.size(); ++n)
			if (p < m.chains[n].size())
				x = mode_n_product(x, m.chains[n][p], static_cast<int>(n) + 1);
	return x;
}

// --- Block CONFAC ------------------------------------------------------------

template <class Scalar>
struct BlockConfacModel {
	std::vector<ConfacModel<Scalar>> blocks;

	Dims dims() const { return blocks.front().dims(); }
	int order() const { return blocks.front().order(); }

	void validate() const
	{
		if (blocks.empty())
			throw ArityError("block model needs at least one block");
		for (std::size_t p = 0; p < blocks.size(); ++p) {
			blocks[p].validate();
			if (blocks[p].dims() != blocks.front().dims())
				throw ShapeError("block " + std::to_string(p + 1) + " has different output dims");
		}
	}
};

template <class Scalar>
DenseTensor<Scalar> synth_block_confac(const BlockConfacModel<Scalar>& m)
{
	m.validate();
	DenseTensor<Scalar> x = synth_confac(m.blocks.front());
	for (std::size_t p = 1; p < m.blocks.size(); ++p)
		x = x + synth_confac(m.blocks[p]);
	return x;
}

/// Block form (kron_b over S1 of A) bdiag(G^(p)_{S1;S2}) (kron_b over S2 of A)^T.
template <class Scalar>
Matrix<Scalar> block_confac_unfold(const BlockConfacModel<Scalar>& m, const ModePartition& p)
{
	m.validate();
	p.validate(m.order());
	auto partitioned = [&](int n) {
		BlockMatrix<Scalar> b;
		std::vector<Matrix<Scalar>> parts;
		for (const auto& blk : m.blocks) {
			parts.push_back(blk.factors[static_cast<std::size_t>(n - 1)]);
			b.block_cols.push_back(parts.back().cols());
		}
		Index cols = 0;
		for (const auto& q : parts)
			cols += q.cols();
		b.m.resize(parts.front().rows(), cols);
		Index c = 0;
		for (const auto& q : parts) {
			b.m.middleCols(c, q.cols()) = q;
			c += q.cols();
		}
		return b;
	};
	auto chain = [&](const Modes& modes) {
		BlockMatrix<Scalar> k = partitioned(modes.front());
		for (std::size_t i = 1; i < modes.size(); ++i)
			k = block_kron(k, partitioned(modes[i]));
		return k.m;
	};
	std::vector<Matrix<Scalar>> cores;
	for (const auto& blk : m.blocks)
		cores.push_back(matricize(blk.as_tucker().core, p));
	return chain(p.s1) * bdiag(cores) * chain(p.s2).transpose();
}

/// Rank-(1, L_p, L_p) block terms sum_p a_p o (B_p C_p^T) as CONFAC-(1,3):
/// Phi^(1) = bdiag(1^T_{L_1}, ..., 1^T_{L_P}), Phi^(2) = Phi^(3) = I_R.
template <class Scalar>
ConfacModel<Scalar> btd_to_confac(const Matrix<Scalar>& a, const std::vector<Matrix<Scalar>>& b_blocks,
                                  const std::vector<Matrix<Scalar>>& c_blocks)
{
	const auto blocks = static_cast<Index>(b_blocks.size());
	if (blocks == 0 || a.cols() != blocks || static_cast<Index>(c_blocks.size()) != blocks)
		throw ShapeError("BTD needs one column of A and one B, C block per term");
	std::vector<Matrix<Scalar>> rows;
	Index r = 0;
	for (Index p = 0; p < blocks; ++p) {
		const auto& bp = b_blocks[static_cast<std::size_t>(p)];
		const auto& cp = c_blocks[static_cast<std::size_t>(p)];
		if (bp.cols() != cp.cols() || bp.cols() < 1)
			throw ShapeError("term " + std::to_string(p + 1) + " has mismatched block widths");
		if (bp.rows() != b_blocks.front().rows() || cp.rows() != c_blocks.front().rows())
			throw ShapeError("term " + std::to_string(p + 1) + " has inconsistent row count");
		rows.push_back(ones<Scalar>(1, bp.cols()));
		r += bp.cols();
	}
	Matrix<Scalar> b(b_blocks.front().rows(), r), c(c_blocks.front().rows(), r);
	Index off = 0;
	for (Index p = 0; p < blocks; ++p) {
		const auto w = b_blocks[static_cast<std::size_t>(p)].cols();
		b.middleCols(off, w) = b_blocks[static_cast<std::size_t>(p)];
		c.middleCols(off, w) = c_blocks[static_cast<std::size_t>(p)];
		off += w;
	}
	return {{a, b, c}, {bdiag(rows), eye<Scalar>(r), eye<Scalar>(r)}, 3};
}

// --- PARATUCK-(N1,N) ---------------------------------------------------------

/// x = sum_{r} c_{r1..rN1, i_{N1+2}..i_N} prod_{n<=N1} a^(n)_{i_n,r_n} phi^(n)_{r_n,i_{N1+1}}.
template <class Scalar>
struct ParatuckModel {
	int n1 = 2;
	int n = 3;
	std::vector<Matrix<Scalar>> factors;      ///< A^(n), I_n x R_n
	std::vector<Matrix<Scalar>> constraints;  ///< Phi^(n), R_n x I_{N1+1}
	DenseTensor<Scalar> input;                ///< C, R_1..R_N1 x I_{N1+2}..I_N

	Dims ranks() const
	{
		Dims r;
		for (const auto& f : factors)
			r.push_back(f.cols());
		return r;
	}

	Dims dims() const
	{
		Dims d;
		for (const auto& f : factors)
			d.push_back(f.rows());
		d.push_back(constraints.front().cols());
		d.insert(d.end(), input.dims().begin() + n1, input.dims().end());
		return d;
	}

	void validate() const
	{
		if (n1 < 1 || n <= n1)
			throw ArityError("PARATUCK-(" + std::to_string(n1) + "," + std::to_string(n) + ") needs 1 <= N1 < N");
		if (static_cast<int>(factors.size()) != n1 || static_cast<int>(constraints.size()) != n1)
			throw ArityError("PARATUCK model needs " + std::to_string(n1) + " factors and constraints");
		if (input.order() != n - 1)
			throw ShapeError("input tensor has order " + std::to_string(input.order()) + ", expected " +
			                 std::to_string(n - 1));
		for (int k = 0; k < n1; ++k) {
			const auto uk = static_cast<std::size_t>(k);
			if (constraints[uk].rows() != factors[uk].cols())
				throw ShapeError("constraint " + detail::mode_str(uk) + " has " +
				                 std::to_string(constraints[uk].rows()) + " rows, factor has " +
				                 std::to_string(factors[uk].cols()) + " columns");
			if (constraints[uk].cols() != constraints.front().cols())
				throw ShapeError("constraints disagree on dimension of mode " + std::to_string(n1 + 1));
			if (input.dims()[uk] != factors[uk].cols())
				throw ShapeError("input tensor dim " + detail::mode_str(uk) + " differs from R_" + detail::mode_str(uk));
		}
	}
};

/// Direct evaluation of the scalar definition.
template <class Scalar>
DenseTensor<Scalar> synth_paratuck(const ParatuckModel<Scalar>& m)
{
	m.validate();
	const auto n1 = static_cast<std::size_t>(m.n1);
	const Dims ranks = m.ranks();
	const Index rtotal = product(ranks);
	const Index trail = product(std::span<const Index>(m.input.dims()).subspan(n1));
	return DenseTensor<Scalar>::generate(m.dims(), [&](const Dims& idx) {
		const Index i3 = idx[n1] - 1;
		Index t = 0;
		for (std::size_t k = n1 + 1; k < idx.size(); ++k)
			t = t * m.input.dims()[k - 1] + (idx[k] - 1);
		Scalar sum(0);
		Dims r(n1, 0);
		for (Index lin = 0; lin < rtotal; ++lin) {
			Scalar term = m.input[lin * trail + t];
			for (std::size_t k = 0; k < n1; ++k)
				term *= m.factors[k](idx[k] - 1, r[k]) * m.constraints[k](r[k], i3);
			sum += term;
			for (std::size_t k = n1; k-- > 0;) {
				if (++r[k] < ranks[k])
					break;
				r[k] = 0;
			}
		}
		return sum;
	});
}

/// F: f_{r1..rN1, i} = prod_n phi^(n)_{r_n, i}.
template <class Scalar>
DenseTensor<Scalar> allocation_tensor(const ParatuckModel<Scalar>& m)
{
	m.validate();
	Dims d = m.ranks();
	d.push_back(m.constraints.front().cols());
	return DenseTensor<Scalar>::generate(d, [&](const Dims& idx) {
		Scalar f(1);
		for (std::size_t k = 0; k < m.constraints.size(); ++k)
			f *= m.constraints[k](idx[k] - 1, idx.back() - 1);
		return f;
	});
}

/// G = F (.) C along the shared R modes, dims (R_1..R_N1, I_{N1+1}, I_{N1+2}..I_N).
template <class Scalar>
DenseTensor<Scalar> paratuck_core(const ParatuckModel<Scalar>& m)
{
	return hadamard_common_modes(allocation_tensor(m), m.input, m.n1);
}

template <class Scalar>
TuckerModel<Scalar> paratuck_as_tucker(const ParatuckModel<Scalar>& m)
{
	return {paratuck_core(m), m.factors, m.n1};
}

}  // namespace ctd
