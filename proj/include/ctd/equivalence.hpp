#pragma once

// PARATUCK models rewritten as constrained PARAFAC models with
// Psi^(n) = 1^T kron .. kron I_{R_n} kron .. kron 1^T constraints.

#include "ctd/errors.hpp"
#include "ctd/kron.hpp"
#include "ctd/models.hpp"
#include "ctd/tensor.hpp"

#include <string>
#include <vector>

namespace ctd {

/// Psi^(n) for rank tuple (R_1..R_N): R_n x prod R_m, canonical columns.
template <class Scalar = double>
Matrix<Scalar> psi_constraint(const Dims& ranks, int n)
{
	if (n < 1 || n > static_cast<int>(ranks.size()))
		throw ArityError("Psi index " + std::to_string(n) + " out of range for " + std::to_string(ranks.size()) +
		                 " ranks");
	return replication_matrix<Scalar>(ranks, n);
}

/// (kr_{n<=N1} Phi^(n))^T: the mode-1 unfolding of the allocation tensor.
template <class Scalar>
Matrix<Scalar> allocation_unfolding(const ParatuckModel<Scalar>& m)
{
	return khatri_rao(m.constraints).transpose();
}

/// C_{I_N x R}: trailing mode of the input tensor against its combined R modes.
template <class Scalar>
Matrix<Scalar> input_unfolding(const ParatuckModel<Scalar>& m)
{
	Modes rs, trail;
	for (int k = 1; k <= m.n1; ++k)
		rs.push_back(k);
	for (int k = m.n1 + 1; k <= m.input.order(); ++k)
		trail.push_back(k);
	return matricize(m.input, {trail, rs});
}

/// PARATUCK-(N1, N1+1) or PARATUCK-(N1, N1+2) as PARAFAC-N with R = prod R_n:
/// factors A^(n) Psi^(n), then (kr Phi)^T [diag(vec C) when N = N1+1], then C_{I_N x R}.
template <class Scalar>
ParafacModel<Scalar> paratuck_general_to_parafac(const ParatuckModel<Scalar>& m)
{
	m.validate();
	if (m.n != m.n1 + 2 && m.n != m.n1 + 1)
		throw ArityError("constrained PARAFAC rewriting is defined for N = N1+1 or N = N1+2, got (" +
		                 std::to_string(m.n1) + "," + std::to_string(m.n) + ")");
	const Dims ranks = m.ranks();
	ParafacModel<Scalar> p;
	for (int k = 1; k <= m.n1; ++k)
		p.factors.push_back(m.factors[static_cast<std::size_t>(k - 1)] * psi_constraint<Scalar>(ranks, k));
	if (m.n == m.n1 + 1) {
		p.factors.push_back(allocation_unfolding(m) * vectorize(m.input).asDiagonal());
	} else {
		p.factors.push_back(allocation_unfolding(m));
		p.factors.push_back(input_unfolding(m));
	}
	return p;
}

template <class Scalar>
ParafacModel<Scalar> paratuck24_to_parafac4(const ParatuckModel<Scalar>& m)
{
	if (m.n1 != 2 || m.n != 4)
		throw ArityError("expected a PARATUCK-(2,4) model, got (" + std::to_string(m.n1) + "," + std::to_string(m.n) +
		                 ")");
	return paratuck_general_to_parafac(m);
}

/// Third factor (Phi^(1) kr Phi^(2))^T diag(vec(C^T)).
template <class Scalar>
ParafacModel<Scalar> paratuck2_to_parafac3(const ParatuckModel<Scalar>& m)
{
	if (m.n1 != 2 || m.n != 3)
		throw ArityError("expected a PARATUCK-2 model, got (" + std::to_string(m.n1) + "," + std::to_string(m.n) + ")");
	return paratuck_general_to_parafac(m);
}

/// X_{I1..IN1 x I_{N1+1} I_N} = (kron A^(n)) (F kr D)^T for N = N1+2.
template <class Scalar>
Matrix<Scalar> paratuck_contracted_unfolding(const ParatuckModel<Scalar>& m)
{
	m.validate();
	if (m.n != m.n1 + 2)
		throw ArityError("contracted unfolding needs N = N1+2");
	return kron(m.factors) * khatri_rao(allocation_unfolding(m), input_unfolding(m)).transpose();
}

/// Core as I_{.,R} x_n Psi^(n) x_{N1+1} F-bar [x_{N1+2} C_{I_N x R}].
template <class Scalar>
DenseTensor<Scalar> paratuck_core_mode_product(const ParatuckModel<Scalar>& m)
{
	const ParafacModel<Scalar> p = paratuck_general_to_parafac(m);
	const Dims ranks = m.ranks();
	DenseTensor<Scalar> g = identity_tensor<Scalar>(m.n, product(ranks));
	for (int k = 1; k <= m.n1; ++k)
		g = mode_n_product(g, psi_constraint<Scalar>(ranks, k), k);
	for (int k = m.n1 + 1; k <= m.n; ++k)
		g = mode_n_product(g, p.factors[static_cast<std::size_t>(k - 1)], k);
	return g;
}

/// Replays the change of variables behind the (2,4) rewriting: builds the
/// third-order extension tensors entrywise and checks their mode-1
/// unfoldings against A^(1) Psi1, A^(2) Psi2, (Phi1 kr Phi2)^T and C_{I4 x R1R2}.
template <class Scalar>
bool verify_appendix_A4(const ParatuckModel<Scalar>& m, const Matrix<Scalar>& psi1, const Matrix<Scalar>& psi2,
                        double tol = 1e-12)
{
	m.validate();
	if (m.n1 != 2 || m.n != 4)
		throw ArityError("verify_appendix_A4 needs a PARATUCK-(2,4) model");
	const Index r1 = m.factors[0].cols(), r2 = m.factors[1].cols();
	if (psi1.rows() != r1 || psi2.rows() != r2 || psi1.cols() != r1 * r2 || psi2.cols() != r1 * r2)
		return false;
	const auto& a1 = m.factors[0];
	const auto& a2 = m.factors[1];
	const auto& phi1 = m.constraints[0];
	const auto& phi2 = m.constraints[1];
	const Index i3 = phi1.cols(), i4 = m.input.dim(3);
	const auto ta = DenseTensor<Scalar>::generate({a1.rows(), r1, r2}, [&](const Dims& i) { return a1(i[0] - 1, i[1] - 1); });
	const auto tb = DenseTensor<Scalar>::generate({a2.rows(), r1, r2}, [&](const Dims& i) { return a2(i[0] - 1, i[2] - 1); });
	const auto tf = DenseTensor<Scalar>::generate(
	    {i3, r1, r2}, [&](const Dims& i) { return phi1(i[1] - 1, i[0] - 1) * phi2(i[2] - 1, i[0] - 1); });
	const auto td = DenseTensor<Scalar>::generate({i4, r1, r2}, [&](const Dims& i) { return m.input.at({i[1], i[2], i[0]}); });
	auto close = [&](const Matrix<Scalar>& x, const Matrix<Scalar>& y) {
		return x.rows() == y.rows() && x.cols() == y.cols() && relative_error(x, y) <= tol;
	};
	const Matrix<Scalar> ua = unfold(ta, 1), ub = unfold(tb, 1), uf = unfold(tf, 1), ud = unfold(td, 1);
	if (!close(ua, a1 * psi1) || !close(ub, a2 * psi2))
		return false;
	if (!close(uf, khatri_rao(phi1, phi2).transpose()) || !close(ud, input_unfolding(m)))
		return false;
	const ParafacModel<Scalar> rewritten{{ua, ub, uf, ud}, {}};
	return relative_error(synth_parafac(rewritten), synth_paratuck(m)) <= tol;
}

template <class Scalar>
bool verify_appendix_A4(const ParatuckModel<Scalar>& m, double tol = 1e-12)
{
	const Dims ranks = m.ranks();
	return verify_appendix_A4(m, psi_constraint<Scalar>(ranks, 1), psi_constraint<Scalar>(ranks, 2), tol);
}

}  // namespace ctd
