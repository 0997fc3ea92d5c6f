#pragma once

// Least-squares estimation: ALS for PARAFAC and for CONFAC with known
// constraint matrices, the Kronecker least-squares receiver for
// PARATUCK-(2,4) with known allocations and input tensor, nearest Kronecker
// factorization, and factor-match scoring.

#include "ctd/equivalence.hpp"
#include "ctd/errors.hpp"
#include "ctd/kron.hpp"
#include "ctd/models.hpp"
#include "ctd/numeric.hpp"
#include "ctd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ctd {

enum class StopReason { tolerance, max_iters, stall };

inline const char* to_string(StopReason s)
{
	switch (s) {
	case StopReason::tolerance: return "tolerance";
	case StopReason::max_iters: return "max_iters";
	case StopReason::stall: return "stall";
	}
	return "?";
}

enum class Init { random, given };

template <class Scalar = double>
struct FitOptions {
	int max_iters = 500;
	double tol = 1e-10;  ///< threshold on |e_t - e_{t-1}| / max(e_{t-1}, 1e-15)
	std::uint64_t seed = 0;
	Init init = Init::random;
	std::vector<Matrix<Scalar>> initial;  ///< used when init == given

	void validate() const
	{
		if (!(tol > 0))
			throw PreconditionError("tolerance must be positive");
		if (max_iters < 1)
			throw PreconditionError("max_iters must be at least 1");
	}
};

struct FitReport {
	int iterations = 0;
	std::vector<double> rel_error_history;
	bool converged = false;
	StopReason stop_reason = StopReason::max_iters;
	bool regularized = false;  ///< a normal-equation system needed the Tikhonov floor

	double final_error() const
	{
		return rel_error_history.empty() ? std::numeric_limits<double>::quiet_NaN() : rel_error_history.back();
	}
};

template <class Model>
struct FitResult {
	Model model;
	FitReport report;
};

namespace detail {

/// Solves A V = M for A, V Hermitian positive semidefinite. A numerically
/// singular V gets the floor 1e-12 sigma_max on its diagonal.
template <class Scalar>
Matrix<Scalar> solve_normal(const Matrix<Scalar>& v, const Matrix<Scalar>& m, bool& regularized)
{
	const auto s = singular_values(v);
	Matrix<Scalar> vt = v.transpose();
	if (s.size() == 0 || numeric_rank(v) < v.rows()) {
		regularized = true;
		const double floor = 1e-12 * (s.size() ? static_cast<double>(s(0)) : 1.0);
		vt.diagonal().array() += Scalar(floor > 0 ? floor : 1e-300);
	}
	return vt.ldlt().solve(m.transpose()).transpose();
}

template <class Scalar>
Matrix<Scalar> conj_if(const Matrix<Scalar>& m)
{
	if constexpr (is_complex_v<Scalar>)
		return m.conjugate();
	else
		return m;
}

/// ALS on X_n ~ A^(n) Phi^(n) Z_n^T with Z_n the Khatri-Rao product of the
/// cyclic companions' constrained factors. phis[n] empty = identity.
template <class Scalar>
FitReport als_sweeps(const DenseTensor<Scalar>& x, std::vector<Matrix<Scalar>>& a,
                     const std::vector<Matrix<Scalar>>& phis, const FitOptions<Scalar>& opts)
{
	const int order = x.order();
	std::vector<Matrix<Scalar>> xn;
	for (int n = 1; n <= order; ++n)
		xn.push_back(unfold(x, n));
	const double xnorm = std::max(x.norm(), std::numeric_limits<double>::min());
	auto constrained = [&](std::size_t n) {
		return phis[n].size() ? Matrix<Scalar>(a[n] * phis[n]) : a[n];
	};
	std::vector<Matrix<Scalar>> abar;
	for (std::size_t n = 0; n < a.size(); ++n)
		abar.push_back(constrained(n));

	FitReport rep;
	constexpr double exact_fit_floor = 1e-14;
	double prev = std::numeric_limits<double>::quiet_NaN();
	for (int it = 1; it <= opts.max_iters; ++it) {
		double err = 0;
		for (int n = 1; n <= order; ++n) {
			const auto un = static_cast<std::size_t>(n - 1);
			std::vector<Matrix<Scalar>> others;
			for (int m : ModePartition::cyclic_rest(n, order))
				others.push_back(abar[static_cast<std::size_t>(m - 1)]);
			const Matrix<Scalar> z = khatri_rao(others);
			const Matrix<Scalar> zc = conj_if(z);
			Matrix<Scalar> v = Matrix<Scalar>::Ones(z.cols(), z.cols());
			for (const auto& o : others)
				v = v.cwiseProduct(Matrix<Scalar>(o.transpose() * conj_if(o)));
			Matrix<Scalar> rhs = xn[un] * zc;
			if (phis[un].size()) {
				const Matrix<Scalar> ph = phis[un].adjoint();
				v = phis[un] * v * ph;
				rhs = rhs * ph;
			}
			a[un] = solve_normal(v, rhs, rep.regularized);
			abar[un] = constrained(un);
			if (n == order)
				err = (xn[un] - abar[un] * z.transpose()).norm() / xnorm;
		}
		rep.rel_error_history.push_back(err);
		rep.iterations = it;
		if (it > 1) {
			if (err > prev + 1e-14) {
				rep.stop_reason = StopReason::stall;
				return rep;
			}
			// relative change, or an exact fit already at rounding level
			if (std::abs(err - prev) / std::max(prev, 1e-15) < opts.tol || err <= exact_fit_floor) {
				rep.converged = true;
				rep.stop_reason = StopReason::tolerance;
				return rep;
			}
		}
		prev = err;
	}
	rep.stop_reason = StopReason::max_iters;
	return rep;
}

template <class Scalar>
std::vector<Matrix<Scalar>> init_factors(const Dims& rows, const Dims& cols, const FitOptions<Scalar>& opts)
{
	std::vector<Matrix<Scalar>> a;
	if (opts.init == Init::given) {
		if (opts.initial.size() != rows.size())
			throw ShapeError("expected " + std::to_string(rows.size()) + " initial factors");
		for (std::size_t n = 0; n < rows.size(); ++n)
			if (opts.initial[n].rows() != rows[n] || opts.initial[n].cols() != cols[n])
				throw ShapeError("initial factor " + std::to_string(n + 1) + " has the wrong shape");
		return opts.initial;
	}
	std::mt19937_64 rng(opts.seed);
	for (std::size_t n = 0; n < rows.size(); ++n)
		a.push_back(gaussian_matrix<Scalar>(rows[n], cols[n], rng));
	return a;
}

}  // namespace detail

/// Rank-r PARAFAC by ALS. The returned factors have unit-norm columns in
/// all modes but the last, which absorbs the scale.
template <class Scalar>
FitResult<ParafacModel<Scalar>> als_parafac(const DenseTensor<Scalar>& x, Index r, const FitOptions<Scalar>& opts = {})
{
	opts.validate();
	if (r < 1)
		throw PreconditionError("rank must be at least 1");
	if (x.order() < 3)
		throw PreconditionError("ALS needs a tensor of order at least 3");
	auto a = detail::init_factors(x.dims(), Dims(x.dims().size(), r), opts);
	const std::vector<Matrix<Scalar>> phis(a.size());
	FitReport rep = detail::als_sweeps(x, a, phis, opts);
	for (std::size_t n = 0; n + 1 < a.size(); ++n)
		for (Index c = 0; c < r; ++c) {
			const auto nrm = a[n].col(c).norm();
			if (nrm > 0) {
				a[n].col(c) /= nrm;
				a.back().col(c) *= nrm;
			}
		}
	return {{a, {}}, rep};
}

/// ALS over A^(n) with known Phi^(n) for the first constraints.size() modes
/// (trailing modes unconstrained). Identity constraints are skipped, so
/// Phi = I reproduces als_parafac's error trajectory exactly.
template <class Scalar>
FitResult<ConfacModel<Scalar>> als_confac(const DenseTensor<Scalar>& x, const std::vector<Matrix<Scalar>>& constraints,
                                          const FitOptions<Scalar>& opts = {})
{
	opts.validate();
	if (x.order() < 3)
		throw PreconditionError("ALS needs a tensor of order at least 3");
	if (constraints.empty() || static_cast<int>(constraints.size()) > x.order())
		throw ArityError("expected between 1 and " + std::to_string(x.order()) + " constraint matrices");
	const Index r = constraints.front().cols();
	Dims cols;
	std::vector<Matrix<Scalar>> phis(static_cast<std::size_t>(x.order()));
	for (std::size_t n = 0; n < phis.size(); ++n) {
		if (n < constraints.size()) {
			const auto& phi = constraints[n];
			if (phi.cols() != r)
				throw ShapeError("constraint " + std::to_string(n + 1) + " has " + std::to_string(phi.cols()) +
				                 " columns, expected " + std::to_string(r));
			if (numeric_rank(phi) != phi.rows())
				throw PreconditionError("constraint " + std::to_string(n + 1) + " is not full row rank");
			cols.push_back(phi.rows());
			if (!(phi.rows() == phi.cols() && phi.isIdentity(0.0)))
				phis[n] = phi;
		} else {
			cols.push_back(r);
		}
	}
	auto a = detail::init_factors(x.dims(), cols, opts);
	FitReport rep = detail::als_sweeps(x, a, phis, opts);
	ConfacModel<Scalar> m{a, constraints, static_cast<int>(constraints.size())};
	return {m, rep};
}

/// argmin ||K - A kron B||_F via the rank-one approximation of the
/// rearranged matrix. Gauge: ||A||_F = 1 with a nonnegative real leading entry.
template <class Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> nearest_kron_factor(const Matrix<Scalar>& k, std::pair<Index, Index> shape1,
                                                              std::pair<Index, Index> shape2)
{
	const auto [m1, n1] = shape1;
	const auto [m2, n2] = shape2;
	if (k.rows() != m1 * m2 || k.cols() != n1 * n2)
		throw ShapeError("matrix is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) +
		                 ", shapes imply " + std::to_string(m1 * m2) + "x" + std::to_string(n1 * n2));
	Matrix<Scalar> r(m1 * n1, m2 * n2);
	for (Index j = 0; j < n1; ++j)
		for (Index i = 0; i < m1; ++i)
			for (Index l = 0; l < n2; ++l)
				for (Index q = 0; q < m2; ++q)
					r(i + j * m1, q + l * m2) = k(i * m2 + q, j * n2 + l);
	Eigen::JacobiSVD<Matrix<Scalar>> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
	const double sigma = static_cast<double>(svd.singularValues()(0));
	Vector<Scalar> u = svd.matrixU().col(0);
	Vector<Scalar> v = svd.matrixV().col(0);
	Index lead = 0;
	const double utol = 1e-12;
	while (lead + 1 < u.size() && std::abs(u(lead)) <= utol)
		++lead;
	Scalar phase(1);
	if (std::abs(u(lead)) > 0)
		phase = std::abs(u(lead)) / u(lead);
	u *= phase;
	Vector<Scalar> bv;
	if constexpr (is_complex_v<Scalar>)
		bv = sigma * std::conj(phase) * v.conjugate();
	else
		bv = sigma * phase * v;
	Matrix<Scalar> a = Eigen::Map<Matrix<Scalar>>(u.data(), m1, n1);
	Matrix<Scalar> b = Eigen::Map<Matrix<Scalar>>(bv.data(), m2, n2);
	return {a, b};
}

template <class Scalar>
struct KronLsResult {
	Matrix<Scalar> a1;
	Matrix<Scalar> a2;
	Matrix<Scalar> kron_estimate;  ///< K-hat, estimate of A1 kron A2
	FitReport report;
};

/// PARATUCK-(2,4) receiver with Phi^(1), Phi^(2) and C known:
/// K = X_{I1I2 x I3I4} [(F kr D)^T]^+, then K split into A1 kron A2.
template <class Scalar>
KronLsResult<Scalar> paratuck24_kron_ls(const DenseTensor<Scalar>& x, const Matrix<Scalar>& phi1,
                                        const Matrix<Scalar>& phi2, const DenseTensor<Scalar>& c)
{
	if (x.order() != 4 || c.order() != 3)
		throw ArityError("expected a fourth-order tensor and a third-order input tensor");
	if (phi1.cols() != x.dim(3) || phi2.cols() != x.dim(3) || c.dim(1) != phi1.rows() || c.dim(2) != phi2.rows() ||
	    c.dim(3) != x.dim(4))
		throw ShapeError("allocation matrices or input tensor do not conform to the data");
	const Index r1 = phi1.rows(), r2 = phi2.rows();
	const Matrix<Scalar> f = khatri_rao(phi1, phi2).transpose();
	const Matrix<Scalar> d = matricize(c, ModePartition{{3}, {1, 2}});
	const Matrix<Scalar> w = khatri_rao(f, d);
	if (numeric_rank(w) < w.cols()) {
		std::string cols;
		Matrix<Scalar> acc(w.rows(), 0);
		Index rank = 0;
		for (Index j = 0; j < w.cols(); ++j) {
			Matrix<Scalar> next(w.rows(), acc.cols() + 1);
			next << acc, w.col(j);
			const Index nr = numeric_rank(next);
			if (nr == rank) {
				cols += (cols.empty() ? "" : ",") + std::to_string(j + 1);
			} else {
				rank = nr;
				acc = next;
			}
		}
		throw IdentifiabilityError("(F kr D) is rank deficient (rank " + std::to_string(numeric_rank(w)) + " < " +
		                           std::to_string(w.cols()) + "); dependent columns: " + cols);
	}
	const Matrix<Scalar> x12 = matricize(x, ModePartition{{1, 2}, {3, 4}});
	const Matrix<Scalar> khat = w.colPivHouseholderQr().solve(x12.transpose()).transpose();
	auto [a1, a2] = nearest_kron_factor(khat, {x.dim(1), r1}, {x.dim(2), r2});
	KronLsResult<Scalar> out{a1, a2, khat, {}};
	const Matrix<Scalar> recon = kron(a1, a2) * w.transpose();
	out.report.iterations = 1;
	out.report.rel_error_history = {relative_error(recon, x12)};
	out.report.converged = true;
	out.report.stop_reason = StopReason::tolerance;
	return out;
}

/// Mean over greedily matched components of prod_n |cos(est_n, truth_n)|.
/// 1 means equal up to column permutation and scaling.
template <class Scalar>
double factor_congruence(const ParafacModel<Scalar>& est, const ParafacModel<Scalar>& truth)
{
	est.validate();
	truth.validate();
	if (est.order() != truth.order() || est.rank() != truth.rank() || est.dims() != truth.dims())
		throw ShapeError("models must share order, dims and rank");
	const Index r = est.rank();
	Matrix<double> score = Matrix<double>::Ones(r, r);
	for (int n = 0; n < est.order(); ++n) {
		const auto& e = est.factors[static_cast<std::size_t>(n)];
		const auto& t = truth.factors[static_cast<std::size_t>(n)];
		for (Index i = 0; i < r; ++i)
			for (Index j = 0; j < r; ++j) {
				const double den = static_cast<double>(e.col(i).norm() * t.col(j).norm());
				score(i, j) *= den > 0 ? std::abs(e.col(i).dot(t.col(j))) / den : 0.0;
			}
	}
	std::vector<bool> used_e(static_cast<std::size_t>(r)), used_t(static_cast<std::size_t>(r));
	double total = 0;
	for (Index k = 0; k < r; ++k) {
		double best = -1;
		Index bi = 0, bj = 0;
		for (Index i = 0; i < r; ++i)
			for (Index j = 0; j < r; ++j)
				if (!used_e[static_cast<std::size_t>(i)] && !used_t[static_cast<std::size_t>(j)] && score(i, j) > best) {
					best = score(i, j);
					bi = i;
					bj = j;
				}
		used_e[static_cast<std::size_t>(bi)] = used_t[static_cast<std::size_t>(bj)] = true;
		total += best;
	}
	return std::min(1.0, total / static_cast<double>(r));
}

}  // namespace ctd
