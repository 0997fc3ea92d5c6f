#pragma once

// Sufficient conditions for essential uniqueness, evaluated numerically:
// k-rank, Kruskal (exact and generic), the relaxed third-order conditions,
// the uni-mode and PARALIND conditions, the PARATUCK-(2,4) theorem, plus
// the Tucker and shared-column gauge freedoms.

#include "ctd/equivalence.hpp"
#include "ctd/errors.hpp"
#include "ctd/kron.hpp"
#include "ctd/models.hpp"
#include "ctd/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ctd {

enum class Verdict { holds, fails, not_falsified, precondition_failed };

inline const char* to_string(Verdict v)
{
	switch (v) {
	case Verdict::holds: return "holds";
	case Verdict::fails: return "fails";
	case Verdict::not_falsified: return "not_falsified";
	case Verdict::precondition_failed: return "precondition_failed";
	}
	return "?";
}

struct FactorStat {
	std::string name;
	Index rows = 0;
	Index cols = 0;
	Index rank = 0;
	Index k_rank = 0;
};

struct UniquenessReport {
	std::string condition;
	Verdict verdict = Verdict::fails;
	double margin = 0;  ///< LHS - RHS of the governing inequality
	std::vector<FactorStat> factors;
	std::string detail;
	bool extrapolated = false;
	std::vector<Complex> witness;  ///< falsifying vector, when one was found
};

namespace detail {

template <class Derived>
bool subset_deficient(const Eigen::MatrixBase<Derived>& a, const std::vector<Index>& cols)
{
	Matrix<typename Derived::Scalar> s(a.rows(), static_cast<Index>(cols.size()));
	for (std::size_t j = 0; j < cols.size(); ++j)
		s.col(static_cast<Index>(j)) = a.col(cols[j]);
	return numeric_rank(s) < s.cols();
}

/// True if some k-subset of columns is rank deficient.
template <class Derived>
bool any_deficient_subset(const Eigen::MatrixBase<Derived>& a, Index k)
{
	const Index n = a.cols();
	std::vector<Index> idx(static_cast<std::size_t>(k));
	for (Index i = 0; i < k; ++i)
		idx[static_cast<std::size_t>(i)] = i;
	while (true) {
		if (subset_deficient(a, idx))
			return true;
		Index i = k - 1;
		while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i)
			--i;
		if (i < 0)
			return false;
		++idx[static_cast<std::size_t>(i)];
		for (Index j = i + 1; j < k; ++j)
			idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
	}
}

}  // namespace detail

/// Largest k such that every k columns are independent. Zero column gives 0.
/// Exhaustive subset search refuses beyond `max_cols` columns unless one of
/// the exact shortcuts (full column rank, dependent pair) settles it.
template <class Derived>
Index k_rank(const Eigen::MatrixBase<Derived>& a, Index max_cols = 12)
{
	const Index n = a.cols();
	if (n == 0 || a.rows() == 0)
		return 0;
	const auto s = singular_values(a);
	const double tol = static_cast<double>(rank_tolerance(a.rows(), n, s(0)));
	for (Index j = 0; j < n; ++j)
		if (static_cast<double>(a.col(j).norm()) <= tol)
			return 0;
	Index r = 0;
	for (Index i = 0; i < s.size(); ++i)
		if (static_cast<double>(s(i)) > tol)
			++r;
	if (r == n)
		return n;
	if (detail::any_deficient_subset(a, 2))
		return 1;
	if (n > max_cols)
		throw PreconditionError("k-rank needs exhaustive search over " + std::to_string(n) +
		                        " columns, above the cap of " + std::to_string(max_cols));
	for (Index k = 3; k <= r; ++k)
		if (detail::any_deficient_subset(a, k))
			return k - 1;
	return r;
}

template <class Derived>
FactorStat factor_stat(const std::string& name, const Eigen::MatrixBase<Derived>& a, Index max_cols = 12)
{
	return {name, a.rows(), a.cols(), numeric_rank(a), k_rank(a, max_cols)};
}

struct KruskalResult {
	UniquenessReport exact;
	UniquenessReport generic;
};

/// sum_n k_{A(n)} >= 2R + N - 1, and the generic form with k = min(I_n, R).
template <class Scalar>
KruskalResult kruskal_check(const std::vector<Matrix<Scalar>>& factors)
{
	if (factors.empty())
		throw ArityError("Kruskal check needs at least one factor");
	const Index r = factors.front().cols();
	const auto n = static_cast<Index>(factors.size());
	KruskalResult out;
	out.exact.condition = "kruskal";
	out.generic.condition = "kruskal_generic";
	Index sum = 0, gsum = 0;
	for (std::size_t k = 0; k < factors.size(); ++k) {
		if (factors[k].cols() != r)
			throw ShapeError("factor " + std::to_string(k + 1) + " has " + std::to_string(factors[k].cols()) +
			                 " columns, expected " + std::to_string(r));
		auto st = factor_stat("A" + std::to_string(k + 1), factors[k]);
		sum += st.k_rank;
		gsum += std::min(factors[k].rows(), r);
		out.exact.factors.push_back(st);
		out.generic.factors.push_back(st);
	}
	const Index rhs = 2 * r + n - 1;
	out.exact.margin = static_cast<double>(sum - rhs);
	out.generic.margin = static_cast<double>(gsum - rhs);
	out.exact.verdict = sum >= rhs ? Verdict::holds : Verdict::fails;
	out.generic.verdict = gsum >= rhs ? Verdict::holds : Verdict::fails;
	out.exact.detail = "sum of k-ranks " + std::to_string(sum) + " vs 2R+N-1 = " + std::to_string(rhs);
	out.generic.detail = "sum of min(I_n,R) " + std::to_string(gsum) + " vs 2R+N-1 = " + std::to_string(rhs);
	return out;
}

struct RelaxedResult {
	UniquenessReport relaxed;
	UniquenessReport strict;
};

/// C full column rank; relaxed: kA,kB >= 2 and (rA+kB >= R+2 or rB+kA >= R+2);
/// strict: kA + kB >= R+2.
template <class Scalar>
RelaxedResult relaxed_third_order_check(const Matrix<Scalar>& a, const Matrix<Scalar>& b, const Matrix<Scalar>& c)
{
	const Index r = a.cols();
	if (b.cols() != r || c.cols() != r)
		throw ShapeError("factors must share the column count");
	RelaxedResult out;
	out.relaxed.condition = "relaxed_third_order";
	out.strict.condition = "kruskal_full_rank_c";
	const auto sc = factor_stat("C", c);
	if (sc.rank != r) {
		for (auto* rep : {&out.relaxed, &out.strict}) {
			rep->verdict = Verdict::precondition_failed;
			rep->factors = {sc};
			rep->margin = static_cast<double>(sc.rank - r);
			rep->detail = "C is not full column rank (rank " + std::to_string(sc.rank) + " < R = " + std::to_string(r) + ")";
		}
		return out;
	}
	const auto sa = factor_stat("A", a), sb = factor_stat("B", b);
	const Index bound = r + 2;
	const Index m1 = std::min(sa.k_rank, sb.k_rank) - 2;
	const Index m2 = std::max(sa.rank + sb.k_rank, sb.rank + sa.k_rank) - bound;
	out.relaxed.factors = out.strict.factors = {sa, sb, sc};
	out.relaxed.margin = static_cast<double>(std::min(m1, m2));
	out.relaxed.verdict = out.relaxed.margin >= 0 ? Verdict::holds : Verdict::fails;
	out.relaxed.detail = "min(kA,kB)-2 = " + std::to_string(m1) + ", max(rA+kB, rB+kA)-(R+2) = " + std::to_string(m2);
	out.strict.margin = static_cast<double>(sa.k_rank + sb.k_rank - bound);
	out.strict.verdict = out.strict.margin >= 0 ? Verdict::holds : Verdict::fails;
	out.strict.detail = "kA+kB-(R+2) = " + std::to_string(sa.k_rank + sb.k_rank - bound);
	return out;
}

/// r_Abar + k_B + k_C >= 2R+2 for a collinear first factor Abar.
template <class Scalar>
UniquenessReport unimode_check(const Matrix<Scalar>& abar, const Matrix<Scalar>& b, const Matrix<Scalar>& c)
{
	const Index r = abar.cols();
	if (b.cols() != r || c.cols() != r)
		throw ShapeError("factors must share the column count");
	for (Index j = 0; j < r; ++j)
		if (abar.col(j).isZero(0.0))
			throw PreconditionError("Abar column " + std::to_string(j + 1) + " is all zero");
	UniquenessReport rep;
	rep.condition = "unimode";
	const auto sa = factor_stat("Abar", abar), sb = factor_stat("B", b), sc = factor_stat("C", c);
	rep.factors = {sa, sb, sc};
	rep.margin = static_cast<double>(sa.rank + sb.k_rank + sc.k_rank - (2 * r + 2));
	rep.verdict = rep.margin >= 0 ? Verdict::holds : Verdict::fails;
	rep.detail = "rAbar+kB+kC = " + std::to_string(sa.rank + sb.k_rank + sc.k_rank) + " vs 2R+2 = " +
	             std::to_string(2 * r + 2);
	return rep;
}

/// N_i = rank(Phi2 diag(Phi1_{i,.}) Phi3^T), i = 1..R1.
template <class Scalar>
std::vector<Index> paralind_Ni(const Matrix<Scalar>& phi1, const Matrix<Scalar>& phi2, const Matrix<Scalar>& phi3)
{
	if (phi2.cols() != phi1.cols() || phi3.cols() != phi1.cols())
		throw ShapeError("constraint matrices must share the column count R");
	std::vector<Index> out;
	for (Index i = 0; i < phi1.rows(); ++i)
		out.push_back(numeric_rank((phi2 * phi1.row(i).transpose().asDiagonal() * phi3.transpose()).eval()));
	return out;
}

/// Sampled falsification of the PARALIND condition for factor A of a
/// 3-way model: looks for d with at least two nonzeros and
/// rank[B Phi2 diag(d^T Phi1) (C Phi3)^T] <= max N_i. Sparse supports (up to
/// `support_cap` entries) are visited first, then dense random d. A sampled
/// check can only refute the implication, so the verdict is fails or not_falsified.
template <class Scalar>
UniquenessReport paralind_condition_probe(const ConfacModel<Scalar>& m, int trials, std::uint64_t seed,
                                          Index support_cap = 3)
{
	m.validate();
	if (m.order() != 3)
		throw ArityError("PARALIND condition is stated for third-order models");
	UniquenessReport rep;
	rep.condition = "paralind";
	const auto& a = m.factors[0];
	const auto& b = m.factors[1];
	const auto& c = m.factors[2];
	const auto phi1 = m.constraint(1), phi2 = m.constraint(2), phi3 = m.constraint(3);
	const Index r1 = phi1.rows();
	const Matrix<Scalar> g = matricize(m.as_tucker().core, ModePartition{{2, 3}, {1}});
	const Matrix<Scalar> bcg = kron(b, c) * g;
	rep.factors = {factor_stat("A", a), factor_stat("(B kron C)G", bcg)};
	if (!full_column_rank(a) || !full_column_rank(bcg)) {
		rep.verdict = Verdict::precondition_failed;
		rep.detail = "A and (B kron C)G_{R2R3 x R1} must have full column rank";
		return rep;
	}
	const auto ni = paralind_Ni(phi1, phi2, phi3);
	const Index nmax = *std::max_element(ni.begin(), ni.end());
	const Matrix<Scalar> bphi = b * phi2, cphi = c * phi3;
	rep.margin = static_cast<double>(nmax);
	if (r1 < 2) {
		rep.verdict = Verdict::not_falsified;
		rep.detail = "R1 = 1: no vector has two nonzero entries, condition vacuous";
		return rep;
	}
	std::mt19937_64 rng(seed);
	auto tries = [&](const Vector<Scalar>& d) {
		const Vector<Scalar> w = (d.transpose() * phi1).transpose();
		return numeric_rank((bphi * w.asDiagonal() * cphi.transpose()).eval()) <= nmax;
	};
	auto record = [&](const Vector<Scalar>& d, int t) {
		rep.verdict = Verdict::fails;
		for (Index i = 0; i < d.size(); ++i)
			rep.witness.push_back(Complex(d(i)));
		rep.detail = "falsified at trial " + std::to_string(t + 1) + "; max N_i = " + std::to_string(nmax);
		return rep;
	};
	int t = 0;
	// sparse supports of size 2..cap, in lexicographic order, cycled while budget remains
	std::vector<std::vector<Index>> supports;
	for (Index k = 2; k <= std::min(support_cap, r1); ++k) {
		std::vector<Index> idx(static_cast<std::size_t>(k));
		for (Index i = 0; i < k; ++i)
			idx[static_cast<std::size_t>(i)] = i;
		while (true) {
			supports.push_back(idx);
			Index i = k - 1;
			while (i >= 0 && idx[static_cast<std::size_t>(i)] == r1 - k + i)
				--i;
			if (i < 0)
				break;
			++idx[static_cast<std::size_t>(i)];
			for (Index j = i + 1; j < k; ++j)
				idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
		}
	}
	const int sparse_budget = std::min<int>(trials / 2, static_cast<int>(supports.size()) * 4);
	for (; t < sparse_budget; ++t) {
		const auto& sup = supports[static_cast<std::size_t>(t) % supports.size()];
		Vector<Scalar> d = Vector<Scalar>::Zero(r1);
		const Matrix<Scalar> vals = gaussian_matrix<Scalar>(static_cast<Index>(sup.size()), 1, rng);
		for (std::size_t j = 0; j < sup.size(); ++j)
			d(sup[j]) = vals(static_cast<Index>(j), 0);
		if (tries(d))
			return record(d, t);
	}
	for (; t < trials; ++t) {
		const Vector<Scalar> d = gaussian_matrix<Scalar>(r1, 1, rng);
		if (tries(d))
			return record(d, t);
	}
	rep.verdict = Verdict::not_falsified;
	rep.detail = "no counterexample in " + std::to_string(trials) + " trials; max N_i = " + std::to_string(nmax);
	return rep;
}

namespace detail {

template <class Scalar>
UniquenessReport paratuck_theorem(const ParatuckModel<Scalar>& m, bool extrapolated)
{
	m.validate();
	const Matrix<Scalar> k = kron(m.factors);
	const Matrix<Scalar> f = allocation_unfolding(m);
	const Matrix<Scalar> d = input_unfolding(m);
	const Index r = k.cols();
	const Index cap = std::max<Index>(12, r);
	Index ra_prod = 1;
	UniquenessReport rep;
	rep.condition = extrapolated ? "paratuck_extrapolated" : "paratuck24";
	rep.extrapolated = extrapolated;
	for (std::size_t n = 0; n < m.factors.size(); ++n) {
		rep.factors.push_back(factor_stat("A" + std::to_string(n + 1), m.factors[n], cap));
		ra_prod *= rep.factors.back().rank;
	}
	const auto sk = factor_stat("kron(A)", k, cap);
	const auto sf = factor_stat("F", f, cap);
	const auto sd = factor_stat("C_unf", d, cap);
	rep.factors.insert(rep.factors.end(), {sk, sf, sd});
	const Index bound = r + 2;
	struct Case {
		bool pre;
		Index margin;
	};
	auto eval = [&](bool pre, Index k1, Index k2, Index or1, Index or2) {
		return Case{pre, std::min(std::min(k1, k2) - 2, std::max(or1, or2) - bound)};
	};
	const Case cases[3] = {
	    eval(ra_prod == r, sf.k_rank, sd.k_rank, sf.rank + sd.k_rank, sd.rank + sf.k_rank),
	    eval(sf.rank == r, sk.k_rank, sd.k_rank, ra_prod + sd.k_rank, sd.rank + sk.k_rank),
	    eval(sd.rank == r, sk.k_rank, sf.k_rank, ra_prod + sf.k_rank, sf.rank + sk.k_rank),
	};
	const char* names[3] = {"factors full column rank", "allocation unfolding full column rank",
	                        "input unfolding full column rank"};
	int best = -1;
	double best_margin = -std::numeric_limits<double>::infinity();
	bool any_pre = false;
	for (int i = 0; i < 3; ++i) {
		rep.detail += "case " + std::to_string(i + 1) + " (" + names[i] + "): " +
		              (cases[i].pre ? "applies" : "n/a") + ", margin " + std::to_string(cases[i].margin) + "; ";
		if (cases[i].pre)
			any_pre = true;
	}
	for (int i = 0; i < 3; ++i) {
		if (any_pre && !cases[i].pre)
			continue;
		if (static_cast<double>(cases[i].margin) > best_margin) {
			best_margin = static_cast<double>(cases[i].margin);
			best = i;
		}
	}
	rep.margin = best_margin;
	rep.verdict = any_pre && best_margin >= 0 ? Verdict::holds : Verdict::fails;
	if (rep.verdict == Verdict::holds)
		rep.detail += "holds via case " + std::to_string(best + 1);
	else
		rep.detail += "no case holds";
	return rep;
}

}  // namespace detail

/// The three-case theorem on (A1 kron A2, (Phi1 kr Phi2)^T, C_{I4 x R1R2}).
template <class Scalar>
UniquenessReport paratuck24_uniqueness(const ParatuckModel<Scalar>& m)
{
	if (m.n1 != 2 || m.n != 4)
		throw ArityError("paratuck24_uniqueness needs a PARATUCK-(2,4) model");
	return detail::paratuck_theorem(m, false);
}

/// Same three cases with kron over all N1 factors, kr over all Phi, and
/// C_{I_{N1+2}..I_N x R}. Unproved outside (N1, N) = (2, 4), so reports are labeled extrapolated.
template <class Scalar>
UniquenessReport paratuck_uniqueness_extrapolated(const ParatuckModel<Scalar>& m)
{
	return detail::paratuck_theorem(m, !(m.n1 == 2 && m.n == 4));
}

/// Factors A^(n) T^(n) and core G x_n T^(n)^{-1}; synthesis is unchanged.
template <class Scalar>
TuckerModel<Scalar> tucker_gauge_transform(const TuckerModel<Scalar>& m, const std::vector<Matrix<Scalar>>& ts,
                                           double max_condition = 1e12)
{
	m.validate();
	if (static_cast<int>(ts.size()) != m.n1())
		throw ArityError("expected " + std::to_string(m.n1()) + " transforms, got " + std::to_string(ts.size()));
	TuckerModel<Scalar> out = m;
	for (std::size_t n = 0; n < ts.size(); ++n) {
		const auto& t = ts[n];
		if (t.rows() != t.cols() || t.rows() != m.core.dims()[n])
			throw ShapeError("transform " + std::to_string(n + 1) + " must be square of size " +
			                 std::to_string(m.core.dims()[n]));
		const double cond = condition_number(t);
		if (!(cond <= max_condition))
			throw NumericError("transform " + std::to_string(n + 1) + " is numerically singular (condition " +
			                   std::to_string(cond) + ")");
		out.factors[n] = m.factors[n] * t;
		out.core = mode_n_product(out.core, Matrix<Scalar>(t.inverse()), static_cast<int>(n) + 1);
	}
	return out;
}

/// A = [A1 a a], B = [B1 b b], C = [C1 C2], D = [D1 D2] with C2, D2 two columns wide.
template <class Scalar>
struct SharedColumnConstruction {
	Matrix<Scalar> a1, b1, c1, c2, d1, d2;
	Vector<Scalar> a, b;

	ParafacModel<Scalar> model() const
	{
		auto cat = [](const Matrix<Scalar>& x, const Matrix<Scalar>& y) {
			Matrix<Scalar> z(x.rows(), x.cols() + y.cols());
			z << x, y;
			return z;
		};
		Matrix<Scalar> ta(a.size(), 2), tb(b.size(), 2);
		ta << a, a;
		tb << b, b;
		return {{cat(a1, ta), cat(b1, tb), cat(c1, c2), cat(d1, d2)}, {}};
	}

	static SharedColumnConstruction random(Index i, Index j, Index k, Index l, Index r, std::mt19937_64& rng)
	{
		if (r < 2)
			throw ShapeError("construction needs R >= 2");
		return {gaussian_matrix<Scalar>(i, r - 2, rng), gaussian_matrix<Scalar>(j, r - 2, rng),
		        gaussian_matrix<Scalar>(k, r - 2, rng), gaussian_matrix<Scalar>(k, 2, rng),
		        gaussian_matrix<Scalar>(l, r - 2, rng), gaussian_matrix<Scalar>(l, 2, rng),
		        gaussian_matrix<Scalar>(i, 1, rng), gaussian_matrix<Scalar>(j, 1, rng)};
	}
};

enum class GaugeBlock { shared, distinct };

/// Applies (C_blk T, D_blk T^{-T}) to the two shared columns, or to the last
/// two distinct columns (needs R >= 4), and reports whether every slice
/// X_{ij..} = C D_j(B) D_i(A) D^T stays within `tol` relative.
template <class Scalar>
bool rotational_indeterminacy_demo(const SharedColumnConstruction<Scalar>& s, const Matrix<Scalar>& t,
                                   GaugeBlock block = GaugeBlock::shared, double tol = 1e-10)
{
	if (t.rows() != 2 || t.cols() != 2)
		throw ShapeError("rotation must be 2x2");
	if (!(condition_number(t) <= 1e12))
		throw NumericError("rotation matrix is singular");
	const auto m = s.model();
	auto moved = m;
	const Index r = m.rank();
	const Index off = block == GaugeBlock::shared ? r - 2 : r - 4;
	if (off < 0)
		throw ShapeError("distinct block needs R >= 4");
	const Matrix<Scalar> tinv_t = t.inverse().transpose();
	moved.factors[2].middleCols(off, 2) = m.factors[2].middleCols(off, 2) * t;
	moved.factors[3].middleCols(off, 2) = m.factors[3].middleCols(off, 2) * tinv_t;
	auto slice_of = [](const ParafacModel<Scalar>& p, Index i, Index j) {
		return Matrix<Scalar>(p.factors[2] * p.factors[1].row(j).transpose().asDiagonal() *
		                      p.factors[0].row(i).transpose().asDiagonal() * p.factors[3].transpose());
	};
	for (Index i = 0; i < m.factors[0].rows(); ++i)
		for (Index j = 0; j < m.factors[1].rows(); ++j)
			if (relative_error(slice_of(moved, i, j), slice_of(m, i, j)) > tol)
				return false;
	return true;
}

}  // namespace ctd
