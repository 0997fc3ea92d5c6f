#pragma once

// Dense N-way tensors with lexicographic storage (last index varies
// fastest), and the relabeling / contraction operations built on top:
// vectorization, mode combination, matricization, slicing, and mode-n
// products.
//
// Mode numbers and element multi-indices are 1-based at this API.

#include "ctd/errors.hpp"
#include "ctd/numeric.hpp"

#include <algorithm>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ctd {

inline Index product(std::span<const Index> dims)
{
	Index p = 1;
	for (Index d : dims)
		p *= d;
	return p;
}

inline void check_dims(std::span<const Index> dims)
{
	if (dims.empty())
		throw ShapeError("tensor order must be at least 1");
	for (std::size_t n = 0; n < dims.size(); ++n)
		if (dims[n] < 1)
			throw ShapeError("dimension of mode " + std::to_string(n + 1) + " must be positive");
}

/// 1-based position of the 1-based multi-index `idx` in last-index-fastest order.
inline Index linear_index(std::span<const Index> dims, std::span<const Index> idx)
{
	if (idx.size() != dims.size())
		throw ShapeError("multi-index has " + std::to_string(idx.size()) + " components, tensor order is " +
		                 std::to_string(dims.size()));
	Index lin = 0;
	for (std::size_t n = 0; n < dims.size(); ++n) {
		if (idx[n] < 1 || idx[n] > dims[n])
			throw BoundsError("index " + std::to_string(idx[n]) + " out of range [1, " + std::to_string(dims[n]) +
			                  "] for mode " + std::to_string(n + 1));
		lin = lin * dims[n] + (idx[n] - 1);
	}
	return lin + 1;
}

inline Index linear_index(std::initializer_list<Index> dims, std::initializer_list<Index> idx)
{
	return linear_index(std::span<const Index>(dims.begin(), dims.size()),
	                    std::span<const Index>(idx.begin(), idx.size()));
}

/// Inverse of linear_index.
inline Dims multi_index(std::span<const Index> dims, Index lin)
{
	const Index total = product(dims);
	if (lin < 1 || lin > total)
		throw BoundsError("linear index " + std::to_string(lin) + " out of range [1, " + std::to_string(total) + "]");
	Dims idx(dims.size());
	Index rem = lin - 1;
	for (std::size_t n = dims.size(); n-- > 0;) {
		idx[n] = rem % dims[n] + 1;
		rem /= dims[n];
	}
	return idx;
}

template <class Scalar>
class DenseTensor {
public:
	using scalar_type = Scalar;

	DenseTensor() : dims_{1}, data_(1, Scalar(0)) {}

	explicit DenseTensor(Dims dims) : dims_(std::move(dims))
	{
		check_dims(dims_);
		data_.assign(static_cast<std::size_t>(product(dims_)), Scalar(0));
	}

	DenseTensor(Dims dims, std::vector<Scalar> data) : dims_(std::move(dims)), data_(std::move(data))
	{
		check_dims(dims_);
		if (static_cast<Index>(data_.size()) != product(dims_))
			throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match product of dims " +
			                 std::to_string(product(dims_)));
	}

	/// Fill from f(idx) with idx a 1-based multi-index.
	template <class F>
	static DenseTensor generate(Dims dims, F&& f)
	{
		DenseTensor t(std::move(dims));
		Dims idx(t.dims_.size(), 1);
		for (auto& v : t.data_) {
			v = f(static_cast<const Dims&>(idx));
			for (std::size_t n = idx.size(); n-- > 0;) {
				if (++idx[n] <= t.dims_[n])
					break;
				idx[n] = 1;
			}
		}
		return t;
	}

	const Dims& dims() const noexcept { return dims_; }
	int order() const noexcept { return static_cast<int>(dims_.size()); }
	Index size() const noexcept { return static_cast<Index>(data_.size()); }

	Index dim(int mode) const
	{
		if (mode < 1 || mode > order())
			throw BoundsError("mode " + std::to_string(mode) + " out of range for order " + std::to_string(order()));
		return dims_[static_cast<std::size_t>(mode - 1)];
	}

	const std::vector<Scalar>& data() const noexcept { return data_; }
	std::vector<Scalar>& data() noexcept { return data_; }

	Scalar at(std::span<const Index> idx) const { return data_[static_cast<std::size_t>(linear_index(dims_, idx) - 1)]; }
	Scalar& at(std::span<const Index> idx) { return data_[static_cast<std::size_t>(linear_index(dims_, idx) - 1)]; }
	Scalar at(std::initializer_list<Index> idx) const { return at(std::span<const Index>(idx.begin(), idx.size())); }
	Scalar& at(std::initializer_list<Index> idx) { return at(std::span<const Index>(idx.begin(), idx.size())); }

	/// 0-based flat access.
	Scalar operator[](Index i) const { return data_[static_cast<std::size_t>(i)]; }
	Scalar& operator[](Index i) { return data_[static_cast<std::size_t>(i)]; }

	Eigen::Map<const Vector<Scalar>> flat() const { return {data_.data(), size()}; }
	Eigen::Map<Vector<Scalar>> flat() { return {data_.data(), size()}; }

	double norm() const { return static_cast<double>(flat().norm()); }

	friend bool operator==(const DenseTensor& a, const DenseTensor& b)
	{
		return a.dims_ == b.dims_ && a.data_ == b.data_;
	}

private:
	Dims dims_;
	std::vector<Scalar> data_;
};

template <class Scalar>
DenseTensor<Scalar> operator+(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b)
{
	if (a.dims() != b.dims())
		throw ShapeError("tensor sum requires equal dims");
	DenseTensor<Scalar> c = a;
	c.flat() += b.flat();
	return c;
}

template <class Scalar>
DenseTensor<Scalar> operator-(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b)
{
	if (a.dims() != b.dims())
		throw ShapeError("tensor difference requires equal dims");
	DenseTensor<Scalar> c = a;
	c.flat() -= b.flat();
	return c;
}

template <class Scalar>
DenseTensor<Scalar> operator*(Scalar s, const DenseTensor<Scalar>& a)
{
	DenseTensor<Scalar> c = a;
	c.flat() *= s;
	return c;
}

/// ||a - b||_F / ||b||_F.
template <class Scalar>
double relative_error(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b)
{
	if (a.dims() != b.dims())
		throw ShapeError("relative_error requires equal dims");
	return relative_error(a.flat(), b.flat());
}

/// Ordered split of {1..N} into row modes s1 and column modes s2.
struct ModePartition {
	Modes s1;
	Modes s2;

	/// Throws PartitionError unless s1, s2 partition {1..order}. s2 may be
	/// empty only when allow_empty_s2 (vectorization).
	void validate(int order, bool allow_empty_s2 = false) const
	{
		if (s1.empty())
			throw PartitionError("row mode set S1 must be nonempty");
		if (s2.empty() && !allow_empty_s2)
			throw PartitionError("column mode set S2 must be nonempty");
		std::vector<int> seen(static_cast<std::size_t>(order) + 1, 0);
		for (const Modes* s : {&s1, &s2})
			for (int m : *s) {
				if (m < 1 || m > order)
					throw PartitionError("mode " + std::to_string(m) + " out of range for order " + std::to_string(order));
				if (seen[static_cast<std::size_t>(m)]++)
					throw PartitionError("mode " + std::to_string(m) + " appears twice in partition");
			}
		if (static_cast<int>(s1.size() + s2.size()) != order)
			throw PartitionError("partition does not cover all " + std::to_string(order) + " modes");
	}

	ModePartition transposed() const { return {s2, s1}; }

	/// Cyclic companion modes of n: (n+1, ..., N, 1, ..., n-1).
	static Modes cyclic_rest(int n, int order)
	{
		Modes m;
		for (int k = 1; k < order; ++k)
			m.push_back((n - 1 + k) % order + 1);
		return m;
	}

	/// Flat mode-n unfolding X_n: S1 = {n}, S2 = {n+1..N, 1..n-1}.
	static ModePartition mode_n(int n, int order) { return {{n}, cyclic_rest(n, order)}; }
};

namespace detail {

/// Strides (in elements) of each tensor mode inside a destination whose
/// position is sum_n idx0[n] * stride[n]. Modes of one group combine with
/// the last listed mode varying fastest; `group_stride[g]` scales group g.
inline Dims grouped_strides(const Dims& dims, const std::vector<Modes>& groups, const Dims& group_stride)
{
	Dims stride(dims.size(), 0);
	for (std::size_t g = 0; g < groups.size(); ++g) {
		Index s = group_stride[g];
		for (std::size_t k = groups[g].size(); k-- > 0;) {
			const auto m = static_cast<std::size_t>(groups[g][k] - 1);
			stride[m] = s;
			s *= dims[m];
		}
	}
	return stride;
}

/// Calls f(src_pos, dst_pos) for every element in lexicographic source order.
template <class F>
void for_each_mapped(const Dims& dims, const Dims& dst_stride, F&& f)
{
	const std::size_t order = dims.size();
	Dims idx(order, 0);
	const Index total = product(dims);
	Index dst = 0;
	for (Index src = 0; src < total; ++src) {
		f(src, dst);
		for (std::size_t n = order; n-- > 0;) {
			if (++idx[n] < dims[n]) {
				dst += dst_stride[n];
				break;
			}
			dst -= (dims[n] - 1) * dst_stride[n];
			idx[n] = 0;
		}
	}
}

inline Dims sub_dims(const Dims& dims, const Modes& modes)
{
	Dims d;
	d.reserve(modes.size());
	for (int m : modes)
		d.push_back(dims[static_cast<std::size_t>(m - 1)]);
	return d;
}

inline void validate_grouping(const std::vector<Modes>& groups, int order)
{
	std::vector<int> seen(static_cast<std::size_t>(order) + 1, 0);
	std::size_t count = 0;
	for (const auto& g : groups) {
		if (g.empty())
			throw PartitionError("empty mode group");
		for (int m : g) {
			if (m < 1 || m > order)
				throw PartitionError("mode " + std::to_string(m) + " out of range for order " + std::to_string(order));
			if (seen[static_cast<std::size_t>(m)]++)
				throw PartitionError("mode " + std::to_string(m) + " appears twice in grouping");
			++count;
		}
	}
	if (static_cast<int>(count) != order)
		throw PartitionError("grouping does not cover all " + std::to_string(order) + " modes");
}

/// Column-major (Eigen) strides for the unfolding X_{S1;S2}.
inline Dims unfolding_strides(const Dims& dims, const ModePartition& p, Index rows)
{
	return grouped_strides(dims, {p.s1, p.s2}, {1, rows});
}

}  // namespace detail

template <class Scalar>
Vector<Scalar> vectorize(const DenseTensor<Scalar>& x)
{
	return x.flat();
}

/// Vectorization after permuting the modes: `order` lists the modes from
/// slowest to fastest varying.
template <class Scalar>
Vector<Scalar> vectorize(const DenseTensor<Scalar>& x, const Modes& order)
{
	ModePartition p{order, {}};
	p.validate(x.order(), true);
	Vector<Scalar> v(x.size());
	const Dims stride = detail::grouped_strides(x.dims(), {order}, {1});
	detail::for_each_mapped(x.dims(), stride, [&](Index s, Index d) { v(d) = x[s]; });
	return v;
}

/// X_{S1;S2}: rows combine S1 (last listed fastest), columns combine S2.
template <class Scalar>
Matrix<Scalar> matricize(const DenseTensor<Scalar>& x, const ModePartition& p)
{
	p.validate(x.order());
	const Index rows = product(detail::sub_dims(x.dims(), p.s1));
	const Index cols = product(detail::sub_dims(x.dims(), p.s2));
	Matrix<Scalar> m(rows, cols);
	const Dims stride = detail::unfolding_strides(x.dims(), p, rows);
	Scalar* out = m.data();
	detail::for_each_mapped(x.dims(), stride, [&](Index s, Index d) { out[d] = x[s]; });
	return m;
}

/// Flat mode-n unfolding X_n.
template <class Scalar>
Matrix<Scalar> unfold(const DenseTensor<Scalar>& x, int n)
{
	return matricize(x, ModePartition::mode_n(n, x.order()));
}

namespace detail {

template <class Derived>
void check_unfolding_shape(const Eigen::MatrixBase<Derived>& m, const ModePartition& p, const Dims& dims,
                           Index& rows)
{
	check_dims(dims);
	p.validate(static_cast<int>(dims.size()));
	rows = product(sub_dims(dims, p.s1));
	const Index cols = product(sub_dims(dims, p.s2));
	if (m.rows() != rows || m.cols() != cols)
		throw ShapeError("unfolding is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ", expected " +
		                 std::to_string(rows) + "x" + std::to_string(cols));
}

}  // namespace detail

/// Entry x[idx] (1-based) read from its unfolding X_{S1;S2}.
template <class Derived>
typename Derived::Scalar element_from_unfolding(const Eigen::MatrixBase<Derived>& m, const ModePartition& p,
                                                const Dims& dims, std::span<const Index> idx)
{
	Index rows = 0;
	detail::check_unfolding_shape(m, p, dims, rows);
	linear_index(dims, idx);  // bounds check
	Index r = 0, c = 0;
	for (int mode : p.s1)
		r = r * dims[static_cast<std::size_t>(mode - 1)] + (idx[static_cast<std::size_t>(mode - 1)] - 1);
	for (int mode : p.s2)
		c = c * dims[static_cast<std::size_t>(mode - 1)] + (idx[static_cast<std::size_t>(mode - 1)] - 1);
	return m(r, c);
}

/// Inverse of matricize.
template <class Derived>
DenseTensor<typename Derived::Scalar> refold(const Eigen::MatrixBase<Derived>& m, const ModePartition& p,
                                             const Dims& dims)
{
	using Scalar = typename Derived::Scalar;
	Index rows = 0;
	detail::check_unfolding_shape(m, p, dims, rows);
	const Matrix<Scalar> mm = m;
	DenseTensor<Scalar> x(dims);
	const Dims stride = detail::unfolding_strides(dims, p, rows);
	const Scalar* in = mm.data();
	detail::for_each_mapped(dims, stride, [&](Index s, Index d) { x[s] = in[d]; });
	return x;
}

/// Mode combination: group g becomes one mode of dimension prod of its
/// dims. Pure relabeling.
template <class Scalar>
DenseTensor<Scalar> contract_modes(const DenseTensor<Scalar>& x, const std::vector<Modes>& groups)
{
	detail::validate_grouping(groups, x.order());
	Dims new_dims;
	for (const auto& g : groups)
		new_dims.push_back(product(detail::sub_dims(x.dims(), g)));
	Dims gstride(groups.size(), 1);
	for (std::size_t g = groups.size() - 1; g-- > 0;)
		gstride[g] = gstride[g + 1] * new_dims[g + 1];
	DenseTensor<Scalar> y(new_dims);
	const Dims stride = detail::grouped_strides(x.dims(), groups, gstride);
	detail::for_each_mapped(x.dims(), stride, [&](Index s, Index d) { y[d] = x[s]; });
	return y;
}

/// Result mode k is mode order[k] of x.
template <class Scalar>
DenseTensor<Scalar> permute_modes(const DenseTensor<Scalar>& x, const Modes& order)
{
	std::vector<Modes> groups;
	for (int m : order)
		groups.push_back({m});
	return contract_modes(x, groups);
}

/// Fix the modes in `fixed` (mode -> 1-based index). One fixed mode n
/// leaves modes in cyclic order (n+1..N, 1..n-1); several fixed modes leave
/// the remaining modes ascending.
template <class Scalar>
DenseTensor<Scalar> slice(const DenseTensor<Scalar>& x, const std::map<int, Index>& fixed)
{
	const int order = x.order();
	if (fixed.empty())
		throw PartitionError("slice needs at least one fixed mode");
	if (static_cast<int>(fixed.size()) >= order)
		throw PartitionError("slice cannot fix all modes; use DenseTensor::at for a single entry");
	for (const auto& [mode, i] : fixed) {
		if (mode < 1 || mode > order)
			throw PartitionError("fixed mode " + std::to_string(mode) + " out of range for order " + std::to_string(order));
		if (i < 1 || i > x.dim(mode))
			throw BoundsError("slice index " + std::to_string(i) + " out of range for mode " + std::to_string(mode));
	}
	Modes rest;
	if (fixed.size() == 1) {
		rest = ModePartition::cyclic_rest(fixed.begin()->first, order);
	} else {
		for (int m = 1; m <= order; ++m)
			if (!fixed.contains(m))
				rest.push_back(m);
	}
	Dims xstride(static_cast<std::size_t>(order), 1);
	for (int n = order - 1; n-- > 0;)
		xstride[static_cast<std::size_t>(n)] = xstride[static_cast<std::size_t>(n) + 1] * x.dims()[static_cast<std::size_t>(n) + 1];
	Index base = 0;
	for (const auto& [mode, i] : fixed)
		base += (i - 1) * xstride[static_cast<std::size_t>(mode - 1)];
	const Dims out_dims = detail::sub_dims(x.dims(), rest);
	Dims src_stride;
	for (int m : rest)
		src_stride.push_back(xstride[static_cast<std::size_t>(m - 1)]);
	DenseTensor<Scalar> y(out_dims);
	detail::for_each_mapped(out_dims, src_stride, [&](Index d, Index s) { y[d] = x[base + s]; });
	return y;
}

/// Y = X x_n A, i.e. Y_n = A X_n.
template <class Scalar, class Derived>
DenseTensor<Scalar> mode_n_product(const DenseTensor<Scalar>& x, const Eigen::MatrixBase<Derived>& a, int n)
{
	if (n < 1 || n > x.order())
		throw PartitionError("mode " + std::to_string(n) + " out of range for order " + std::to_string(x.order()));
	if (a.cols() != x.dim(n))
		throw ShapeError("mode-" + std::to_string(n) + " product: matrix has " + std::to_string(a.cols()) +
		                 " columns, mode dimension is " + std::to_string(x.dim(n)));
	const auto p = ModePartition::mode_n(n, x.order());
	if (x.order() == 1) {
		const Vector<Scalar> y = a * x.flat();
		return DenseTensor<Scalar>({a.rows()}, std::vector<Scalar>(y.data(), y.data() + y.size()));
	}
	const Matrix<Scalar> yn = a * matricize(x, p);
	Dims dims = x.dims();
	dims[static_cast<std::size_t>(n - 1)] = a.rows();
	return refold(yn, p, dims);
}

/// Y = X x_n u^T. Remaining modes stay in ascending order; an order-1
/// input contracts to a dims {1} tensor holding the scalar.
template <class Scalar, class Derived>
DenseTensor<Scalar> mode_n_vector_product(const DenseTensor<Scalar>& x, const Eigen::MatrixBase<Derived>& u, int n)
{
	if (n < 1 || n > x.order())
		throw PartitionError("mode " + std::to_string(n) + " out of range for order " + std::to_string(x.order()));
	if (u.size() != x.dim(n))
		throw ShapeError("mode-" + std::to_string(n) + " vector product: vector length " + std::to_string(u.size()) +
		                 " differs from mode dimension " + std::to_string(x.dim(n)));
	Modes rest;
	for (int m = 1; m <= x.order(); ++m)
		if (m != n)
			rest.push_back(m);
	Dims out_dims = rest.empty() ? Dims{1} : detail::sub_dims(x.dims(), rest);
	DenseTensor<Scalar> y(out_dims);
	Dims stride(x.dims().size(), 0);
	if (!rest.empty())
		stride = detail::grouped_strides(x.dims(), {rest}, {1});
	const Dims& dims = x.dims();
	const std::size_t nn = static_cast<std::size_t>(n - 1);
	Index inner = 1;
	for (std::size_t k = nn + 1; k < dims.size(); ++k)
		inner *= dims[k];
	detail::for_each_mapped(dims, stride, [&](Index s, Index d) {
		const Index in = (s / inner) % dims[nn];
		y[d] += u(in) * x[s];
	});
	return y;
}

/// c_{r, ia, ib} = a_{r, ia} * b_{r, ib} where r spans the first `shared` modes.
template <class Scalar>
DenseTensor<Scalar> hadamard_common_modes(const DenseTensor<Scalar>& a, const DenseTensor<Scalar>& b, int shared)
{
	if (shared < 1 || shared > a.order() || shared > b.order())
		throw ShapeError("shared mode count " + std::to_string(shared) + " invalid for orders " +
		                 std::to_string(a.order()) + " and " + std::to_string(b.order()));
	for (int m = 1; m <= shared; ++m)
		if (a.dim(m) != b.dim(m))
			throw ShapeError("shared mode " + std::to_string(m) + " has dims " + std::to_string(a.dim(m)) + " and " +
			                 std::to_string(b.dim(m)));
	Dims dims(a.dims().begin(), a.dims().begin() + shared);
	dims.insert(dims.end(), a.dims().begin() + shared, a.dims().end());
	dims.insert(dims.end(), b.dims().begin() + shared, b.dims().end());
	const Index rs = product(std::span<const Index>(a.dims().data(), static_cast<std::size_t>(shared)));
	const Index ja = a.size() / rs;
	const Index jb = b.size() / rs;
	DenseTensor<Scalar> c(dims);
	Index k = 0;
	for (Index r = 0; r < rs; ++r)
		for (Index ia = 0; ia < ja; ++ia)
			for (Index ib = 0; ib < jb; ++ib)
				c[k++] = a[r * ja + ia] * b[r * jb + ib];
	return c;
}

/// Generalized Kronecker delta tensor I_{order,dim}.
template <class Scalar = double>
DenseTensor<Scalar> identity_tensor(int order, Index dim)
{
	if (order < 1 || dim < 1)
		throw ShapeError("identity tensor needs order >= 1 and dim >= 1");
	DenseTensor<Scalar> t(Dims(static_cast<std::size_t>(order), dim));
	Index step = 0;
	for (Index p = 1, k = 0; k < order; ++k, p *= dim)
		step += p;
	for (Index i = 0; i < dim; ++i)
		t[i * step] = Scalar(1);
	return t;
}

/// Numerical rank of the flat mode-n unfolding.
template <class Scalar>
Index mode_n_rank(const DenseTensor<Scalar>& x, int n)
{
	if (x.order() == 1)
		return numeric_rank(x.flat());
	return numeric_rank(unfold(x, n));
}

}  // namespace ctd
