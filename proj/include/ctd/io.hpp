#pragma once

// File formats.
//
// Tensor text (.ten):
//     dims: I1 I2 ... IN
//     field: real|complex
//     <values in vectorize order, whitespace separated; complex as a+bi>
//
// Tensor binary: "CTEN", u32 field (0 real, 1 complex), u32 order, u32 dims,
// then f64 values (complex interleaved re, im), all little-endian.
//
// Matrix text:
//     matrix: ROWS COLS
//     field: real|complex
//     <one row per line>
//
// Model descriptor (.mdl): whitespace-separated tokens, '#' starts a comment.
//     family tucker|parafac|confac|nested|block_confac|paratuck
//     field real|complex
//     active N1              (tucker, confac)
//     n1 N1  order N         (paratuck)
//     core N d1..dN <values>         input N d1..dN <values>
//     factor n rows cols <row-major values>
//     constraint n rows cols <row-major values>
//     weights R <values>
//     chain n p rows cols <row-major values>     (nested; level p of mode n)
//     block ... endblock     (block_confac; each block holds confac records)
//     end

#include "ctd/errors.hpp"
#include "ctd/models.hpp"
#include "ctd/numeric.hpp"
#include "ctd/tensor.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace ctd {

template <class Scalar>
constexpr const char* field_name()
{
	return is_complex_v<Scalar> ? "complex" : "real";
}

inline std::string format_real(double v)
{
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
	return buf;
}

template <class Scalar>
std::string format_scalar(const Scalar& v)
{
	if constexpr (is_complex_v<Scalar>) {
		const double im = v.imag() == 0.0 ? 0.0 : v.imag();
		std::string s = format_real(v.real());
		const std::string is = format_real(im);
		s += (is.front() == '-' ? "" : "+") + is + "i";
		return s;
	} else {
		return format_real(static_cast<double>(v));
	}
}

namespace detail {

inline double parse_real(const std::string& s, const std::string& what)
{
	if (s.empty())
		throw FormatError("empty number in " + what);
	std::size_t pos = 0;
	double v = 0;
	try {
		v = std::stod(s, &pos);
	} catch (const std::exception&) {
		throw FormatError("malformed number '" + s + "' in " + what);
	}
	if (pos != s.size())
		throw FormatError("malformed number '" + s + "' in " + what);
	return v;
}

}  // namespace detail

/// Accepts "a", "a+bi", "a-bi", "bi" for complex fields; plain reals otherwise.
template <class Scalar>
Scalar parse_scalar(const std::string& tok, const std::string& what = "input")
{
	if constexpr (is_complex_v<Scalar>) {
		if (tok.empty() || tok.back() != 'i')
			return Scalar(detail::parse_real(tok, what), 0.0);
		const std::string body = tok.substr(0, tok.size() - 1);
		// split at the last sign that is not part of an exponent
		std::size_t split = std::string::npos;
		for (std::size_t k = body.size(); k-- > 1;)
			if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
				split = k;
				break;
			}
		if (split == std::string::npos)
			return Scalar(0.0, detail::parse_real(body, what));
		return Scalar(detail::parse_real(body.substr(0, split), what), detail::parse_real(body.substr(split), what));
	} else {
		if (!tok.empty() && tok.back() == 'i')
			throw FormatError("complex value '" + tok + "' in a real " + what);
		return static_cast<Scalar>(detail::parse_real(tok, what));
	}
}

namespace detail {

/// Whitespace tokens with '#' comments removed.
class Tokens {
public:
	explicit Tokens(std::istream& in, std::string what) : what_(std::move(what))
	{
		std::string line;
		while (std::getline(in, line)) {
			if (auto h = line.find('#'); h != std::string::npos)
				line.resize(h);
			std::istringstream ls(line);
			std::string t;
			while (ls >> t)
				toks_.push_back(t);
		}
	}

	bool done() const { return pos_ >= toks_.size(); }
	const std::string& peek() const
	{
		if (done())
			throw FormatError("unexpected end of " + what_);
		return toks_[pos_];
	}
	std::string next()
	{
		const std::string& t = peek();
		++pos_;
		return t;
	}
	void expect(const std::string& t)
	{
		const std::string got = next();
		if (got != t)
			throw FormatError("expected '" + t + "' in " + what_ + ", got '" + got + "'");
	}
	Index next_index()
	{
		const std::string t = next();
		std::size_t pos = 0;
		long long v = 0;
		try {
			v = std::stoll(t, &pos);
		} catch (const std::exception&) {
			throw FormatError("expected an integer in " + what_ + ", got '" + t + "'");
		}
		if (pos != t.size())
			throw FormatError("expected an integer in " + what_ + ", got '" + t + "'");
		return static_cast<Index>(v);
	}
	template <class Scalar>
	Scalar next_scalar()
	{
		return parse_scalar<Scalar>(next(), what_);
	}
	const std::string& what() const { return what_; }

private:
	std::vector<std::string> toks_;
	std::size_t pos_ = 0;
	std::string what_;
};

inline void check_field(const std::string& got, const std::string& want, const std::string& what)
{
	if (got != "real" && got != "complex")
		throw FormatError("unknown field '" + got + "' in " + what);
	if (got != want)
		throw FormatError(what + " holds " + got + " values, expected " + want);
}

}  // namespace detail

// --- tensors -----------------------------------------------------------------

template <class Scalar>
void write_tensor_text(std::ostream& out, const DenseTensor<Scalar>& x)
{
	out << "dims:";
	for (Index d : x.dims())
		out << ' ' << d;
	out << "\nfield: " << field_name<Scalar>() << '\n';
	const Index last = x.dims().back();
	for (Index i = 0; i < x.size(); ++i)
		out << format_scalar(x[i]) << ((i + 1) % last == 0 ? '\n' : ' ');
}

template <class Scalar>
DenseTensor<Scalar> read_tensor_text(std::istream& in)
{
	detail::Tokens t(in, "tensor file");
	t.expect("dims:");
	Dims dims;
	while (!t.done() && t.peek() != "field:")
		dims.push_back(t.next_index());
	t.expect("field:");
	detail::check_field(t.next(), field_name<Scalar>(), "tensor file");
	check_dims(dims);
	std::vector<Scalar> data;
	data.reserve(static_cast<std::size_t>(product(dims)));
	while (!t.done())
		data.push_back(t.next_scalar<Scalar>());
	if (static_cast<Index>(data.size()) != product(dims))
		throw FormatError("tensor file has " + std::to_string(data.size()) + " values, dims require " +
		                  std::to_string(product(dims)));
	return DenseTensor<Scalar>(dims, std::move(data));
}

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v)
{
	unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
	                      static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
	out.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& in)
{
	unsigned char b[4];
	if (!in.read(reinterpret_cast<char*>(b), 4))
		throw FormatError("truncated binary tensor header");
	return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
	       (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void put_f64(std::ostream& out, double v)
{
	const auto bits = std::bit_cast<std::uint64_t>(v);
	unsigned char b[8];
	for (int k = 0; k < 8; ++k)
		b[k] = static_cast<unsigned char>(bits >> (8 * k));
	out.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64(std::istream& in)
{
	unsigned char b[8];
	if (!in.read(reinterpret_cast<char*>(b), 8))
		throw FormatError("truncated binary tensor payload");
	std::uint64_t bits = 0;
	for (int k = 0; k < 8; ++k)
		bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
	return std::bit_cast<double>(bits);
}

}  // namespace detail

template <class Scalar>
void write_tensor_binary(std::ostream& out, const DenseTensor<Scalar>& x)
{
	out.write("CTEN", 4);
	detail::put_u32(out, is_complex_v<Scalar> ? 1u : 0u);
	detail::put_u32(out, static_cast<std::uint32_t>(x.order()));
	for (Index d : x.dims())
		detail::put_u32(out, static_cast<std::uint32_t>(d));
	for (Index i = 0; i < x.size(); ++i) {
		if constexpr (is_complex_v<Scalar>) {
			detail::put_f64(out, x[i].real());
			detail::put_f64(out, x[i].imag());
		} else {
			detail::put_f64(out, static_cast<double>(x[i]));
		}
	}
}

template <class Scalar>
DenseTensor<Scalar> read_tensor_binary(std::istream& in)
{
	char magic[4];
	if (!in.read(magic, 4) || std::memcmp(magic, "CTEN", 4) != 0)
		throw FormatError("missing CTEN magic");
	const auto field = detail::get_u32(in);
	if (field > 1)
		throw FormatError("unknown field code " + std::to_string(field));
	detail::check_field(field ? "complex" : "real", field_name<Scalar>(), "binary tensor");
	const auto order = detail::get_u32(in);
	Dims dims;
	for (std::uint32_t k = 0; k < order; ++k)
		dims.push_back(static_cast<Index>(detail::get_u32(in)));
	check_dims(dims);
	DenseTensor<Scalar> x(dims);
	for (Index i = 0; i < x.size(); ++i) {
		if constexpr (is_complex_v<Scalar>) {
			const double re = detail::get_f64(in);
			x[i] = Scalar(re, detail::get_f64(in));
		} else {
			x[i] = static_cast<Scalar>(detail::get_f64(in));
		}
	}
	return x;
}

/// "real" or "complex", for either tensor format.
inline std::string peek_tensor_field(const std::string& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw FormatError("cannot open " + path);
	char magic[4] = {};
	in.read(magic, 4);
	if (in.gcount() == 4 && std::memcmp(magic, "CTEN", 4) == 0)
		return detail::get_u32(in) ? "complex" : "real";
	in.clear();
	in.seekg(0);
	detail::Tokens t(in, path);
	while (!t.done())
		if (t.next() == "field:")
			return t.next();
	throw FormatError("no field line in " + path);
}

template <class Scalar>
DenseTensor<Scalar> read_tensor(const std::string& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw FormatError("cannot open " + path);
	char magic[4] = {};
	in.read(magic, 4);
	const bool binary = in.gcount() == 4 && std::memcmp(magic, "CTEN", 4) == 0;
	in.clear();
	in.seekg(0);
	return binary ? read_tensor_binary<Scalar>(in) : read_tensor_text<Scalar>(in);
}

/// Text unless the path ends in ".bin".
template <class Scalar>
void write_tensor(const std::string& path, const DenseTensor<Scalar>& x)
{
	const bool binary = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw FormatError("cannot write " + path);
	if (binary)
		write_tensor_binary(out, x);
	else
		write_tensor_text(out, x);
}

// --- matrices ----------------------------------------------------------------

template <class Derived>
void write_matrix_text(std::ostream& out, const Eigen::MatrixBase<Derived>& m)
{
	using Scalar = typename Derived::Scalar;
	out << "matrix: " << m.rows() << ' ' << m.cols() << "\nfield: " << field_name<Scalar>() << '\n';
	for (Index i = 0; i < m.rows(); ++i) {
		for (Index j = 0; j < m.cols(); ++j)
			out << (j ? " " : "") << format_scalar<Scalar>(m(i, j));
		out << '\n';
	}
}

template <class Scalar>
Matrix<Scalar> read_matrix_text(std::istream& in)
{
	detail::Tokens t(in, "matrix file");
	t.expect("matrix:");
	const Index rows = t.next_index(), cols = t.next_index();
	t.expect("field:");
	detail::check_field(t.next(), field_name<Scalar>(), "matrix file");
	Matrix<Scalar> m(rows, cols);
	for (Index i = 0; i < rows; ++i)
		for (Index j = 0; j < cols; ++j)
			m(i, j) = t.next_scalar<Scalar>();
	if (!t.done())
		throw FormatError("trailing values in matrix file");
	return m;
}

// --- models ------------------------------------------------------------------

template <class Scalar>
using AnyModel = std::variant<TuckerModel<Scalar>, ParafacModel<Scalar>, ConfacModel<Scalar>,
                              NestedTuckerModel<Scalar>, BlockConfacModel<Scalar>, ParatuckModel<Scalar>>;

inline const char* family_name(std::size_t variant_index)
{
	static const char* names[] = {"tucker", "parafac", "confac", "nested", "block_confac", "paratuck"};
	return names[variant_index];
}

namespace detail {

template <class Scalar>
Matrix<Scalar> read_rowmajor(Tokens& t, Index rows, Index cols)
{
	if (rows < 0 || cols < 0)
		throw FormatError("negative matrix size in " + t.what());
	Matrix<Scalar> m(rows, cols);
	for (Index i = 0; i < rows; ++i)
		for (Index j = 0; j < cols; ++j)
			m(i, j) = t.next_scalar<Scalar>();
	return m;
}

template <class Scalar>
DenseTensor<Scalar> read_tensor_record(Tokens& t)
{
	const Index order = t.next_index();
	if (order < 1)
		throw FormatError("tensor record order must be positive");
	Dims dims;
	for (Index k = 0; k < order; ++k)
		dims.push_back(t.next_index());
	check_dims(dims);
	std::vector<Scalar> data;
	for (Index k = 0; k < product(dims); ++k)
		data.push_back(t.next_scalar<Scalar>());
	return DenseTensor<Scalar>(dims, std::move(data));
}

template <class Scalar>
void put_slot(std::vector<Matrix<Scalar>>& v, Index n, Matrix<Scalar> m, const std::string& what)
{
	if (n < 1 || n > 64)
		throw FormatError(what + " index " + std::to_string(n) + " out of range");
	if (static_cast<Index>(v.size()) < n)
		v.resize(static_cast<std::size_t>(n));
	v[static_cast<std::size_t>(n - 1)] = std::move(m);
}

/// Records shared by all families; returns false on an unknown keyword.
template <class Scalar>
struct Records {
	std::vector<Matrix<Scalar>> factors, constraints;
	std::map<Index, std::vector<Matrix<Scalar>>> chains;
	std::optional<DenseTensor<Scalar>> core, input;
	Vector<Scalar> weights;
	int active = -1, n1 = -1, order = -1;

	bool read(Tokens& t, const std::string& key)
	{
		if (key == "factor" || key == "constraint") {
			const Index n = t.next_index(), r = t.next_index(), c = t.next_index();
			put_slot(key == "factor" ? factors : constraints, n, read_rowmajor<Scalar>(t, r, c), key);
		} else if (key == "core") {
			core = read_tensor_record<Scalar>(t);
		} else if (key == "input") {
			input = read_tensor_record<Scalar>(t);
		} else if (key == "weights") {
			const Index r = t.next_index();
			weights.resize(r);
			for (Index k = 0; k < r; ++k)
				weights(k) = t.next_scalar<Scalar>();
		} else if (key == "chain") {
			const Index n = t.next_index(), p = t.next_index(), r = t.next_index(), c = t.next_index();
			put_slot(chains[n], p, read_rowmajor<Scalar>(t, r, c), "chain level");
		} else if (key == "active") {
			active = static_cast<int>(t.next_index());
		} else if (key == "n1") {
			n1 = static_cast<int>(t.next_index());
		} else if (key == "order") {
			order = static_cast<int>(t.next_index());
		} else {
			return false;
		}
		return true;
	}

	void require_dense(const std::vector<Matrix<Scalar>>& v, const char* what) const
	{
		for (std::size_t k = 0; k < v.size(); ++k)
			if (v[k].size() == 0)
				throw FormatError(std::string("missing ") + what + " " + std::to_string(k + 1));
	}

	ConfacModel<Scalar> confac() const
	{
		require_dense(factors, "factor");
		require_dense(constraints, "constraint");
		ConfacModel<Scalar> m{factors, constraints, active};
		m.validate();
		return m;
	}
};

}  // namespace detail

inline std::string peek_model_field(std::istream& in)
{
	detail::Tokens t(in, "model file");
	while (!t.done())
		if (t.next() == "field")
			return t.next();
	return "real";
}

template <class Scalar>
AnyModel<Scalar> read_model(std::istream& in)
{
	detail::Tokens t(in, "model file");
	t.expect("family");
	const std::string family = t.next();
	detail::Records<Scalar> rec;
	std::vector<ConfacModel<Scalar>> blocks;
	while (true) {
		const std::string key = t.next();
		if (key == "end")
			break;
		if (key == "field") {
			detail::check_field(t.next(), field_name<Scalar>(), "model file");
		} else if (key == "block" && family == "block_confac") {
			detail::Records<Scalar> br;
			for (std::string k = t.next(); k != "endblock"; k = t.next())
				if (!br.read(t, k))
					throw FormatError("unknown keyword '" + k + "' in block");
			blocks.push_back(br.confac());
		} else if (!rec.read(t, key)) {
			throw FormatError("unknown keyword '" + key + "' in model file");
		}
	}
	if (family == "tucker") {
		if (!rec.core)
			throw FormatError("tucker model needs a core record");
		rec.require_dense(rec.factors, "factor");
		TuckerModel<Scalar> m{*rec.core, rec.factors, rec.active};
		m.validate();
		return m;
	}
	if (family == "parafac") {
		rec.require_dense(rec.factors, "factor");
		ParafacModel<Scalar> m{rec.factors, rec.weights};
		m.validate();
		return m;
	}
	if (family == "confac")
		return rec.confac();
	if (family == "nested") {
		if (!rec.core)
			throw FormatError("nested model needs a core record");
		NestedTuckerModel<Scalar> m{*rec.core, std::vector<std::vector<Matrix<Scalar>>>(
		                                           static_cast<std::size_t>(rec.core->order()))};
		for (auto& [n, chain] : rec.chains) {
			if (n < 1 || n > rec.core->order())
				throw FormatError("chain mode " + std::to_string(n) + " out of range");
			rec.require_dense(chain, "chain level");
			m.chains[static_cast<std::size_t>(n - 1)] = chain;
		}
		m.validate();
		return m;
	}
	if (family == "block_confac") {
		BlockConfacModel<Scalar> m{blocks};
		m.validate();
		return m;
	}
	if (family == "paratuck") {
		if (!rec.input)
			throw FormatError("paratuck model needs an input record");
		rec.require_dense(rec.factors, "factor");
		rec.require_dense(rec.constraints, "constraint");
		ParatuckModel<Scalar> m{rec.n1 < 0 ? static_cast<int>(rec.factors.size()) : rec.n1,
		                        rec.order < 0 ? rec.input->order() + 1 : rec.order, rec.factors, rec.constraints,
		                        *rec.input};
		m.validate();
		return m;
	}
	throw FormatError("unknown model family '" + family + "'");
}

namespace detail {

template <class Derived>
void write_rowmajor(std::ostream& out, const Eigen::MatrixBase<Derived>& m)
{
	out << m.rows() << ' ' << m.cols() << '\n';
	for (Index i = 0; i < m.rows(); ++i) {
		out << ' ';
		for (Index j = 0; j < m.cols(); ++j)
			out << ' ' << format_scalar<typename Derived::Scalar>(m(i, j));
		out << '\n';
	}
}

template <class Scalar>
void write_tensor_record(std::ostream& out, const char* key, const DenseTensor<Scalar>& x)
{
	out << key << ' ' << x.order();
	for (Index d : x.dims())
		out << ' ' << d;
	out << '\n';
	for (Index i = 0; i < x.size(); ++i)
		out << (i % 8 == 0 ? "  " : " ") << format_scalar(x[i]) << ((i + 1) % 8 == 0 || i + 1 == x.size() ? "\n" : "");
}

template <class Scalar>
void write_list(std::ostream& out, const char* key, const std::vector<Matrix<Scalar>>& v)
{
	for (std::size_t k = 0; k < v.size(); ++k) {
		out << key << ' ' << k + 1 << ' ';
		write_rowmajor(out, v[k]);
	}
}

template <class Scalar>
void write_confac_body(std::ostream& out, const ConfacModel<Scalar>& m)
{
	out << "active " << m.n1() << '\n';
	write_list(out, "factor", m.factors);
	write_list(out, "constraint", m.constraints);
}

}  // namespace detail

template <class Scalar>
void write_model(std::ostream& out, const AnyModel<Scalar>& any)
{
	out << "family " << family_name(any.index()) << "\nfield " << field_name<Scalar>() << '\n';
	std::visit(
	    [&](const auto& m) {
		    using M = std::decay_t<decltype(m)>;
		    if constexpr (std::is_same_v<M, TuckerModel<Scalar>>) {
			    out << "active " << m.n1() << '\n';
			    detail::write_tensor_record(out, "core", m.core);
			    detail::write_list(out, "factor", m.factors);
		    } else if constexpr (std::is_same_v<M, ParafacModel<Scalar>>) {
			    detail::write_list(out, "factor", m.factors);
			    if (m.weights.size()) {
				    out << "weights " << m.weights.size();
				    for (Index r = 0; r < m.weights.size(); ++r)
					    out << ' ' << format_scalar(m.weights(r));
				    out << '\n';
			    }
		    } else if constexpr (std::is_same_v<M, ConfacModel<Scalar>>) {
			    detail::write_confac_body(out, m);
		    } else if constexpr (std::is_same_v<M, NestedTuckerModel<Scalar>>) {
			    detail::write_tensor_record(out, "core", m.core);
			    for (std::size_t n = 0; n < m.chains.size(); ++n)
				    for (std::size_t p = 0; p < m.chains[n].size(); ++p) {
					    out << "chain " << n + 1 << ' ' << p + 1 << ' ';
					    detail::write_rowmajor(out, m.chains[n][p]);
				    }
		    } else if constexpr (std::is_same_v<M, BlockConfacModel<Scalar>>) {
			    for (const auto& b : m.blocks) {
				    out << "block\n";
				    detail::write_confac_body(out, b);
				    out << "endblock\n";
			    }
		    } else {
			    out << "n1 " << m.n1 << "\norder " << m.n << '\n';
			    detail::write_list(out, "factor", m.factors);
			    detail::write_list(out, "constraint", m.constraints);
			    detail::write_tensor_record(out, "input", m.input);
		    }
	    },
	    any);
	out << "end\n";
}

template <class Scalar>
DenseTensor<Scalar> synthesize(const AnyModel<Scalar>& any)
{
	return std::visit(
	    [](const auto& m) -> DenseTensor<Scalar> {
		    using M = std::decay_t<decltype(m)>;
		    if constexpr (std::is_same_v<M, TuckerModel<Scalar>>)
			    return synth_tucker(m);
		    else if constexpr (std::is_same_v<M, ParafacModel<Scalar>>)
			    return synth_parafac(m);
		    else if constexpr (std::is_same_v<M, ConfacModel<Scalar>>)
			    return synth_confac(m);
		    else if constexpr (std::is_same_v<M, NestedTuckerModel<Scalar>>)
			    return synth_nested_tucker(m);
		    else if constexpr (std::is_same_v<M, BlockConfacModel<Scalar>>)
			    return synth_block_confac(m);
		    else
			    return synth_paratuck(m);
	    },
	    any);
}

}  // namespace ctd
