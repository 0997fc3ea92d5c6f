#pragma once

// Command-line front end: synth, unfold, transform, fit, check, info.
// Exit codes: 0 success, 1 usage or input-file error, 2 numeric or
// identifiability failure.

#include "ctd/equivalence.hpp"
#include "ctd/errors.hpp"
#include "ctd/estimation.hpp"
#include "ctd/io.hpp"
#include "ctd/models.hpp"
#include "ctd/tensor.hpp"
#include "ctd/uniqueness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace ctd::cli {

using json = nlohmann::json;

struct Args {
	std::string model, in, out, report, to = "parafac", family = "parafac", constraints;
	std::string s1, s2;
	Index rank = 1;
	double tol = 1e-10;
	int max_iters = 500;
	std::uint64_t seed = 0;
	int trials = 10000;
	bool json = false;
	bool kruskal = false, relaxed = false, unimode = false, paralind = false, paratuck = false;
};

inline Modes parse_modes(const std::string& s)
{
	Modes m;
	std::stringstream ss(s);
	std::string tok;
	while (std::getline(ss, tok, ',')) {
		if (tok.empty())
			throw PartitionError("empty mode in list '" + s + "'");
		std::size_t pos = 0;
		int v = 0;
		try {
			v = std::stoi(tok, &pos);
		} catch (const std::exception&) {
			throw PartitionError("bad mode '" + tok + "'");
		}
		if (pos != tok.size())
			throw PartitionError("bad mode '" + tok + "'");
		m.push_back(v);
	}
	return m;
}

namespace detail {

inline std::ofstream open_out(const std::string& path)
{
	std::ofstream f(path, std::ios::binary);
	if (!f)
		throw FormatError("cannot write " + path);
	return f;
}

template <class Scalar>
AnyModel<Scalar> load_model(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
		throw FormatError("cannot open " + path);
	return read_model<Scalar>(in);
}

inline std::string model_field(const std::string& path)
{
	std::ifstream in(path);
	if (!in)
		throw FormatError("cannot open " + path);
	return peek_model_field(in);
}

template <class Scalar>
void save_model(const std::string& path, const AnyModel<Scalar>& m)
{
	auto f = open_out(path);
	write_model<Scalar>(f, m);
}

inline std::string fmt_margin(double m)
{
	std::ostringstream s;
	s << m;
	return s.str();
}

inline json report_json(const UniquenessReport& r)
{
	json j{{"condition", r.condition},
	       {"verdict", to_string(r.verdict)},
	       {"margin", r.margin},
	       {"detail", r.detail},
	       {"extrapolated", r.extrapolated}};
	j["factors"] = json::array();
	for (const auto& f : r.factors)
		j["factors"].push_back(
		    {{"name", f.name}, {"rows", f.rows}, {"cols", f.cols}, {"rank", f.rank}, {"k_rank", f.k_rank}});
	if (!r.witness.empty()) {
		j["witness"] = json::array();
		for (const auto& w : r.witness)
			j["witness"].push_back({w.real(), w.imag()});
	}
	return j;
}

inline void print_report(std::ostream& out, const UniquenessReport& r)
{
	out << r.condition << ": " << to_string(r.verdict) << ", margin " << fmt_margin(r.margin)
	    << (r.extrapolated ? " (extrapolated)" : "") << '\n';
	out << "  " << std::left << std::setw(14) << "factor" << std::right << std::setw(6) << "rows" << std::setw(6)
	    << "cols" << std::setw(6) << "rank" << std::setw(8) << "k-rank" << '\n';
	for (const auto& f : r.factors)
		out << "  " << std::left << std::setw(14) << f.name << std::right << std::setw(6) << f.rows << std::setw(6)
		    << f.cols << std::setw(6) << f.rank << std::setw(8) << f.k_rank << '\n';
	if (!r.detail.empty())
		out << "  " << r.detail << '\n';
}

inline json fit_json(const FitReport& r)
{
	return {{"iterations", r.iterations},
	        {"rel_error_history", r.rel_error_history},
	        {"final_error", r.final_error()},
	        {"converged", r.converged},
	        {"stop_reason", to_string(r.stop_reason)},
	        {"regularized", r.regularized}};
}

inline void print_fit(std::ostream& out, const FitReport& r)
{
	out << "iterations " << r.iterations << "\nfinal_error " << format_real(r.final_error()) << "\nconverged "
	    << (r.converged ? "true" : "false") << "\nstop_reason " << to_string(r.stop_reason) << "\nregularized "
	    << (r.regularized ? "true" : "false") << '\n';
}

template <class Scalar>
std::vector<Matrix<Scalar>> check_factors(const AnyModel<Scalar>& any)
{
	if (const auto* p = std::get_if<ParafacModel<Scalar>>(&any))
		return p->factors;
	if (const auto* c = std::get_if<ConfacModel<Scalar>>(&any))
		return c->constrained_factors();
	if (const auto* p = std::get_if<ParatuckModel<Scalar>>(&any))
		return paratuck_general_to_parafac(*p).factors;
	throw ArityError("this check needs a parafac, confac or paratuck model");
}

template <class Scalar>
int do_synth(const Args& a, std::ostream& out)
{
	const auto x = synthesize(load_model<Scalar>(a.model));
	write_tensor(a.out, x);
	out << "wrote " << a.out << " dims";
	for (Index d : x.dims())
		out << ' ' << d;
	out << '\n';
	return 0;
}

template <class Scalar>
int do_unfold(const Args& a, std::ostream& out)
{
	const auto x = read_tensor<Scalar>(a.in);
	const ModePartition p{parse_modes(a.s1), parse_modes(a.s2)};
	const Matrix<Scalar> m = matricize(x, p);
	if (a.out.empty()) {
		write_matrix_text(out, m);
	} else {
		auto f = open_out(a.out);
		write_matrix_text(f, m);
	}
	return 0;
}

template <class Scalar>
int do_transform(const Args& a, std::ostream& out)
{
	const auto any = load_model<Scalar>(a.model);
	AnyModel<Scalar> result;
	if (const auto* p = std::get_if<ParatuckModel<Scalar>>(&any)) {
		if (a.to == "parafac4")
			result = paratuck24_to_parafac4(*p);
		else if (a.to == "parafac3")
			result = paratuck2_to_parafac3(*p);
		else if (a.to == "parafac")
			result = paratuck_general_to_parafac(*p);
		else if (a.to == "tucker")
			result = paratuck_as_tucker(*p);
		else
			throw ArityError("unknown target '" + a.to + "'");
	} else if (const auto* c = std::get_if<ConfacModel<Scalar>>(&any)) {
		if (a.to == "parafac")
			result = c->as_parafac();
		else if (a.to == "tucker")
			result = c->as_tucker();
		else
			throw ArityError("confac models transform to parafac or tucker");
	} else if (const auto* nt = std::get_if<NestedTuckerModel<Scalar>>(&any)) {
		if (a.to != "tucker")
			throw ArityError("nested models transform to tucker");
		result = nt->as_tucker();
	} else {
		throw ArityError("no transform defined for family " + std::string(family_name(any.index())));
	}
	save_model<Scalar>(a.out, result);
	out << "wrote " << a.out << " (" << family_name(result.index()) << ")\n";
	return 0;
}

template <class Scalar>
int do_fit(const Args& a, std::ostream& out)
{
	const auto x = read_tensor<Scalar>(a.in);
	FitOptions<Scalar> opts;
	opts.tol = a.tol;
	opts.max_iters = a.max_iters;
	opts.seed = a.seed;
	FitReport rep;
	AnyModel<Scalar> model;
	if (a.family == "parafac") {
		auto r = als_parafac(x, a.rank, opts);
		model = r.model;
		rep = r.report;
	} else if (a.family == "confac") {
		if (a.constraints.empty())
			throw ArityError("confac fit needs --constraints <model file>");
		const auto known = load_model<Scalar>(a.constraints);
		const auto* c = std::get_if<ConfacModel<Scalar>>(&known);
		if (!c)
			throw ArityError("--constraints must hold a confac model");
		auto r = als_confac(x, c->constraints, opts);
		model = r.model;
		rep = r.report;
	} else if (a.family == "paratuck24") {
		if (a.constraints.empty())
			throw ArityError("paratuck24 fit needs --constraints <model file>");
		const auto known = load_model<Scalar>(a.constraints);
		const auto* p = std::get_if<ParatuckModel<Scalar>>(&known);
		if (!p)
			throw ArityError("--constraints must hold a paratuck model");
		auto r = paratuck24_kron_ls(x, p->constraints[0], p->constraints[1], p->input);
		ParatuckModel<Scalar> est = *p;
		est.factors = {r.a1, r.a2};
		model = est;
		rep = r.report;
	} else {
		throw ArityError("unknown family '" + a.family + "'");
	}
	if (!a.out.empty())
		save_model<Scalar>(a.out, model);
	if (!a.report.empty()) {
		auto f = open_out(a.report);
		print_fit(f, rep);
	}
	if (a.json)
		out << fit_json(rep).dump(2) << '\n';
	else
		print_fit(out, rep);
	return 0;
}

template <class Scalar>
int do_check(const Args& a, std::ostream& out)
{
	const auto any = load_model<Scalar>(a.model);
	std::vector<UniquenessReport> reps;
	const bool none = !(a.kruskal || a.relaxed || a.unimode || a.paralind || a.paratuck);
	if (a.kruskal || none) {
		const auto k = kruskal_check(check_factors(any));
		reps.push_back(k.exact);
		reps.push_back(k.generic);
	}
	if (a.relaxed) {
		const auto f = check_factors(any);
		if (f.size() != 3)
			throw ArityError("relaxed check needs a third-order model");
		const auto r = relaxed_third_order_check(f[0], f[1], f[2]);
		reps.push_back(r.relaxed);
		reps.push_back(r.strict);
	}
	if (a.unimode) {
		const auto f = check_factors(any);
		if (f.size() != 3)
			throw ArityError("uni-mode check needs a third-order model");
		reps.push_back(unimode_check(f[0], f[1], f[2]));
	}
	if (a.paralind) {
		const auto* c = std::get_if<ConfacModel<Scalar>>(&any);
		if (!c)
			throw ArityError("PARALIND check needs a confac model");
		reps.push_back(paralind_condition_probe(*c, a.trials, a.seed));
	}
	if (a.paratuck) {
		const auto* p = std::get_if<ParatuckModel<Scalar>>(&any);
		if (!p)
			throw ArityError("PARATUCK check needs a paratuck model");
		reps.push_back(p->n1 == 2 && p->n == 4 ? paratuck24_uniqueness(*p) : paratuck_uniqueness_extrapolated(*p));
	}
	if (a.json) {
		json j = json::array();
		for (const auto& r : reps)
			j.push_back(report_json(r));
		out << j.dump(2) << '\n';
	} else {
		for (const auto& r : reps)
			print_report(out, r);
	}
	return 0;
}

template <class Scalar>
int do_info(const Args& a, std::ostream& out)
{
	const auto x = read_tensor<Scalar>(a.in);
	json j;
	j["field"] = field_name<Scalar>();
	j["dims"] = x.dims();
	j["order"] = x.order();
	j["size"] = x.size();
	j["frobenius_norm"] = x.norm();
	double mx = 0;
	for (Index i = 0; i < x.size(); ++i)
		mx = std::max(mx, static_cast<double>(std::abs(x[i])));
	j["max_abs"] = mx;
	std::vector<Index> ranks;
	for (int n = 1; n <= x.order(); ++n)
		ranks.push_back(mode_n_rank(x, n));
	j["mode_ranks"] = ranks;
	if (a.json) {
		out << j.dump(2) << '\n';
		return 0;
	}
	out << "field       " << field_name<Scalar>() << "\norder       " << x.order() << "\ndims       ";
	for (Index d : x.dims())
		out << ' ' << d;
	out << "\nsize        " << x.size() << "\nnorm        " << format_real(x.norm()) << "\nmax_abs     "
	    << format_real(mx) << "\nmode_ranks ";
	for (Index r : ranks)
		out << ' ' << r;
	out << '\n';
	return 0;
}

template <class F>
int dispatch(const std::string& field, F&& f)
{
	if (field == "complex")
		return f(Complex{});
	if (field != "real")
		throw FormatError("unknown field '" + field + "'");
	return f(double{});
}

}  // namespace detail

/// Parses argv and runs one verb. Output goes to `out`, diagnostics to `err`.
inline int run(std::vector<std::string> argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
	CLI::App app{"Constrained tensor decompositions: synthesis, unfolding, transforms, fitting and uniqueness audits",
	             "ctd"};
	app.require_subcommand(1, 1);
	Args a;

	auto* synth = app.add_subcommand("synth", "Synthesize a tensor from a model descriptor");
	synth->add_option("--model", a.model, "model descriptor (.mdl)")->required()->check(CLI::ExistingFile);
	synth->add_option("--out", a.out, "output tensor (.ten text, .bin binary)")->required();

	auto* unfold = app.add_subcommand("unfold", "Matricize a tensor along a mode partition");
	unfold->add_option("--in", a.in, "input tensor")->required()->check(CLI::ExistingFile);
	unfold->add_option("--s1", a.s1, "row modes, e.g. 1,3")->required();
	unfold->add_option("--s2", a.s2, "column modes, e.g. 2")->required();
	unfold->add_option("--out", a.out, "output matrix file (default stdout)");

	auto* transform = app.add_subcommand("transform", "Rewrite a model as an equivalent one");
	transform->add_option("--model", a.model, "model descriptor")->required()->check(CLI::ExistingFile);
	transform->add_option("--to", a.to, "parafac | parafac3 | parafac4 | tucker")
	    ->check(CLI::IsMember({"parafac", "parafac3", "parafac4", "tucker"}));
	transform->add_option("--out", a.out, "output model descriptor")->required();

	auto* fit = app.add_subcommand("fit", "Estimate model parameters from a tensor");
	fit->add_option("--in", a.in, "input tensor")->required()->check(CLI::ExistingFile);
	fit->add_option("--family", a.family, "parafac | confac | paratuck24")
	    ->check(CLI::IsMember({"parafac", "confac", "paratuck24"}));
	fit->add_option("--rank", a.rank, "PARAFAC rank")->check(CLI::PositiveNumber);
	fit->add_option("--tol", a.tol, "relative error-change tolerance")->check(CLI::PositiveNumber);
	fit->add_option("--max-iters", a.max_iters, "iteration cap")->check(CLI::PositiveNumber);
	fit->add_option("--seed", a.seed, "initialization seed");
	fit->add_option("--constraints", a.constraints, "model file with the known constraints")
	    ->check(CLI::ExistingFile);
	fit->add_option("--out", a.out, "write the fitted model here");
	fit->add_option("--report", a.report, "write the fit report here");
	fit->add_flag("--json", a.json, "print the fit report as JSON");

	auto* check = app.add_subcommand("check", "Audit uniqueness conditions of a model");
	check->add_option("--model", a.model, "model descriptor")->required()->check(CLI::ExistingFile);
	check->add_flag("--kruskal", a.kruskal, "Kruskal condition, exact and generic (default)");
	check->add_flag("--relaxed", a.relaxed, "relaxed third-order conditions");
	check->add_flag("--unimode", a.unimode, "uni-mode condition");
	check->add_flag("--paralind", a.paralind, "sampled PARALIND condition");
	check->add_flag("--paratuck", a.paratuck, "PARATUCK theorem");
	check->add_option("--trials", a.trials, "PARALIND sample count")->check(CLI::PositiveNumber);
	check->add_option("--seed", a.seed, "PARALIND sampling seed");
	check->add_flag("--json", a.json, "print reports as JSON");

	auto* info = app.add_subcommand("info", "Print tensor dims, mode-n ranks and statistics");
	info->add_option("--in", a.in, "input tensor")->required()->check(CLI::ExistingFile);
	info->add_flag("--json", a.json, "print as JSON");

	std::reverse(argv.begin(), argv.end());
	try {
		app.parse(argv);
	} catch (const CLI::ParseError& e) {
		std::ostringstream o, e2;
		const int code = app.exit(e, o, e2);
		out << o.str();
		err << e2.str();
		return code == 0 ? 0 : 1;
	}

	try {
		if (*synth)
			return detail::dispatch(detail::model_field(a.model),
			                        [&](auto s) { return detail::do_synth<decltype(s)>(a, out); });
		if (*unfold)
			return detail::dispatch(peek_tensor_field(a.in),
			                        [&](auto s) { return detail::do_unfold<decltype(s)>(a, out); });
		if (*transform)
			return detail::dispatch(detail::model_field(a.model),
			                        [&](auto s) { return detail::do_transform<decltype(s)>(a, out); });
		if (*fit)
			return detail::dispatch(peek_tensor_field(a.in), [&](auto s) { return detail::do_fit<decltype(s)>(a, out); });
		if (*check)
			return detail::dispatch(detail::model_field(a.model),
			                        [&](auto s) { return detail::do_check<decltype(s)>(a, out); });
		if (*info)
			return detail::dispatch(peek_tensor_field(a.in), [&](auto s) { return detail::do_info<decltype(s)>(a, out); });
	} catch (const FormatError& e) {
		err << "error: " << e.what() << '\n';
		return 1;
	} catch (const PartitionError& e) {
		err << "error: " << e.what() << '\n';
		return 1;
	} catch (const ArityError& e) {
		err << "error: " << e.what() << '\n';
		return 1;
	} catch (const Error& e) {
		err << "error: " << e.what() << '\n';
		return 2;
	}
	return 1;
}

inline int run(int argc, char** argv)
{
	std::vector<std::string> args(argv + 1, argv + argc);
	return run(std::move(args));
}

}  // namespace ctd::cli
