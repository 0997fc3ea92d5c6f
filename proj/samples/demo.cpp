// Walkthrough: build a PARATUCK-(2,4) model, rewrite it as a constrained
// PARAFAC model, audit its uniqueness and recover A1 (x) A2 by Kronecker LS.

#include "ctd/ctd.hpp"

#include <iostream>
#include <random>

int main()
{
	using namespace ctd;
	std::mt19937_64 rng(7);

	ParatuckModel<double> m;
	m.n1 = 2;
	m.n = 4;
	m.factors = {gaussian_matrix<double>(5, 2, rng), gaussian_matrix<double>(4, 2, rng)};
	// Two-by-two allocation design over I3 = 4 slots: every (r1, r2) pair used once.
	Matrix<double> phi1(2, 4), phi2(2, 4);
	phi1 << 1, 1, 0, 0, 0, 0, 1, 1;
	phi2 << 1, 0, 1, 0, 0, 1, 0, 1;
	m.constraints = {phi1, phi2};
	m.input = DenseTensor<double>::generate({2, 2, 3}, [&](const Dims&) { return std::normal_distribution<>()(rng); });

	const auto x = synth_paratuck(m);
	const auto p = paratuck24_to_parafac4(m);
	std::cout << "tensor dims";
	for (Index d : x.dims())
		std::cout << ' ' << d;
	std::cout << "\nconstrained PARAFAC rank " << p.rank() << ", rewrite error "
	          << relative_error(synth_parafac(p), x) << '\n';

	const auto rep = paratuck24_uniqueness(m);
	std::cout << rep.condition << ": " << to_string(rep.verdict) << " (" << rep.detail << ")\n";

	const auto est = paratuck24_kron_ls(x, phi1, phi2, m.input);
	const Matrix<double> truth = kron(m.factors[0], m.factors[1]);
	std::cout << "Kronecker LS error " << relative_error(est.kron_estimate, truth) << '\n';
	return 0;
}
