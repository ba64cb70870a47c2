#pragma once

#include "nhur/nhur.hpp"

#include <random>

namespace nhur::testing
{

using Rng = std::mt19937_64;
using Op = OperatorXcd;
using Vec = VectorXcd;
using cd = std::complex<double>;

inline constexpr cd I{0.0, 1.0};

inline Op random_op(Eigen::Index n, Rng& rng)
{
	return random_operator<double>(n, rng);
}

inline Vec random_vector(Eigen::Index n, Rng& rng)
{
	std::normal_distribution<double> nd;
	Vec v(n);
	for(Eigen::Index k = 0; k < n; ++k)
		v(k) = cd(nd(rng), nd(rng));
	return v;
}

inline Vec random_state(Eigen::Index n, Rng& rng)
{
	return random_vector(n, rng).normalized();
}

inline Op random_hermitian(Eigen::Index n, Rng& rng)
{
	const Op x = random_op(n, rng);
	return (x + x.adjoint()) / 2.0;
}

// S = Y Y^dagger + s0 1 with modest condition number.
inline Metric<double> random_metric(Eigen::Index n, Rng& rng, double s0 = 0.5)
{
	const Op y = random_op(n, rng);
	return Metric<double>::from_operator(y * y.adjoint() + s0 * Op::Identity(n, n));
}

inline Vec normalized_under(const Vec& v, const ScalarProduct<double>& p)
{
	return v / p.norm(v);
}

inline Vec random_state(Eigen::Index n, Rng& rng, const ScalarProduct<double>& p)
{
	return normalized_under(random_vector(n, rng), p);
}

// Invertible R with unit-norm columns, kept well conditioned.
inline Op random_unit_column_transform(Eigen::Index n, Rng& rng, double spread = 0.4)
{
	Op r = Op::Identity(n, n) + spread * random_op(n, rng);
	r.colwise().normalize();
	return r;
}

struct PlantedHamiltonian
{
	Op h;
	Op r;
	Eigen::VectorXd spectrum;
};

// H = R diag(E) R^{-1} with real, well-separated E and unit-column R.
inline PlantedHamiltonian real_spectrum_hamiltonian(Eigen::Index n, Rng& rng, double spread = 0.4)
{
	std::uniform_real_distribution<double> jitter(0.0, 0.5);
	Eigen::VectorXd e(n);
	for(Eigen::Index k = 0; k < n; ++k)
		e(k) = double(k) - double(n) / 2 + jitter(rng);
	const Op r = random_unit_column_transform(n, rng, spread);
	const Op h = r * e.cast<cd>().asDiagonal() * r.inverse();
	return {h, r, e};
}

// Random operator modified so that M phi = lambda phi.
inline Op with_eigenvector(const Vec& phi, cd lambda, Rng& rng)
{
	const Op m0 = random_op(phi.size(), rng);
	const Vec defect = m0 * phi - lambda * phi;
	return m0 - defect * phi.adjoint() / phi.squaredNorm();
}

inline cd random_complex(Rng& rng, double scale = 1.0)
{
	std::normal_distribution<double> nd(0.0, scale);
	return {nd(rng), nd(rng)};
}

} // namespace nhur::testing
