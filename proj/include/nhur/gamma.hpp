#pragma once

#include "nhur/uncertainty.hpp"

#include <random>
#include <vector>

namespace nhur
{

inline constexpr double default_symmetry_tol = 1e-8;
inline constexpr double default_lattice_tol = 1e-9;
inline constexpr std::array<double, 3> symmetry_sample_times{0.1, 1.0, 5.0};

/// Propagators of the gamma-dynamics at one time: forward = e^{-iHt},
/// co_forward = e^{i H^dagger t}; gamma^t(X) = co_forward X forward.
template <typename Real>
struct GammaFlow
{
	Operator<Real> h;
	Real t = 0;
	Operator<Real> forward;
	Operator<Real> co_forward;

	static GammaFlow make(const Operator<Real>& h, Real t, Real cap = Real(default_exp_norm_cap))
	{
		require_square(h, "GammaFlow");
		const Complex<Real> i(0, 1);
		return {h, t, mat_exp<Real>(-i * t * h, cap), mat_exp<Real>(i * t * Operator<Real>(h.adjoint()), cap)};
	}

	Operator<Real> operator()(const Operator<Real>& x) const { return co_forward * x * forward; }
};

/// e^{i H^dagger t} X e^{-i H t}
template <typename Real>
Operator<Real> gamma_evolve(const Operator<Real>& h, const Operator<Real>& x, Real t,
                            Real cap = Real(default_exp_norm_cap))
{
	require_same_dim(h.rows(), x.rows(), "gamma_evolve");
	return GammaFlow<Real>::make(h, t, cap)(x);
}

/// e^{i H t} X e^{-i H t}; multiplicative even when H is not Hermitian.
template <typename Real>
Operator<Real> alpha_evolve(const Operator<Real>& h, const Operator<Real>& x, Real t,
                            Real cap = Real(default_exp_norm_cap))
{
	require_same_dim(h.rows(), x.rows(), "alpha_evolve");
	const Complex<Real> i(0, 1);
	return mat_exp<Real>(i * t * h, cap) * x * mat_exp<Real>(-i * t * h, cap);
}

/// delta(X) = i (H^dagger X - X H), the generator of gamma^t.
template <typename Real>
Operator<Real> gamma_derivation(const Operator<Real>& h, const Operator<Real>& x)
{
	require_same_dim(h.rows(), x.rows(), "gamma_derivation");
	const Complex<Real> i(0, 1);
	return i * (h.adjoint() * x - x * h);
}

/// sum_{k=0}^{K} t^k delta^k(X) / k!
template <typename Real>
Operator<Real> gamma_series(const Operator<Real>& h, const Operator<Real>& x, Real t, int terms)
{
	if(terms < 0)
		throw PreconditionFailed("gamma_series: K must be non-negative");
	Operator<Real> term = x;
	Operator<Real> sum = x;
	for(int k = 1; k <= terms; ++k)
	{
		term = gamma_derivation(h, term) * (t / Real(k));
		sum += term;
	}
	return sum;
}

/// The four algebraic forms of "X is a gamma-symmetry of H" plus the orbit
/// form |gamma^t(X) - X| at the sample times. A form holds when its residual
/// is at most tol * |X| * (1 + |H|).
template <typename Real>
struct SymmetryReport
{
	Real commutator = 0;         // |[H, S^{-1} X]|
	Real adjoint_commutator = 0; // |[H^dagger, X^dagger S^{-1}]|
	Real intertwining = 0;       // |H^dagger X - X H|
	Real derivation = 0;         // |delta(X)|
	Real orbit = 0;              // max_t |gamma^t(X) - X|
	Real threshold = 0;
	std::array<bool, 5> verdicts{};
	bool agree = false;
	bool verdict = false;
};

template <typename Real>
SymmetryReport<Real> is_gamma_symmetry(const Operator<Real>& h, const Metric<Real>& m, const Operator<Real>& x,
                                       Real tol = Real(default_symmetry_tol))
{
	require_same_dim(h.rows(), x.rows(), "is_gamma_symmetry");
	require_same_dim(m.dim(), h.rows(), "is_gamma_symmetry");
	SymmetryReport<Real> r;
	const Operator<Real>& s_inv = m.inverse();
	r.commutator = commutator(h, Operator<Real>(s_inv * x)).norm();
	r.adjoint_commutator = commutator(Operator<Real>(h.adjoint()), Operator<Real>(x.adjoint() * s_inv)).norm();
	r.intertwining = (h.adjoint() * x - x * h).norm();
	r.derivation = gamma_derivation(h, x).norm();
	for(const double t : symmetry_sample_times)
		r.orbit = std::max(r.orbit, (gamma_evolve(h, x, Real(t)) - x).norm());

	r.threshold = tol * x.norm() * (Real(1) + h.norm());
	const std::array<Real, 5> residuals{r.commutator, r.adjoint_commutator, r.intertwining, r.derivation, r.orbit};
	for(std::size_t k = 0; k < residuals.size(); ++k)
		r.verdicts[k] = residuals[k] <= r.threshold;
	r.verdict = r.verdicts[0];
	r.agree = std::all_of(r.verdicts.begin(), r.verdicts.end(), [&](bool v) { return v == r.verdict; });
	return r;
}

/// XY for a gamma-symmetry X and Y commuting with H; the result is again a
/// gamma-symmetry. Throws PreconditionFailed naming the broken hypothesis.
template <typename Real>
Operator<Real> symmetry_product(const Operator<Real>& h, const Metric<Real>& m, const Operator<Real>& x,
                                const Operator<Real>& y, Real tol = Real(default_symmetry_tol))
{
	const SymmetryReport<Real> xs = is_gamma_symmetry(h, m, x, tol);
	if(!xs.verdict)
		throw PreconditionFailed("symmetry_product: X is not a gamma-symmetry");
	if(commutator(y, h).norm() > tol * std::max(Real(1), y.norm()) * (Real(1) + h.norm()))
		throw PreconditionFailed("symmetry_product: Y does not commute with H");
	Operator<Real> xy = x * y;
	if(!is_gamma_symmetry(h, m, xy, tol).verdict)
		throw PreconditionFailed("symmetry_product: XY failed the gamma-symmetry check");
	return xy;
}

/// Unitary whose first column is phi: a complex Householder reflection times
/// the phase of phi_0.
template <typename Real>
Operator<Real> basis_completion(const Vector<Real>& phi)
{
	const Eigen::Index n = phi.size();
	const Real mag0 = std::abs(phi(0));
	const Complex<Real> phase = mag0 > 0 ? phi(0) / mag0 : Complex<Real>(1);
	const Vector<Real> rotated = phi / phase;
	Vector<Real> w = -rotated;
	w(0) += Real(1);
	Operator<Real> u = Operator<Real>::Identity(n, n);
	const Real wn = w.squaredNorm();
	if(wn > Real(0))
		u -= (Real(2) / wn) * w * w.adjoint();
	return phase * u;
}

/// V f = sum_n c_n <e_n, f> e_n on an orthonormal basis with e_1 = phi.
/// Throws BadCoefficients unless c_1 == 1.
template <typename Real>
Operator<Real> v_phi(const Vector<Real>& phi, const Vector<Real>& coeffs)
{
	require_same_dim(phi.size(), coeffs.size(), "v_phi");
	require_normalized(phi, ScalarProduct<Real>::standard());
	if(coeffs.size() == 0 || coeffs(0) != Complex<Real>(1))
		throw BadCoefficients("v_phi: first coefficient must be exactly 1");
	const Operator<Real> u = basis_completion(phi);
	return u * coeffs.asDiagonal() * u.adjoint();
}

/// For gamma-symmetries A, B with (A, B; phi) saturating, checks that
/// (gamma^t(A), gamma^t(B); phi) saturates at every t in `times`.
template <typename Real>
bool prop3_check(const Operator<Real>& h, const Metric<Real>& m, const Operator<Real>& a, const Operator<Real>& b,
                 const Vector<Real>& phi, const std::vector<Real>& times, Real tol = Real(default_symmetry_tol),
                 const ScalarProduct<Real>& p = ScalarProduct<Real>::standard())
{
	if(!is_gamma_symmetry(h, m, a, tol).verdict)
		throw PreconditionFailed("prop3_check: A is not a gamma-symmetry");
	if(!is_gamma_symmetry(h, m, b, tol).verdict)
		throw PreconditionFailed("prop3_check: B is not a gamma-symmetry");
	if(!saturation_test(a, b, phi, p, tol).saturated)
		throw PreconditionFailed("prop3_check: (A, B; phi) does not saturate");

	bool all = true;
	for(const Real t : times)
	{
		const GammaFlow<Real> flow = GammaFlow<Real>::make(h, t);
		all = all && saturation_test(flow(a), flow(b), phi, p, tol).saturated;
	}
	return all;
}

/// Random complex operator with i.i.d. N(0, 1/n) real and imaginary parts.
template <typename Real, typename Rng>
Operator<Real> random_operator(Eigen::Index n, Rng& rng)
{
	std::normal_distribution<Real> nd(0, 1 / std::sqrt(Real(2 * n)));
	Operator<Real> x(n, n);
	for(Eigen::Index j = 0; j < n; ++j)
		for(Eigen::Index i = 0; i < n; ++i)
			x(i, j) = Complex<Real>(nd(rng), nd(rng));
	return x;
}

/// Truth values of the five statements that are equivalent to H = H^dagger,
/// each tested on `pairs` random witnesses from a fixed seed:
///   derivation: delta(XY) = delta(X)Y + X delta(Y) and delta(X^dagger) = delta(X)^dagger
///   unit: delta(1) = 0;  hermitian: H = H^dagger;  unital: gamma^1(1) = 1;
///   multiplicative: gamma^1(XY) = gamma^1(X) gamma^1(Y).
template <typename Real>
struct AutomorphismLattice
{
	bool derivation = false;
	bool unit = false;
	bool hermitian = false;
	bool unital = false;
	bool multiplicative = false;
	std::uint64_t seed = 0;

	bool agree() const
	{
		return derivation == hermitian && unit == hermitian && unital == hermitian && multiplicative == hermitian;
	}
};

template <typename Real>
AutomorphismLattice<Real> automorphism_lattice(const Operator<Real>& h, std::uint64_t seed, int pairs = 20,
                                               Real tol = Real(default_lattice_tol))
{
	const Eigen::Index n = h.rows();
	const Operator<Real> id = Operator<Real>::Identity(n, n);
	const Real hn = std::max(Real(1), h.norm());
	const GammaFlow<Real> flow = GammaFlow<Real>::make(h, Real(1));

	AutomorphismLattice<Real> out;
	out.seed = seed;
	out.hermitian = hermiticity_defect(h) <= tol * hn;
	out.unit = gamma_derivation(h, id).norm() <= tol * hn;
	out.unital = (flow(id) - id).norm() <= tol * std::sqrt(Real(n));

	std::mt19937_64 rng(seed);
	out.derivation = true;
	out.multiplicative = true;
	for(int k = 0; k < pairs; ++k)
	{
		const Operator<Real> x = random_operator<Real>(n, rng);
		const Operator<Real> y = random_operator<Real>(n, rng);
		const Real scale = x.norm() * y.norm();

		const Operator<Real> leibniz =
			gamma_derivation(h, Operator<Real>(x * y)) - gamma_derivation(h, x) * y - x * gamma_derivation(h, y);
		const Operator<Real> star = gamma_derivation(h, Operator<Real>(x.adjoint())) - gamma_derivation(h, x).adjoint();
		if(leibniz.norm() > tol * hn * scale || star.norm() > tol * hn * x.norm())
			out.derivation = false;

		const Operator<Real> gx = flow(x);
		const Operator<Real> gy = flow(y);
		if((flow(Operator<Real>(x * y)) - gx * gy).norm() > tol * std::max(scale, gx.norm() * gy.norm()))
			out.multiplicative = false;
	}
	return out;
}

/// Largest |gamma^t(XY) - gamma^t(X) gamma^t(Y)| over `trials` random pairs.
template <typename Real>
Real automorphism_defect(const Operator<Real>& h, Real t, std::uint64_t seed, int trials = 20)
{
	const GammaFlow<Real> flow = GammaFlow<Real>::make(h, t);
	std::mt19937_64 rng(seed);
	Real worst = 0;
	for(int k = 0; k < trials; ++k)
	{
		const Operator<Real> x = random_operator<Real>(h.rows(), rng);
		const Operator<Real> y = random_operator<Real>(h.rows(), rng);
		worst = std::max(worst, (flow(Operator<Real>(x * y)) - flow(x) * flow(y)).norm());
	}
	return worst;
}

} // namespace nhur
