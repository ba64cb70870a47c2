#pragma once

#include "nhur/metric.hpp"

#include <cmath>
#include <sstream>

namespace nhur::fock
{

inline constexpr int default_truncation = 80;
inline constexpr double tail_mass_limit = 1e-20;
inline constexpr double default_transform_cond_cap = 1e6;
inline constexpr double canonical_theta = 0.3;

template <typename Real>
struct LadderPair
{
	Operator<Real> c;
	Operator<Real> c_dag;
};

template <typename Real>
struct QuadraturePair
{
	Operator<Real> x;
	Operator<Real> p;
};

template <typename Real>
struct PseudoBosonPair
{
	Operator<Real> a;
	Operator<Real> b;
};

template <typename Real>
struct BiCoherentPair
{
	Vector<Real> phi;
	Vector<Real> psi;
};

inline void require_truncation(int n)
{
	if(n < 2)
		throw DimensionMismatch("Fock truncation must be at least 2, got " + std::to_string(n));
}

/// Truncated annihilation operator, c|n> = sqrt(n)|n-1>, and its adjoint.
/// [c, c^dagger] is the identity except the (N-1, N-1) entry, which is 1 - N.
template <typename Real = double>
LadderPair<Real> ladder(int n)
{
	require_truncation(n);
	Operator<Real> c = Operator<Real>::Zero(n, n);
	for(int k = 1; k < n; ++k)
		c(k - 1, k) = std::sqrt(Real(k));
	Operator<Real> c_dag = c.adjoint();
	return {std::move(c), std::move(c_dag)};
}

template <typename Real = double>
Operator<Real> number_operator(int n)
{
	require_truncation(n);
	Operator<Real> out = Operator<Real>::Zero(n, n);
	for(int k = 0; k < n; ++k)
		out(k, k) = Real(k);
	return out;
}

/// x0 = (c + c^dagger)/sqrt2, p0 = (c - c^dagger)/(sqrt2 i)
template <typename Real = double>
QuadraturePair<Real> position_momentum(int n)
{
	const auto [c, c_dag] = ladder<Real>(n);
	const Real root2 = std::sqrt(Real(2));
	const Complex<Real> i(0, 1);
	return {(c + c_dag) / root2, (c - c_dag) / (root2 * i)};
}

/// Drop the top Fock level, where truncation breaks canonical relations.
template <typename Derived>
auto below_top_level(const Eigen::MatrixBase<Derived>& x)
{
	return x.topLeftCorner(x.rows() - 1, x.cols() - 1);
}

/// Poisson tail sum_{n >= N} e^{-l} l^n / n! for l = |z|^2.
template <typename Real>
Real coherent_tail_mass(Complex<Real> z, int n)
{
	const Real lambda = std::norm(z);
	if(lambda == Real(0))
		return n <= 0 ? Real(1) : Real(0);
	const Real log_lambda = std::log(lambda);
	Real tail = 0;
	for(int k = std::max(n, 0);; ++k)
	{
		const Real term = std::exp(-lambda + Real(k) * log_lambda - std::lgamma(Real(k) + 1));
		tail += term;
		if(Real(k) > lambda && term < tail * std::numeric_limits<Real>::epsilon())
			break;
		if(term == Real(0) && Real(k) > lambda)
			break;
	}
	return tail;
}

/// Smallest N >= 2 whose Poisson tail is below the admissibility limit.
template <typename Real>
int minimal_truncation(Complex<Real> z)
{
	int n = 2;
	while(coherent_tail_mass(z, n) > Real(tail_mass_limit))
		++n;
	return n;
}

/// Truncated, renormalized coherent state sum_{n<N} z^n/sqrt(n!) |n>.
/// Throws TruncationTooSmall if the discarded Poisson mass exceeds 1e-20.
template <typename Real>
Vector<Real> coherent_state(Complex<Real> z, int n)
{
	require_truncation(n);
	if(coherent_tail_mass(z, n) > Real(tail_mass_limit))
	{
		const int needed = minimal_truncation(z);
		std::ostringstream msg;
		msg << "coherent_state: truncation " << n << " too small for |z| = " << std::abs(z) << ", need N >= " << needed;
		throw TruncationTooSmall(msg.str(), needed);
	}
	Vector<Real> v(n);
	v(0) = 1;
	for(int k = 1; k < n; ++k)
		v(k) = v(k - 1) * z / std::sqrt(Real(k));
	v.normalize();
	return v;
}

/// Bounded invertible R with bounded inverse; source of regular pseudo-bosons.
template <typename Real>
class RegularTransform
{
public:
	static RegularTransform from_operator(const Operator<Real>& r, Real cond_cap = Real(default_transform_cond_cap))
	{
		require_square(r, "RegularTransform");
		Eigen::JacobiSVD<Operator<Real>> svd(r);
		const auto& sv = svd.singularValues();
		const Real smallest = sv(sv.size() - 1);
		if(!(smallest > 0))
			throw IllConditionedMetric("RegularTransform: R is singular");
		const Real cond = sv(0) / smallest;
		if(cond > cond_cap)
			throw IllConditionedMetric("RegularTransform: cond(R) = " + std::to_string(static_cast<double>(cond)) +
			                           " exceeds cap");

		RegularTransform t;
		t.r_ = r;
		t.r_inv_ = r.partialPivLu().inverse();
		t.cond_ = cond;
		const Eigen::Index n = r.rows();
		if((t.r_ * t.r_inv_ - Operator<Real>::Identity(n, n)).cwiseAbs().maxCoeff() > Real(1e-10))
			throw IllConditionedMetric("RegularTransform: inverse residual above 1e-10");
		return t;
	}

	static RegularTransform identity(int n) { return from_operator(Operator<Real>::Identity(n, n)); }

	const Operator<Real>& r() const { return r_; }
	const Operator<Real>& r_inv() const { return r_inv_; }
	Real condition() const { return cond_; }
	int dim() const { return static_cast<int>(r_.rows()); }

private:
	RegularTransform() = default;

	Operator<Real> r_;
	Operator<Real> r_inv_;
	Real cond_ = 1;
};

/// R = exp(-theta (T + T^dagger)/2), T the level-lowering shift |n><n+1|.
/// Hermitian, non-unitary, cond(R) <= e^{2 theta} at any truncation.
template <typename Real = double>
RegularTransform<Real> canonical_transform(int n, Real theta = Real(canonical_theta))
{
	require_truncation(n);
	Operator<Real> hop = Operator<Real>::Zero(n, n);
	for(int k = 0; k + 1 < n; ++k)
	{
		hop(k, k + 1) = Real(0.5);
		hop(k + 1, k) = Real(0.5);
	}
	return RegularTransform<Real>::from_operator(mat_exp<Real>(-theta * hop));
}

/// a = R c R^{-1}, b = R c^dagger R^{-1}
template <typename Real>
PseudoBosonPair<Real> pseudo_boson_pair(const RegularTransform<Real>& t)
{
	const auto [c, c_dag] = ladder<Real>(t.dim());
	return {t.r() * c * t.r_inv(), t.r() * c_dag * t.r_inv()};
}

/// omega b a = R (omega c^dagger c) R^{-1}
template <typename Real>
Operator<Real> pseudo_boson_hamiltonian(const RegularTransform<Real>& t, Real omega = Real(1))
{
	const auto [a, b] = pseudo_boson_pair(t);
	return omega * b * a;
}

/// phi(z) = R Phi(z), psi(z) = (R^{-1})^dagger Phi(z)
template <typename Real>
BiCoherentPair<Real> bi_coherent(Complex<Real> z, const RegularTransform<Real>& t)
{
	const Vector<Real> base = coherent_state(z, t.dim());
	return {t.r() * base, t.r_inv().adjoint() * base};
}

/// X = (a + b)/sqrt2, P = (a - b)/(sqrt2 i)
template <typename Real>
QuadraturePair<Real> xp_pair(const Operator<Real>& a, const Operator<Real>& b)
{
	require_same_dim(a.rows(), b.rows(), "xp_pair");
	const Real root2 = std::sqrt(Real(2));
	const Complex<Real> i(0, 1);
	return {(a + b) / root2, (a - b) / (root2 * i)};
}

/// Metric with S^{-1} = R R^dagger; bi-coherent phi(z) is normalized under it.
template <typename Real>
Metric<Real> bi_coherent_metric(const RegularTransform<Real>& t)
{
	return Metric<Real>::from_operator(t.r_inv().adjoint() * t.r_inv());
}

/// Metric S = R R^dagger, the one under which psi(z) is normalized.
template <typename Real>
Metric<Real> dual_bi_coherent_metric(const RegularTransform<Real>& t)
{
	return Metric<Real>::from_operator(t.r() * t.r().adjoint());
}

} // namespace nhur::fock
