#pragma once

#include "nhur/metric.hpp"

#include <array>
#include <optional>

namespace nhur
{

inline constexpr double default_normalization_tol = 1e-10;
inline constexpr double default_saturation_tol = 1e-8;

template <typename Real>
void require_normalized(const Vector<Real>& phi, const ScalarProduct<Real>& p, Real tol = Real(default_normalization_tol))
{
	if(p.metric())
		require_same_dim(p.metric()->dim(), phi.size(), "state");
	const Real n = p.norm(phi);
	if(std::abs(n - Real(1)) > tol)
		throw NotNormalized("state norm is " + std::to_string(static_cast<double>(n)) + " under the " +
		                    to_string(p.tag()) + " product");
}

/// <phi, X phi>_P
template <typename Real>
Complex<Real> mean(const Operator<Real>& x, const Vector<Real>& phi, const ScalarProduct<Real>& p)
{
	require_same_dim(x.cols(), phi.size(), "mean");
	require_normalized(phi, p);
	return p.inner(phi, x * phi);
}

/// X - <X> 1
template <typename Real>
Operator<Real> centered(const Operator<Real>& x, const Vector<Real>& phi, const ScalarProduct<Real>& p)
{
	const Complex<Real> m = mean(x, phi, p);
	Operator<Real> out = x;
	out.diagonal().array() -= m;
	return out;
}

/// Delta X = |(X - <X>) phi|_P
template <typename Real>
Real variance(const Operator<Real>& x, const Vector<Real>& phi, const ScalarProduct<Real>& p)
{
	const Complex<Real> m = mean(x, phi, p);
	return p.norm(Vector<Real>(x * phi - m * phi));
}

/// Every quantity entering the two-operator bounds for one (A, B, phi, P).
/// `cross` is <A^ phi, B^ phi>_P with A^ = A - <A>; C and D are the real
/// coefficients of the two quadratic forms in alpha.
template <typename Real>
struct UncertaintyReport
{
	Complex<Real> mean_a;
	Complex<Real> mean_b;
	Real delta_a = 0;
	Real delta_b = 0;
	Complex<Real> cross;
	Real bound23 = 0;
	Real c = 0;
	Real d = 0;
	Real bound210 = 0;
	Complex<Real> commutator_term;
	Complex<Real> anticommutator_term;
	// <A phi, Q_phi B phi>_P, the projector form of `cross`
	Complex<Real> projector_cross;
	ProductTag product = ProductTag::standard;

	Real delta_product() const { return delta_a * delta_b; }
};

template <typename Real>
UncertaintyReport<Real> ur_report(const Operator<Real>& a, const Operator<Real>& b, const Vector<Real>& phi,
                                  const ScalarProduct<Real>& p)
{
	require_same_dim(a.rows(), b.rows(), "ur_report");
	UncertaintyReport<Real> r;
	r.product = p.tag();
	r.mean_a = mean(a, phi, p);
	r.mean_b = mean(b, phi, p);

	Operator<Real> a_hat = a;
	a_hat.diagonal().array() -= r.mean_a;
	Operator<Real> b_hat = b;
	b_hat.diagonal().array() -= r.mean_b;

	const Vector<Real> fa = a_hat * phi;
	const Vector<Real> fb = b_hat * phi;
	r.delta_a = p.norm(fa);
	r.delta_b = p.norm(fb);
	r.cross = p.inner(fa, fb);

	const Complex<Real> ba = p.inner(fb, fa);
	r.c = Real(-2) * ba.imag();
	r.d = Real(2) * ba.real();
	r.bound23 = std::abs(r.cross);
	r.bound210 = std::max(std::abs(r.c), std::abs(r.d)) / Real(2);

	const Operator<Real> a_adj = p.adjoint(a);
	const Operator<Real> a_hat_adj = p.adjoint(a_hat);
	r.commutator_term = p.inner(phi, Vector<Real>(commutator(a_adj, b) * phi));
	r.anticommutator_term = p.inner(phi, Vector<Real>(anticommutator(a_hat_adj, b_hat) * phi));
	r.projector_cross = p.inner(Vector<Real>(a * phi), Vector<Real>(p.complement_projector(phi) * (b * phi)));
	return r;
}

/// The bound on |<A^+B^>| implies the bound on max(|C|,|D|)/2, and they
/// coincide when C or D vanishes. "Vanishes" means min(|C|, |D|) <= tol.
template <typename Real>
bool lemma1_check(const UncertaintyReport<Real>& r, Real tol = Real(1e-10))
{
	bool ok = r.bound23 >= r.bound210 - tol;
	if(std::min(std::abs(r.c), std::abs(r.d)) <= tol)
		ok = ok && std::abs(r.bound23 - r.bound210) <= tol;
	return ok;
}

enum class SaturationCase
{
	c1_eigen_a,
	c2_eigen_b,
	c3_combination,
	none
};

inline const char* to_string(SaturationCase c)
{
	switch(c)
	{
	case SaturationCase::c1_eigen_a: return "c1_eigenA";
	case SaturationCase::c2_eigen_b: return "c2_eigenB";
	case SaturationCase::c3_combination: return "c3_combination";
	case SaturationCase::none: break;
	}
	return "none";
}

template <typename Real>
struct SaturationResult
{
	// Delta A Delta B = |<A^ phi, B^ phi>|
	bool saturated = false;
	// Delta A Delta B = max(|C|, |D|)/2
	bool saturated210 = false;
	SaturationCase condition = SaturationCase::none;
	// A + gamma B has phi as eigenvector; set for c3
	std::optional<Complex<Real>> gamma;
	Real residual = 0;
	// saturated agrees with whether a case fired
	bool consistent = true;
	Real delta_product = 0;
	Real bound23 = 0;
	Real bound210 = 0;
};

/// Classifies saturation of |<A^ phi, B^ phi>| <= Delta A Delta B.
///
/// Cases are tried in order c1 (A^ phi = 0), c2 (B^ phi = 0), c3 (A^ phi =
/// -gamma B^ phi with gamma from one-variable least squares). c1 and c2 use
/// the absolute threshold `tol`; c3 accepts when the least-squares residual is
/// at most tol * (|A^ phi| + |B^ phi|). `saturated` compares the product with
/// the bound at relative tolerance tol * max(1, Delta A Delta B).
template <typename Real>
SaturationResult<Real> saturation_test(const Operator<Real>& a, const Operator<Real>& b, const Vector<Real>& phi,
                                       const ScalarProduct<Real>& p, Real tol = Real(default_saturation_tol))
{
	const UncertaintyReport<Real> r = ur_report(a, b, phi, p);
	const Vector<Real> fa = a * phi - r.mean_a * phi;
	const Vector<Real> fb = b * phi - r.mean_b * phi;

	SaturationResult<Real> out;
	out.delta_product = r.delta_product();
	out.bound23 = r.bound23;
	out.bound210 = r.bound210;
	const Real scale = std::max(Real(1), out.delta_product);
	out.saturated = std::abs(out.delta_product - r.bound23) <= tol * scale;
	out.saturated210 = std::abs(out.delta_product - r.bound210) <= tol * scale;

	if(r.delta_a <= tol)
	{
		out.condition = SaturationCase::c1_eigen_a;
		out.residual = r.delta_a;
	}
	else if(r.delta_b <= tol || r.delta_b == Real(0))
	{
		out.condition = SaturationCase::c2_eigen_b;
		out.residual = r.delta_b;
	}
	else
	{
		const Complex<Real> g = -p.inner(fb, fa) / (r.delta_b * r.delta_b);
		out.residual = p.norm(Vector<Real>(fa + g * fb));
		if(out.residual <= tol * (r.delta_a + r.delta_b))
		{
			out.condition = SaturationCase::c3_combination;
			out.gamma = g;
		}
	}
	out.consistent = out.saturated == (out.condition != SaturationCase::none);
	return out;
}

/// Bounds from positivity of the 3x3 Gram matrix of (A^ phi, B^ phi, C^ phi).
///
/// ineq220 is the third Sylvester minor written out:
///   |f1|^2|f2|^2|f3|^2 + 2 Re(<f1,f2><f2,f3><f3,f1>)
///     >= |f1|^2 |<f2,f3>|^2 + |f2|^2 |<f1,f3>|^2 + |f3|^2 |<f1,f2>|^2
/// and ineq221 is the product of three Schwarz inequalities.
template <typename Real>
struct TripleReport
{
	Operator<Real> gram3;
	std::array<Real, 3> minors{};
	std::array<Real, 3> deltas{};
	Real ineq220_lhs = 0;
	Real ineq220_rhs = 0;
	Real ineq221_lhs = 0;
	Real ineq221_rhs = 0;
};

template <typename Real>
TripleReport<Real> triple_report(const Operator<Real>& a, const Operator<Real>& b, const Operator<Real>& c,
                                 const Vector<Real>& phi, const ScalarProduct<Real>& p)
{
	Operator<Real> f(phi.size(), 3);
	const std::array<const Operator<Real>*, 3> ops{&a, &b, &c};
	for(std::size_t k = 0; k < 3; ++k)
	{
		const Complex<Real> m = mean(*ops[k], phi, p);
		f.col(static_cast<Eigen::Index>(k)) = *ops[k] * phi - m * phi;
	}

	TripleReport<Real> t;
	t.gram3 = gram(f, [&p](const auto& u, const auto& v) { return p.inner(u, v); });
	const auto minors = leading_principal_minors(t.gram3);
	std::copy(minors.begin(), minors.end(), t.minors.begin());

	const auto& g = t.gram3;
	const Real n1 = g(0, 0).real(), n2 = g(1, 1).real(), n3 = g(2, 2).real();
	for(std::size_t k = 0; k < 3; ++k)
		t.deltas[k] = std::sqrt(std::max(Real(0), g(Eigen::Index(k), Eigen::Index(k)).real()));

	const Complex<Real> cyclic = g(0, 1) * g(1, 2) * g(2, 0);
	t.ineq220_lhs = n1 * n2 * n3 + Real(2) * cyclic.real();
	t.ineq220_rhs = n1 * std::norm(g(1, 2)) + n2 * std::norm(g(0, 2)) + n3 * std::norm(g(0, 1));
	t.ineq221_lhs = n1 * n2 * n3;
	t.ineq221_rhs = std::abs(cyclic);
	return t;
}

} // namespace nhur
