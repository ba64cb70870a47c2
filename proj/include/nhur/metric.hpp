#pragma once

#include "nhur/linalg.hpp"

#include <optional>

namespace nhur
{

inline constexpr double default_metric_cond_cap = 1e12;

/// Positive-definite Hermitian operator S with its square root, inverse square
/// root and inverse, all obtained from one Hermitian eigendecomposition.
template <typename Real>
class Metric
{
public:
	/// Throws NotHermitian if S is not Hermitian to ~1e-10 (relative), and
	/// IllConditionedMetric if S is not positive or cond(S) exceeds `cond_cap`.
	static Metric from_operator(const Operator<Real>& s, Real cond_cap = Real(default_metric_cond_cap))
	{
		require_square(s, "Metric");
		const Real scale = std::max(Real(1), s.norm());
		if(hermiticity_defect(s) > Real(1e-10) * scale)
			throw NotHermitian("Metric: S is not Hermitian");

		const Operator<Real> herm = (s + s.adjoint()) / Real(2);
		Eigen::SelfAdjointEigenSolver<Operator<Real>> solver(herm);
		const auto& lambda = solver.eigenvalues();
		const Real lo = lambda.minCoeff();
		const Real hi = lambda.maxCoeff();
		if(!(lo > 0))
			throw IllConditionedMetric("Metric: S is not positive definite");
		if(hi / lo > cond_cap)
			throw IllConditionedMetric("Metric: cond(S) = " + std::to_string(hi / lo) + " exceeds cap");

		const auto& v = solver.eigenvectors();
		const auto root = lambda.array().sqrt();
		Metric m;
		m.s_ = herm;
		m.half_ = v * root.matrix().asDiagonal() * v.adjoint();
		m.half_inv_ = v * root.inverse().matrix().asDiagonal() * v.adjoint();
		m.inv_ = v * lambda.array().inverse().matrix().asDiagonal() * v.adjoint();
		m.cond_ = hi / lo;
		return m;
	}

	static Metric identity(Eigen::Index n) { return from_operator(Operator<Real>::Identity(n, n)); }

	const Operator<Real>& s() const { return s_; }
	const Operator<Real>& half() const { return half_; }
	const Operator<Real>& half_inv() const { return half_inv_; }
	const Operator<Real>& inverse() const { return inv_; }
	Real condition() const { return cond_; }
	Eigen::Index dim() const { return s_.rows(); }

private:
	Metric() = default;

	Operator<Real> s_;
	Operator<Real> half_;
	Operator<Real> half_inv_;
	Operator<Real> inv_;
	Real cond_ = 1;
};

/// <f, g>_S = <S f, g>
template <typename Real, typename DerivedF, typename DerivedG>
Complex<Real> weighted_inner(const Metric<Real>& m, const Eigen::MatrixBase<DerivedF>& f, const Eigen::MatrixBase<DerivedG>& g)
{
	return (m.s() * f).dot(g);
}

/// Adjoint with respect to <.,.>_S: S^{-1} X^dagger S.
template <typename Real>
Operator<Real> sharp_adjoint(const Metric<Real>& m, const Operator<Real>& x)
{
	require_same_dim(m.dim(), x.rows(), "sharp_adjoint");
	return m.inverse() * x.adjoint() * m.s();
}

enum class ProductTag
{
	standard,
	weighted
};

inline const char* to_string(ProductTag t)
{
	return t == ProductTag::standard ? "standard" : "weighted";
}

/// Either the standard scalar product or a metric-weighted one.
template <typename Real>
class ScalarProduct
{
public:
	static ScalarProduct standard() { return ScalarProduct(); }
	static ScalarProduct weighted(Metric<Real> m) { return ScalarProduct(std::move(m)); }

	ProductTag tag() const { return metric_ ? ProductTag::weighted : ProductTag::standard; }
	const std::optional<Metric<Real>>& metric() const { return metric_; }

	template <typename DerivedF, typename DerivedG>
	Complex<Real> inner(const Eigen::MatrixBase<DerivedF>& f, const Eigen::MatrixBase<DerivedG>& g) const
	{
		if(metric_)
			return weighted_inner(*metric_, f, g);
		return f.dot(g);
	}

	template <typename Derived>
	Real norm(const Eigen::MatrixBase<Derived>& f) const
	{
		return std::sqrt(std::max(Real(0), std::real(inner(f, f))));
	}

	/// Adjoint relative to this product (dagger or sharp).
	Operator<Real> adjoint(const Operator<Real>& x) const
	{
		if(metric_)
			return sharp_adjoint(*metric_, x);
		return x.adjoint();
	}

	/// Q_phi = 1 - |phi><phi| in this product: Q f = f - <phi, f> phi.
	Operator<Real> complement_projector(const Vector<Real>& phi) const
	{
		const Eigen::Index n = phi.size();
		Vector<Real> bra = metric_ ? Vector<Real>(metric_->s() * phi) : phi;
		return Operator<Real>::Identity(n, n) - phi * bra.adjoint();
	}

private:
	ScalarProduct() = default;
	explicit ScalarProduct(Metric<Real> m) : metric_(std::move(m)) {}

	std::optional<Metric<Real>> metric_;
};

/// Metric built from the biorthogonal eigensystem of H, with diagnostics.
template <typename Real>
struct HamiltonianMetric
{
	Metric<Real> metric;
	EigenSystem<Real> eigensystem;
	// sum_k |phi_k><phi_k|, the biorthogonal expression for S^{-1}
	Operator<Real> biorthogonal_inverse;
	// max_k |S phi_k - psi_k|
	Real eigenvector_residual = 0;
	// |S H - H^dagger S|, only evaluated when the spectrum is real
	std::optional<Real> intertwining_residual;
	// set when some Im(E_k) != 0; S H = H^dagger S is not expected then
	bool complex_spectrum = false;
};

/// S = sum_k |psi_k><psi_k| from the (unit right-vector) eigensystem of H.
/// Throws DegenerateSpectrum when the spectrum is degenerate or the
/// eigenvectors are not biorthonormalizable.
template <typename Real>
HamiltonianMetric<Real> metric_from_hamiltonian(const Operator<Real>& h, Real tol = Real(default_degeneracy_tol),
                                                Real cond_cap = Real(default_metric_cond_cap))
{
	EigenSystem<Real> sys = spectral(h, tol);
	if(!sys.biorthonormal)
		throw DegenerateSpectrum("metric_from_hamiltonian: eigenvectors are not biorthonormalizable");

	const Operator<Real> s = sys.left * sys.left.adjoint();
	HamiltonianMetric<Real> out{Metric<Real>::from_operator((s + s.adjoint()) / Real(2), cond_cap), std::move(sys), {}, 0, {}, false};
	const auto& e = out.eigensystem;
	out.biorthogonal_inverse = e.right * e.right.adjoint();

	for(Eigen::Index k = 0; k < e.size(); ++k)
	{
		out.eigenvector_residual =
			std::max(out.eigenvector_residual, (out.metric.s() * e.right.col(k) - e.left.col(k)).norm());
		if(std::abs(e.eigenvalues(k).imag()) > tol * std::max(Real(1), std::abs(e.eigenvalues(k))))
			out.complex_spectrum = true;
	}
	if(!out.complex_spectrum)
		out.intertwining_residual = (out.metric.s() * h - h.adjoint() * out.metric.s()).norm();
	return out;
}

/// H0 = S^{1/2} H S^{-1/2}; Hermitian when H has real spectrum and S intertwines.
template <typename Real>
Operator<Real> hermitian_counterpart(const Metric<Real>& m, const Operator<Real>& h)
{
	require_same_dim(m.dim(), h.rows(), "hermitian_counterpart");
	return m.half() * h * m.half_inv();
}

/// B = S^{-1/2} B0 S^{1/2}, which satisfies S B = B^dagger S for Hermitian B0.
template <typename Real>
Operator<Real> good_observable(const Metric<Real>& m, const Operator<Real>& b0, Real herm_tol = Real(1e-10))
{
	require_square(b0, "good_observable");
	require_same_dim(m.dim(), b0.rows(), "good_observable");
	if(hermiticity_defect(b0) > herm_tol * std::max(Real(1), b0.norm()))
		throw NotHermitian("good_observable: B0 is not Hermitian");
	return m.half_inv() * b0 * m.half();
}

/// |S B - B^dagger S|
template <typename Real>
Real intertwining_defect(const Metric<Real>& m, const Operator<Real>& b)
{
	return (m.s() * b - b.adjoint() * m.s()).norm();
}

} // namespace nhur
