#pragma once

#include "nhur/types.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace nhur
{

inline constexpr double default_exp_norm_cap = 1e3;
inline constexpr double default_degeneracy_tol = 1e-8;
inline constexpr double default_eigen_residual_tol = 1e-9;

template <typename Derived>
auto adjoint(const Eigen::MatrixBase<Derived>& x)
{
	return x.adjoint().eval();
}

template <typename DerivedA, typename DerivedB>
auto commutator(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y)
{
	return (x * y - y * x).eval();
}

template <typename DerivedA, typename DerivedB>
auto anticommutator(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y)
{
	return (x * y + y * x).eval();
}

template <typename Derived>
typename Derived::RealScalar norm1(const Eigen::MatrixBase<Derived>& x)
{
	if(x.size() == 0)
		return 0;
	return x.cwiseAbs().colwise().sum().maxCoeff();
}

// Spectral norm (largest singular value).
template <typename Derived>
typename Derived::RealScalar norm2(const Eigen::MatrixBase<Derived>& x)
{
	using Plain = typename Derived::PlainObject;
	if(x.size() == 0)
		return 0;
	Eigen::JacobiSVD<Plain> svd(x.eval());
	return svd.singularValues()(0);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x)
{
	return x.allFinite();
}

template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& x)
{
	return (x - x.adjoint()).norm();
}

template <typename Real>
void require_square(const Operator<Real>& x, const char* what)
{
	if(x.rows() != x.cols())
	{
		std::ostringstream msg;
		msg << what << ": operator is " << x.rows() << "x" << x.cols() << ", not square";
		throw DimensionMismatch(msg.str());
	}
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what)
{
	if(a != b)
	{
		std::ostringstream msg;
		msg << what << ": dimension " << a << " vs " << b;
		throw DimensionMismatch(msg.str());
	}
}

/// Matrix exponential. Throws Overflow when the 1-norm of the argument exceeds
/// `norm_cap` or the result is not finite.
template <typename Real>
Operator<Real> mat_exp(const Operator<Real>& x, Real norm_cap = Real(default_exp_norm_cap))
{
	require_square(x, "mat_exp");
	if(!x.allFinite())
		throw Overflow("mat_exp: argument has non-finite entries");
	const Real n = norm1(x);
	if(n > norm_cap)
	{
		std::ostringstream msg;
		msg << "mat_exp: |X|_1 = " << n << " exceeds cap " << norm_cap;
		throw Overflow(msg.str());
	}
	Operator<Real> result = x.exp();
	if(!result.allFinite())
		throw Overflow("mat_exp: result overflowed");
	return result;
}

/// Eigenvalues with right eigenvectors (columns of `right`) and left
/// eigenvectors (columns of `left`, eigenvectors of H^dagger for conj(E_k)).
/// When `biorthonormal` holds, <left_j, right_k> = delta_jk.
template <typename Real>
struct EigenSystem
{
	Vector<Real> eigenvalues;
	Operator<Real> right;
	Operator<Real> left;
	bool biorthonormal = false;

	Eigen::Index size() const { return eigenvalues.size(); }

	// sum_k E_k |phi_k><psi_k|
	Operator<Real> reconstruct() const
	{
		return right * eigenvalues.asDiagonal() * left.adjoint();
	}

	// max_k of the residuals |H phi_k - E_k phi_k| and |H^dagger psi_k - conj(E_k) psi_k|,
	// each relative to the vector norm.
	Real residual(const Operator<Real>& h) const
	{
		Real worst = 0;
		for(Eigen::Index k = 0; k < size(); ++k)
		{
			const auto& e = eigenvalues(k);
			const Real rn = right.col(k).norm();
			const Real ln = left.col(k).norm();
			worst = std::max(worst, (h * right.col(k) - e * right.col(k)).norm() / rn);
			worst = std::max(worst, (h.adjoint() * left.col(k) - std::conj(e) * left.col(k)).norm() / ln);
		}
		return worst;
	}
};

template <typename Real>
Real min_eigenvalue_gap(const Vector<Real>& values)
{
	Real gap = std::numeric_limits<Real>::infinity();
	for(Eigen::Index j = 0; j < values.size(); ++j)
		for(Eigen::Index k = j + 1; k < values.size(); ++k)
			gap = std::min(gap, std::abs(values(j) - values(k)));
	return gap;
}

/// Right and left eigensystem of a (generally non-normal) operator. Left
/// vectors come from an independent eigensolve of H^dagger, matched to the
/// right ones by eigenvalue and rescaled (never mixed) so <psi_k, phi_k> = 1.
///
/// Throws DegenerateSpectrum if two eigenvalues are closer than `tol`.
template <typename Real>
EigenSystem<Real> spectral(const Operator<Real>& h, Real tol = Real(default_degeneracy_tol))
{
	require_square(h, "spectral");
	const Eigen::Index n = h.rows();

	Eigen::ComplexEigenSolver<Operator<Real>> right_solver(h);
	Eigen::ComplexEigenSolver<Operator<Real>> left_solver(Operator<Real>(h.adjoint()));
	if(right_solver.info() != Eigen::Success || left_solver.info() != Eigen::Success)
		throw DegenerateSpectrum("spectral: eigensolver did not converge");

	EigenSystem<Real> sys;
	sys.eigenvalues = right_solver.eigenvalues();
	sys.right = right_solver.eigenvectors();

	const Real gap = min_eigenvalue_gap(sys.eigenvalues);
	if(n > 1 && gap < tol)
	{
		std::ostringstream msg;
		msg << "spectral: eigenvalue gap " << gap << " below tolerance " << tol;
		throw DegenerateSpectrum(msg.str());
	}

	// Pair each conj(E_k) with the nearest unused eigenvalue of H^dagger.
	const Vector<Real>& left_values = left_solver.eigenvalues();
	sys.left.resize(n, n);
	std::vector<bool> used(static_cast<std::size_t>(n), false);
	for(Eigen::Index k = 0; k < n; ++k)
	{
		const Complex<Real> target = std::conj(sys.eigenvalues(k));
		Eigen::Index best = -1;
		Real best_dist = std::numeric_limits<Real>::infinity();
		for(Eigen::Index j = 0; j < n; ++j)
		{
			if(used[static_cast<std::size_t>(j)])
				continue;
			const Real d = std::abs(left_values(j) - target);
			if(d < best_dist)
			{
				best_dist = d;
				best = j;
			}
		}
		used[static_cast<std::size_t>(best)] = true;
		sys.left.col(k) = left_solver.eigenvectors().col(best);
	}

	// ComplexEigenSolver normalizes, so |<psi_k, phi_k>| is the cosine between them.
	const Real overlap_floor = Real(1e-8);
	bool overlaps_ok = true;
	for(Eigen::Index k = 0; k < n; ++k)
	{
		const Complex<Real> overlap = sys.left.col(k).dot(sys.right.col(k));
		if(std::abs(overlap) <= overlap_floor)
		{
			overlaps_ok = false;
			continue;
		}
		sys.left.col(k) /= std::conj(overlap);
	}

	if(overlaps_ok)
	{
		const Operator<Real> g = sys.left.adjoint() * sys.right;
		const Real defect = (g - Operator<Real>::Identity(n, n)).cwiseAbs().maxCoeff();
		sys.biorthonormal = defect <= Real(1e-6);
	}
	return sys;
}

/// Gram matrix G_ij = <f_i, f_j> of the columns of `vectors` under `inner`.
/// Hermitian by construction: the lower triangle mirrors the upper.
template <typename Real, typename Inner>
Operator<Real> gram(const Operator<Real>& vectors, Inner&& inner)
{
	const Eigen::Index k = vectors.cols();
	Operator<Real> g(k, k);
	for(Eigen::Index i = 0; i < k; ++i)
	{
		g(i, i) = Complex<Real>(std::real(inner(vectors.col(i), vectors.col(i))), 0);
		for(Eigen::Index j = i + 1; j < k; ++j)
		{
			g(i, j) = inner(vectors.col(i), vectors.col(j));
			g(j, i) = std::conj(g(i, j));
		}
	}
	return g;
}

template <typename Real>
Operator<Real> gram(const Operator<Real>& vectors)
{
	return gram(vectors, [](const auto& f, const auto& g) { return f.dot(g); });
}

/// Leading principal minors (real parts; Hermitian input has real minors).
template <typename Real>
std::vector<Real> leading_principal_minors(const Operator<Real>& g)
{
	std::vector<Real> minors;
	minors.reserve(static_cast<std::size_t>(g.rows()));
	for(Eigen::Index n = 1; n <= g.rows(); ++n)
		minors.push_back(std::real(g.topLeftCorner(n, n).determinant()));
	return minors;
}

} // namespace nhur
