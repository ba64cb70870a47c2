#include "support.hpp"

#include "doctest.h"

using namespace nhur;
using namespace nhur::testing;

TEST_CASE("adjoint: defining identity, involution, Hermitian fixed point")
{
	Rng rng{11};
	for(int trial = 0; trial < 50; ++trial)
	{
		const Eigen::Index n = 2 + trial % 7;
		const Op x = random_op(n, rng);
		const Vec f = random_vector(n, rng);
		const Vec g = random_vector(n, rng);
		const cd lhs = (adjoint(x) * f).dot(g);
		const cd rhs = f.dot(x * g);
		CHECK(std::abs(lhs - rhs) <= 1e-12 * f.norm() * g.norm() * norm2(x));
		CHECK((adjoint(adjoint(x)) - x).norm() == 0.0);

		const Op h = random_hermitian(n, rng);
		CHECK((adjoint(h) - h).norm() == 0.0);
	}
}

TEST_CASE("adjoint of truncated annihilation is creation with sqrt(n) subdiagonal")
{
	const auto [c, c_dag] = fock::ladder(6);
	const Op cd_ = adjoint(c);
	for(int i = 0; i < 6; ++i)
		for(int j = 0; j < 6; ++j)
		{
			const cd expected = (i == j + 1) ? cd(std::sqrt(double(i)), 0) : cd(0, 0);
			CHECK(cd_(i, j) == expected);
		}
	CHECK((cd_ - c_dag).norm() == 0.0);
}

TEST_CASE("mat_exp: zero, diagonal, Hermitian unitary against eigendecomposition oracle")
{
	CHECK((mat_exp<double>(Op::Zero(4, 4)) - Op::Identity(4, 4)).norm() == doctest::Approx(0.0));

	Vec d(3);
	d << cd(0.5, 0), cd(-1.0, 2.0), cd(0, -3);
	const Op ed = mat_exp<double>(Op(d.asDiagonal()));
	for(int k = 0; k < 3; ++k)
		CHECK(std::abs(ed(k, k) - std::exp(d(k))) <= 1e-14 * std::abs(std::exp(d(k))));
	CHECK((ed - Op(ed.diagonal().asDiagonal())).norm() == 0.0);

	Rng rng{5};
	for(int trial = 0; trial < 20; ++trial)
	{
		const Eigen::Index n = 2 + trial % 6;
		const Op h = random_hermitian(n, rng) * 3.0;
		const double t = 0.7 + trial;
		const Op u = mat_exp<double>(I * t * h);
		CHECK((u.adjoint() * u - Op::Identity(n, n)).norm() <= 1e-10);

		Eigen::SelfAdjointEigenSolver<Op> es(h);
		const Op oracle = es.eigenvectors() *
		                  (I * t * es.eigenvalues().cast<cd>()).array().exp().matrix().asDiagonal() *
		                  es.eigenvectors().adjoint();
		CHECK((u - oracle).norm() <= 1e-11 * std::max(1.0, t * norm2(h)));
	}
}

TEST_CASE("mat_exp: X e^X e^-X = 1 and the norm cap")
{
	Rng rng{6};
	for(int trial = 0; trial < 30; ++trial)
	{
		const Eigen::Index n = 2 + trial % 6;
		Op x = random_op(n, rng);
		x *= (1.0 + trial % 10) / norm2(x);
		const Op prod = mat_exp<double>(x) * mat_exp<double>(Op(-x));
		CHECK((prod - Op::Identity(n, n)).norm() <= 1e-10);
	}
	const Op big = Op::Identity(3, 3) * cd(0, 2000.0);
	CHECK_THROWS_AS(mat_exp<double>(big), Overflow);
	CHECK_NOTHROW(mat_exp<double>(big, 5000.0));
	Op bad = Op::Zero(2, 2);
	bad(0, 1) = cd(std::nan(""), 0);
	CHECK_THROWS_AS(mat_exp<double>(bad), Overflow);
}

TEST_CASE("spectral: diagonal matrix gives standard basis on both sides")
{
	Op h = Op::Zero(3, 3);
	h(0, 0) = 3;
	h(1, 1) = -1;
	h(2, 2) = 0.5;
	const auto sys = spectral(h);
	CHECK(sys.biorthonormal);
	for(Eigen::Index k = 0; k < 3; ++k)
	{
		const Eigen::Index idx = [&] {
			for(Eigen::Index j = 0; j < 3; ++j)
				if(std::abs(sys.eigenvalues(k) - h(j, j)) < 1e-12)
					return j;
			return Eigen::Index(-1);
		}();
		REQUIRE(idx >= 0);
		CHECK(std::abs(std::abs(sys.right(idx, k)) - 1.0) < 1e-12);
		CHECK((sys.left.col(k) - sys.right.col(k)).norm() < 1e-12);
	}
}

TEST_CASE("spectral: 2x2 upper triangular solved by hand")
{
	Op h(2, 2);
	h << 1, 1, 0, 2;
	const auto sys = spectral(h);
	REQUIRE(sys.biorthonormal);

	// Hand solution: phi_1 = (1,0), psi_1 = (1,-1); phi_2 = (1,1)/sqrt2, psi_2 = (0, sqrt2).
	// The projectors phi_k psi_k^dagger are free of the eigenvector phase.
	Op p1(2, 2), p2(2, 2);
	p1 << 1, -1, 0, 0;
	p2 << 0, 1, 0, 1;
	for(Eigen::Index k = 0; k < 2; ++k)
	{
		const Op proj = sys.right.col(k) * sys.left.col(k).adjoint();
		if(std::abs(sys.eigenvalues(k) - 1.0) < 1e-12)
			CHECK((proj - p1).norm() < 1e-12);
		else
		{
			CHECK(std::abs(sys.eigenvalues(k) - 2.0) < 1e-12);
			CHECK((proj - p2).norm() < 1e-12);
		}
	}
	CHECK(std::abs(sys.right.col(0).dot(sys.right.col(1))) > 0.5);
	CHECK(sys.residual(h) < 1e-12);
}

TEST_CASE("spectral: Hermitian input has real eigenvalues and left = right")
{
	Rng rng{8};
	for(int trial = 0; trial < 20; ++trial)
	{
		const Eigen::Index n = 2 + trial % 6;
		const Op h = random_hermitian(n, rng);
		const auto sys = spectral(h);
		CHECK(sys.biorthonormal);
		CHECK(sys.eigenvalues.imag().cwiseAbs().maxCoeff() < 1e-12);
		CHECK((sys.left - sys.right).norm() < 1e-9);
	}
}

TEST_CASE("spectral: reconstruction, residuals and degeneracy error")
{
	Rng rng{9};
	for(int trial = 0; trial < 40; ++trial)
	{
		const Eigen::Index n = 2 + trial % 7;
		const Op h = random_op(n, rng);
		const auto sys = spectral(h);
		REQUIRE(sys.biorthonormal);
		CHECK((sys.reconstruct() - h).norm() <= 1e-8);
		CHECK(sys.residual(h) <= 1e-9);
		const Op g = sys.left.adjoint() * sys.right;
		CHECK((g - Op::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-8);
	}

	Op deg = Op::Identity(3, 3);
	deg(0, 1) = 1;
	CHECK_THROWS_AS(spectral(deg), DegenerateSpectrum);
	Op close = Op::Zero(2, 2);
	close(1, 1) = 1e-10;
	CHECK_THROWS_AS(spectral(close), DegenerateSpectrum);
	CHECK_NOTHROW(spectral(close, 1e-12));
}

namespace
{
// Independent 3x3 determinant by cofactor expansion.
cd det3(const Op& m)
{
	return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
	       m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}
} // namespace

TEST_CASE("gram: orthonormal triple, repeated vector, random Sylvester minors")
{
	CHECK((gram<double>(Op::Identity(5, 3)) - Op::Identity(3, 3)).norm() == 0.0);

	Rng rng{10};
	const Vec f = random_state(4, rng);
	Op rep(4, 3);
	rep << f, f, f;
	const Op ones = gram<double>(rep);
	CHECK((ones - Op::Ones(3, 3)).norm() < 1e-14);
	CHECK(std::abs(ones.determinant()) < 1e-14);

	for(int trial = 0; trial < 200; ++trial)
	{
		const Eigen::Index n = 1 + trial % 6;
		Op v(n, 3);
		v << random_vector(n, rng), random_vector(n, rng), random_vector(n, rng);
		const Op g = gram<double>(v);
		CHECK(g == g.adjoint());
		const double m1 = g(0, 0).real();
		const double m2 = (g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0)).real();
		const double m3 = det3(g).real();
		CHECK(m1 >= -1e-12);
		CHECK(m2 >= -1e-10);
		CHECK(m3 >= -1e-10);
		const auto minors = leading_principal_minors(g);
		CHECK(std::abs(minors[2] - m3) <= 1e-10 * std::max(1.0, std::abs(m3)));
	}
}

TEST_CASE("core routines are generic in the scalar type")
{
	using LOp = Operator<long double>;
	LOp h(2, 2);
	h << 1.0L, 1.0L, 0.0L, 2.0L;
	const auto sys = spectral<long double>(h, 1e-12L);
	CHECK(sys.biorthonormal);
	CHECK(static_cast<double>((sys.reconstruct() - h).norm()) < 1e-15);
	const LOp e = mat_exp<long double>(LOp::Zero(3, 3));
	CHECK(static_cast<double>((e - LOp::Identity(3, 3)).norm()) == 0.0);
}
