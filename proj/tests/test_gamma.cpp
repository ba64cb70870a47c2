#include "support.hpp"

#include "doctest.h"

#include <numbers>

using namespace nhur;
using namespace nhur::testing;

namespace
{
const auto std_p = ScalarProduct<double>::standard();

std::vector<cd> sorted_spectrum(const Op& x)
{
	Eigen::ComplexEigenSolver<Op> es(x, false);
	std::vector<cd> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
	std::sort(ev.begin(), ev.end(), [](cd a, cd b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
	return ev;
}

double spectrum_distance(const Op& x, const Op& y)
{
	const auto a = sorted_spectrum(x);
	const auto b = sorted_spectrum(y);
	double worst = 0;
	for(std::size_t k = 0; k < a.size(); ++k)
		worst = std::max(worst, std::abs(a[k] - b[k]));
	return worst;
}
} // namespace

TEST_CASE("gamma_evolve: t = 0, unitary case keeps the spectrum, nilpotent closed form")
{
	Rng rng{61};
	const Op h = random_op(4, rng);
	const Op x = random_op(4, rng);
	CHECK((gamma_evolve(h, x, 0.0) - x).norm() < 1e-14);

	const Op herm = random_hermitian(4, rng);
	CHECK(spectrum_distance(gamma_evolve(herm, x, 1.3), x) <= 1e-10);
	CHECK((gamma_evolve(herm, x, 1.3) - alpha_evolve(herm, x, 1.3)).norm() <= 1e-12);

	// H = [[0, h],[0, 0]]: e^{-iHt} = 1 - iHt, so
	// gamma^t(1) = (1 + it H^dagger)(1 - it H) = 1 + it (H^dagger - H) + t^2 H^dagger H.
	Op nil = Op::Zero(2, 2);
	nil(0, 1) = cd(0.8, 0.3);
	const double t = 0.9;
	const Op id = Op::Identity(2, 2);
	const Op oracle = id + I * t * Op(nil.adjoint() - nil) + t * t * nil.adjoint() * nil;
	const Op g = gamma_evolve<double>(nil, id, t);
	CHECK((g - oracle).norm() <= 1e-13);
	CHECK((g - id).norm() > 0.1);
}

TEST_CASE("gamma_derivation: commuting Hermitian case, identity, finite differences")
{
	Rng rng{62};
	const Op herm = random_hermitian(5, rng);
	const Op poly = herm * herm + 2.0 * herm;
	CHECK(gamma_derivation(herm, poly).norm() <= 1e-13);

	const Op h = random_op(5, rng);
	const Op id = Op::Identity(5, 5);
	CHECK((gamma_derivation(h, id) - I * Op(h.adjoint() - h)).norm() < 1e-14);
	CHECK(gamma_derivation(herm, id).norm() < 1e-14);

	const double step = 1e-5;
	for(int k = 0; k < 20; ++k)
	{
		const Eigen::Index n = 2 + k % 5;
		const Op hk = random_op(n, rng);
		const Op xk = random_op(n, rng);
		const Op fd = (gamma_evolve(hk, xk, step) - gamma_evolve(hk, xk, -step)) / (2 * step);
		CHECK((fd - gamma_derivation(hk, xk)).norm() <= 1e-6);
	}
}

TEST_CASE("gamma_series: trivial cases and agreement with the exponential route")
{
	Rng rng{63};
	const Op h = random_op(4, rng);
	const Op x = random_op(4, rng);
	CHECK((gamma_series(h, x, 0.7, 0) - x).norm() == 0.0);
	CHECK((gamma_series(h, x, 0.0, 12) - x).norm() == 0.0);
	CHECK_THROWS_AS(gamma_series(h, x, 0.5, -1), PreconditionFailed);

	for(int k = 0; k < 30; ++k)
	{
		Op hk = random_op(4, rng);
		hk *= (0.5 + 3.5 * (k % 8) / 7.0) / norm2(hk);
		const Op xk = random_op(4, rng);
		const double t = 0.5;
		REQUIRE(norm2(hk) * t <= 2.0 + 1e-12);
		CHECK((gamma_series(hk, xk, t, 30) - gamma_evolve(hk, xk, t)).norm() <= 1e-8);
	}
}

TEST_CASE("alpha_evolve: t = 0, similarity invariance, multiplicativity")
{
	Rng rng{64};
	for(int k = 0; k < 20; ++k)
	{
		const Eigen::Index n = 2 + k % 5;
		const Op h = random_op(n, rng);
		const Op x = random_op(n, rng);
		const Op y = random_op(n, rng);
		CHECK((alpha_evolve(h, x, 0.0) - x).norm() < 1e-14);
		CHECK(spectrum_distance(alpha_evolve(h, x, 0.8), x) <= 1e-8);
		const Op lhs = alpha_evolve(h, Op(x * y), 0.8);
		const Op rhs = alpha_evolve(h, x, 0.8) * alpha_evolve(h, y, 0.8);
		CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
	}
}

TEST_CASE("bi-coherent dynamics under H = omega b a")
{
	const int n = 40;
	const double omega = 1.0;
	const cd z(1, 0.5);
	const auto t = fock::canonical_transform(n);
	const Op h = fock::pseudo_boson_hamiltonian(t, omega);
	const auto [a, b] = fock::pseudo_boson_pair(t);
	const auto [x, p] = fock::xp_pair(a, b);
	const auto ps = ScalarProduct<double>::weighted(fock::bi_coherent_metric(t));
	const auto bc = fock::bi_coherent(z, t);

	double gamma_gap = 0;
	for(const double time : {0.3, 1.0, 2.5})
	{
		const cd zt = z * std::exp(-I * omega * time);
		const auto bct = fock::bi_coherent(zt, t);
		const Op fwd = mat_exp<double>(Op(-I * time * h));
		CHECK((fwd * bc.phi - bct.phi).norm() <= 1e-6);
		const auto bct_psi = fock::bi_coherent(z * std::exp(I * omega * time), t);
		CHECK((mat_exp<double>(Op(I * time * Op(h.adjoint()))) * bc.psi - bct_psi.psi).norm() <= 1e-6);

		const cd moved = ps.inner(bct.phi, Vec(x * bct.phi));
		CHECK(std::abs(ps.inner(bc.phi, Vec(alpha_evolve(h, x, time) * bc.phi)) - moved) <= 1e-6);
		gamma_gap = std::max(gamma_gap, std::abs(ps.inner(bc.phi, Vec(gamma_evolve(h, x, time) * bc.phi)) - moved));
	}
	CHECK(gamma_gap > 1e-6);

	// With R = 1 the gamma and alpha pictures coincide.
	const auto plain = fock::RegularTransform<double>::identity(n);
	const Op h0 = fock::pseudo_boson_hamiltonian(plain, omega);
	const auto [x0, p0] = fock::position_momentum(n);
	const Vec phi0 = fock::coherent_state(z, n);
	const double time = 1.0;
	const Vec moved0 = fock::coherent_state(z * std::exp(-I * time), n);
	CHECK(std::abs(phi0.dot(gamma_evolve(h0, x0, time) * phi0) - moved0.dot(x0 * moved0)) <= 1e-10);
}

TEST_CASE("is_gamma_symmetry: S is, S^-1 is not, Hermitian reduction")
{
	Rng rng{65};
	for(int k = 0; k < 20; ++k)
	{
		const Eigen::Index n = 2 + k % 5;
		const auto planted = real_spectrum_hamiltonian(n, rng);
		const auto hm = metric_from_hamiltonian(planted.h);
		const auto& m = hm.metric;

		const auto rs = is_gamma_symmetry(planted.h, m, m.s());
		CHECK(rs.verdict);
		CHECK(rs.agree);

		const Op& s_inv = m.inverse();
		if(hermiticity_defect(planted.h) > 1e-3 && (planted.h * s_inv - s_inv * planted.h.adjoint()).norm() > 1e-3)
		{
			const auto ri = is_gamma_symmetry(planted.h, m, s_inv);
			CHECK_FALSE(ri.verdict);
			CHECK(ri.agree);
		}
	}

	const Op herm = random_hermitian(4, rng);
	const auto id = Metric<double>::identity(4);
	CHECK(is_gamma_symmetry(herm, id, Op(herm * herm - herm)).verdict);
	const auto r = is_gamma_symmetry(herm, id, random_op(4, rng));
	CHECK_FALSE(r.verdict);
	CHECK(r.agree);
}

TEST_CASE("symmetry_product: S times operators commuting with H")
{
	Rng rng{66};
	const auto planted = real_spectrum_hamiltonian(4, rng);
	const Op& h = planted.h;
	const auto hm = metric_from_hamiltonian(h);
	const auto& m = hm.metric;
	const Op id = Op::Identity(4, 4);

	CHECK((symmetry_product(h, m, m.s(), id) - m.s()).norm() <= 1e-14);
	const Op sh = symmetry_product(h, m, m.s(), h);
	CHECK((h.adjoint() * sh - sh * h).norm() <= 1e-8 * sh.norm());
	const Op poly = h * h * h - 2.0 * h + 0.5 * id;
	CHECK(is_gamma_symmetry(h, m, symmetry_product(h, m, m.s(), poly)).verdict);

	CHECK_THROWS_WITH_AS(symmetry_product(h, m, random_op(4, rng), id), "symmetry_product: X is not a gamma-symmetry",
	                     PreconditionFailed);
	CHECK_THROWS_WITH_AS(symmetry_product(h, m, m.s(), random_op(4, rng)), "symmetry_product: Y does not commute with H",
	                     PreconditionFailed);
}

TEST_CASE("v_phi: identity, projector, saturation transfer")
{
	Rng rng{67};
	for(int k = 0; k < 30; ++k)
	{
		const Eigen::Index n = 2 + k % 6;
		const Vec phi = random_state(n, rng);
		const Op u = basis_completion(phi);
		CHECK((u.adjoint() * u - Op::Identity(n, n)).norm() <= 1e-13);
		CHECK((u.col(0) - phi).norm() <= 1e-14);

		CHECK((v_phi(phi, Vec(Vec::Ones(n))) - Op::Identity(n, n)).norm() <= 1e-13);
		Vec first = Vec::Zero(n);
		first(0) = 1;
		CHECK((v_phi(phi, first) - phi * phi.adjoint()).norm() <= 1e-13);

		Vec coeffs = random_vector(n, rng);
		coeffs(0) = 1;
		const Op v = v_phi(phi, coeffs);
		CHECK((v * phi - phi).norm() <= 1e-13);
		CHECK(norm2(v) <= coeffs.cwiseAbs().maxCoeff() * (1 + 1e-12));

		// planted c3 saturation survives right multiplication by V
		const Op b = random_op(n, rng);
		const Op a = with_eigenvector(phi, random_complex(rng), rng) - random_complex(rng) * b;
		REQUIRE(saturation_test(a, b, phi, std_p).saturated);
		CHECK(saturation_test(Op(a * v), Op(b * v), phi, std_p).saturated);
	}
	Rng r2{68};
	const Vec phi = random_state(3, r2);
	CHECK_THROWS_AS(v_phi(phi, Vec(Vec::Constant(3, cd(0.5, 0)))), BadCoefficients);
}

TEST_CASE("prop3_check: fixed-point orbits keep saturation")
{
	Rng rng{69};
	const std::vector<double> times{0.0, 0.1, 1.0, 5.0};
	for(int k = 0; k < 10; ++k)
	{
		const auto planted = real_spectrum_hamiltonian(4, rng);
		const Op& h = planted.h;
		const auto hm = metric_from_hamiltonian(h);
		const auto& m = hm.metric;

		Eigen::SelfAdjointEigenSolver<Op> es(m.s());
		const Vec phi = es.eigenvectors().col(0);
		CHECK(prop3_check(h, m, m.s(), m.s(), phi, times));
		CHECK(prop3_check(h, m, m.s(), Op(m.s() * h), phi, times));
	}

	// Hermitian H: A = H, B = H^2 and phi spanning two eigenvectors
	const Op herm = random_hermitian(5, rng);
	Eigen::SelfAdjointEigenSolver<Op> es(herm);
	const Vec phi = (es.eigenvectors().col(1) + I * es.eigenvectors().col(3)).normalized();
	const auto id = Metric<double>::identity(5);
	CHECK(prop3_check(herm, id, herm, Op(herm * herm), phi, times));

	const Op not_sym = random_op(5, rng);
	CHECK_THROWS_AS(prop3_check(herm, id, not_sym, herm, phi, times), PreconditionFailed);
}

TEST_CASE("equivalence lattice agrees for Hermitian and non-Hermitian H")
{
	Rng rng{70};
	for(int k = 0; k < 20; ++k)
	{
		const bool hermitian = k % 2 == 0;
		const Op h = hermitian ? random_hermitian(4, rng) : random_op(4, rng);
		const auto lat = automorphism_lattice(h, 1000 + k);
		CHECK(lat.agree());
		CHECK(lat.hermitian == hermitian);
		CHECK(lat.seed == std::uint64_t(1000 + k));
	}
}

TEST_CASE("non-Hermitian H breaks multiplicativity of gamma^t")
{
	Rng rng{71};
	for(int k = 0; k < 10; ++k)
		CHECK(automorphism_defect(random_op(4, rng), 1.0, 7 + k) > 1e-3);
	CHECK(automorphism_defect(random_hermitian(4, rng), 1.0, 3) < 1e-10);
}

TEST_CASE("gamma-symmetries do not evolve")
{
	Rng rng{72};
	for(int k = 0; k < 20; ++k)
	{
		const auto planted = real_spectrum_hamiltonian(2 + k % 5, rng);
		const auto hm = metric_from_hamiltonian(planted.h);
		for(const Op& x : {hm.metric.s(), Op(hm.metric.s() * planted.h)})
		{
			REQUIRE(is_gamma_symmetry(planted.h, hm.metric, x).verdict);
			for(const double time : symmetry_sample_times)
				CHECK((gamma_evolve(planted.h, x, time) - x).norm() <= 1e-8 * x.norm());
		}
	}
}
