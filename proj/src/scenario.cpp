#include "nhur/scenario.hpp"

#include "nhur/expr.hpp"
#include "nhur/nhur.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace nhur::scenario
{

bool Record::passed() const
{
	return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::size_t Report::check_count() const
{
	std::size_t n = 0;
	for(const auto& r : records)
		n += r.checks.size();
	return n;
}

std::size_t Report::failure_count() const
{
	std::size_t n = 0;
	for(const auto& r : records)
		n += static_cast<std::size_t>(std::count_if(r.checks.begin(), r.checks.end(), [](const Check& c) { return !c.passed; }));
	return n;
}

namespace
{

using Json = nlohmann::ordered_json;
using Field = std::variant<std::monostate, Scalar, bool, std::string>;

std::string key_path(const std::string& base, const std::string& key)
{
	return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t k)
{
	return base + "[" + std::to_string(k) + "]";
}

std::string format_number(double v)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.12g", v);
	return buf;
}

std::string format_exact(double v)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

std::string format_scalar(Scalar z)
{
	if(z.imag() == 0)
		return format_number(z.real());
	if(z.real() == 0)
		return format_number(z.imag()) + "i";
	const std::string im = format_number(z.imag());
	return format_number(z.real()) + (im.front() == '-' ? "" : "+") + im + "i";
}

Json cjson(Scalar z)
{
	return Json::array({z.real(), z.imag()});
}

// Converts library contract violations into schema errors for `field`;
// numerical guards pass through untouched.
template <typename F>
auto guarded(const std::string& field, F&& f)
{
	try
	{
		return f();
	}
	catch(const NumericalGuard&)
	{
		throw;
	}
	catch(const SchemaError&)
	{
		throw;
	}
	catch(const Error& e)
	{
		throw SchemaError(field, e.what());
	}
}

void require_map(const YAML::Node& n, const std::string& field)
{
	if(!n.IsMap())
		throw SchemaError(field, "expected a mapping");
}

void allow_keys(const YAML::Node& n, const std::string& field, std::initializer_list<std::string_view> keys)
{
	for(const auto& kv : n)
	{
		const std::string k = kv.first.as<std::string>();
		if(std::find(keys.begin(), keys.end(), k) == keys.end())
		{
			std::string list;
			for(const auto key : keys)
				list += (list.empty() ? "" : ", ") + std::string(key);
			throw SchemaError(key_path(field, k), "unknown key (allowed: " + list + ")");
		}
	}
}

template <typename T>
T as(const YAML::Node& n, const std::string& field, const char* what)
{
	if(!n.IsScalar())
		throw SchemaError(field, std::string("expected ") + what);
	try
	{
		return n.as<T>();
	}
	catch(const YAML::Exception&)
	{
		throw SchemaError(field, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
	}
}

std::string text_of(const YAML::Node& n, const std::string& field)
{
	return as<std::string>(n, field, "an expression");
}

YAML::Node required(const YAML::Node& n, const char* key, const std::string& base)
{
	const YAML::Node v = n[key];
	if(!v)
		throw SchemaError(key_path(base, key), "missing");
	return v;
}

class Runner
{
public:
	Runner(const YAML::Node& root, const Overrides& ov) : root_(root), ov_(ov) {}

	Report run()
	{
		require_map(root_, "<document>");
		allow_keys(root_, "",
		           {"name", "description", "seed", "space", "matrices", "operators", "product", "state", "tolerances",
		            "analyses"});
		report_.name = text_of(required(root_, "name", ""), "name");
		if(const auto d = root_["description"])
			report_.description = as<std::string>(d, "description", "a string");
		report_.seed = root_["seed"] ? as<std::uint64_t>(root_["seed"], "seed", "an unsigned integer") : 0;
		if(ov_.seed)
			report_.seed = *ov_.seed;
		rng_.seed(report_.seed);
		env_.rng = &rng_;

		load_tolerances();
		load_space();
		load_matrices();
		load_product();
		load_operators();
		load_state();
		run_analyses();
		return std::move(report_);
	}

private:
	struct Point
	{
		VectorXcd phi;
		Json state = Json::object();
		std::vector<std::pair<std::string, Scalar>> vars;
	};

	void load_tolerances()
	{
		auto& t = report_.tolerances;
		if(const auto n = root_["tolerances"])
		{
			require_map(n, "tolerances");
			allow_keys(n, "tolerances", {"expect", "normalization", "saturation", "symmetry", "lemma"});
			const std::pair<const char*, double*> slots[] = {{"expect", &t.expect},
			                                                 {"normalization", &t.normalization},
			                                                 {"saturation", &t.saturation},
			                                                 {"symmetry", &t.symmetry},
			                                                 {"lemma", &t.lemma}};
			for(const auto& [key, slot] : slots)
				if(const auto v = n[key])
				{
					*slot = as<double>(v, key_path("tolerances", key), "a number");
					if(!(*slot > 0))
						throw SchemaError(key_path("tolerances", key), "must be positive");
				}
		}
		if(ov_.tol)
		{
			if(!(*ov_.tol > 0))
				throw SchemaError("--tol", "must be positive");
			t.expect = *ov_.tol;
		}
	}

	void load_space()
	{
		const YAML::Node n = required(root_, "space", "");
		require_map(n, "space");
		allow_keys(n, "space", {"fock", "transform", "omega", "dim"});
		if(n["fock"] && n["dim"])
			throw SchemaError("space", "give either fock or dim, not both");
		if(n["dim"])
		{
			const int dim = as<int>(n["dim"], "space.dim", "an integer");
			if(dim < 1)
				throw SchemaError("space.dim", "must be at least 1");
			if(n["transform"] || n["omega"])
				throw SchemaError("space", "transform and omega need a fock space");
			report_.dim = dim;
			env_.dim = dim;
			env_.set("id", OperatorXcd(OperatorXcd::Identity(dim, dim)));
			return;
		}
		if(!n["fock"])
			throw SchemaError("space", "needs fock or dim");
		int trunc = as<int>(n["fock"], "space.fock", "an integer");
		if(ov_.truncation)
			trunc = *ov_.truncation;
		if(trunc < 2)
			throw SchemaError(ov_.truncation ? "--truncation" : "space.fock", "truncation must be at least 2");
		report_.truncation = trunc;
		report_.dim = trunc;
		env_.dim = trunc;

		double theta = 0;
		if(const auto t = n["transform"])
		{
			if(t.IsMap())
			{
				allow_keys(t, "space.transform", {"theta"});
				theta = as<double>(required(t, "theta", "space.transform"), "space.transform.theta", "a number");
			}
			else
			{
				const std::string kind = as<std::string>(t, "space.transform", "canonical, identity or {theta: x}");
				if(kind == "canonical")
					theta = fock::canonical_theta;
				else if(kind != "identity")
					throw SchemaError("space.transform", "unknown transform '" + kind + "'");
			}
		}
		const double omega = n["omega"] ? as<double>(n["omega"], "space.omega", "a number") : 1.0;
		transform_ = guarded("space.transform", [&] {
			return theta == 0 ? fock::RegularTransform<double>::identity(trunc) : fock::canonical_transform(trunc, theta);
		});

		const auto [c, c_dag] = fock::ladder(trunc);
		const auto [x0, p0] = fock::position_momentum(trunc);
		const auto [a, b] = fock::pseudo_boson_pair(*transform_);
		const auto [x, p] = fock::xp_pair(a, b);
		env_.set("id", OperatorXcd(OperatorXcd::Identity(trunc, trunc)));
		env_.set("c", c);
		env_.set("cdag", c_dag);
		env_.set("num", fock::number_operator(trunc));
		env_.set("x0", x0);
		env_.set("p0", p0);
		env_.set("R", transform_->r());
		env_.set("Rinv", transform_->r_inv());
		env_.set("a", a);
		env_.set("b", b);
		env_.set("X", x);
		env_.set("P", p);
		env_.set("H", fock::pseudo_boson_hamiltonian(*transform_, omega));
	}

	void load_matrices()
	{
		const YAML::Node n = root_["matrices"];
		if(!n)
			return;
		require_map(n, "matrices");
		const auto dim = env_.dim;
		for(const auto& kv : n)
		{
			const std::string name = kv.first.as<std::string>();
			const std::string field = key_path("matrices", name);
			const YAML::Node rows = kv.second;
			if(!rows.IsSequence() || static_cast<Eigen::Index>(rows.size()) != dim)
				throw SchemaError(field, "expected " + std::to_string(dim) + " rows");
			OperatorXcd m(dim, dim);
			for(std::size_t i = 0; i < rows.size(); ++i)
			{
				const std::string row_field = index_path(field, i);
				if(!rows[i].IsSequence() || static_cast<Eigen::Index>(rows[i].size()) != dim)
					throw SchemaError(row_field, "expected " + std::to_string(dim) + " entries");
				for(std::size_t j = 0; j < rows[i].size(); ++j)
				{
					const std::string entry = index_path(row_field, j);
					m(Eigen::Index(i), Eigen::Index(j)) =
						guarded(entry, [&] { return evaluate_scalar(text_of(rows[i][j], entry), env_); });
				}
			}
			env_.set(name, m);
		}
	}

	void load_product()
	{
		const YAML::Node n = root_["product"];
		if(!n || (n.IsScalar() && n.Scalar() == "standard"))
		{
			product_ = ScalarProduct<double>::standard();
			report_.product = "standard";
		}
		else if(n.IsScalar())
		{
			const std::string kind = n.Scalar();
			if(kind != "bi_coherent" && kind != "dual")
				throw SchemaError("product", "unknown product '" + kind + "'");
			if(!transform_)
				throw SchemaError("product", kind + " needs a fock space");
			product_ = ScalarProduct<double>::weighted(guarded("product", [&] {
				return kind == "dual" ? fock::dual_bi_coherent_metric(*transform_) : fock::bi_coherent_metric(*transform_);
			}));
			report_.product = kind;
		}
		else
		{
			require_map(n, "product");
			allow_keys(n, "product", {"metric_from", "metric_explicit"});
			if(n.size() != 1)
				throw SchemaError("product", "give exactly one of metric_from, metric_explicit");
			if(const auto h = n["metric_from"])
			{
				const std::string expr = text_of(h, "product.metric_from");
				product_ = ScalarProduct<double>::weighted(guarded("product.metric_from", [&] {
					return metric_from_hamiltonian(evaluate_operator(expr, env_)).metric;
				}));
				report_.product = "metric_from(" + expr + ")";
			}
			else
			{
				const std::string expr = text_of(n["metric_explicit"], "product.metric_explicit");
				product_ = ScalarProduct<double>::weighted(guarded("product.metric_explicit", [&] {
					return Metric<double>::from_operator(evaluate_operator(expr, env_));
				}));
				report_.product = "metric_explicit(" + expr + ")";
			}
		}
		env_.product = &*product_;
		if(const auto& m = product_->metric())
		{
			env_.set("S", m->s());
			env_.set("Sinv", m->inverse());
		}
	}

	void load_operators()
	{
		const YAML::Node n = root_["operators"];
		if(!n)
			return;
		require_map(n, "operators");
		for(const auto& kv : n)
		{
			const std::string name = kv.first.as<std::string>();
			const std::string field = key_path("operators", name);
			const std::string expr = text_of(kv.second, field);
			env_.set(name, guarded(field, [&] {
				Value v = evaluate(expr, env_);
				if(!is_scalar(v) && std::get<OperatorXcd>(v).rows() != env_.dim)
					throw ExprError("dimension " + std::to_string(std::get<OperatorXcd>(v).rows()) + " differs from space");
				return v;
			}));
		}
	}

	Point coherent_point(Scalar z, bool bi, bool dual_side, const std::string& field)
	{
		if(!transform_)
			throw SchemaError(field, "coherent states need a fock space");
		Point pt;
		const int trunc = *report_.truncation;
		if(bi)
		{
			const auto pair = fock::bi_coherent(z, *transform_);
			pt.phi = dual_side ? pair.psi : pair.phi;
		}
		else
			pt.phi = fock::coherent_state(z, trunc);
		pt.state["kind"] = bi ? (dual_side ? "bi_coherent_psi" : "bi_coherent_phi") : "coherent";
		pt.state["z"] = cjson(z);
		pt.state["tail_mass"] = fock::coherent_tail_mass(z, trunc);
		pt.vars = {{"z", z}, {"x", Scalar(z.real())}, {"y", Scalar(z.imag())}};
		return pt;
	}

	void load_state()
	{
		const YAML::Node n = required(root_, "state", "");
		require_map(n, "state");
		allow_keys(n, "state", {"coherent", "coherent_grid", "bi_coherent", "side", "vector", "normalize", "random",
		                        "eigenvector"});
		if(const auto c = n["coherent"])
		{
			const Scalar z = guarded("state.coherent", [&] { return evaluate_scalar(text_of(c, "state.coherent"), env_); });
			points_.push_back(coherent_point(z, false, false, "state.coherent"));
		}
		else if(const auto g = n["coherent_grid"])
		{
			require_map(g, "state.coherent_grid");
			allow_keys(g, "state.coherent_grid", {"re", "im"});
			const auto axis = [&](const char* key) {
				const std::string field = key_path("state.coherent_grid", key);
				const YAML::Node s = required(g, key, "state.coherent_grid");
				if(!s.IsSequence() || s.size() == 0)
					throw SchemaError(field, "expected a non-empty list");
				std::vector<double> out;
				for(std::size_t k = 0; k < s.size(); ++k)
					out.push_back(guarded(index_path(field, k), [&] {
						return evaluate_scalar(text_of(s[k], index_path(field, k)), env_).real();
					}));
				return out;
			};
			for(const double x : axis("re"))
				for(const double y : axis("im"))
					points_.push_back(coherent_point(Scalar(x, y), false, false, "state.coherent_grid"));
		}
		else if(const auto b = n["bi_coherent"])
		{
			const Scalar z =
				guarded("state.bi_coherent", [&] { return evaluate_scalar(text_of(b, "state.bi_coherent"), env_); });
			bool psi = false;
			if(const auto side = n["side"])
			{
				const std::string s = as<std::string>(side, "state.side", "phi or psi");
				if(s != "phi" && s != "psi")
					throw SchemaError("state.side", "expected phi or psi");
				psi = s == "psi";
			}
			points_.push_back(coherent_point(z, true, psi, "state.bi_coherent"));
		}
		else if(const auto v = n["vector"])
		{
			if(!v.IsSequence() || static_cast<Eigen::Index>(v.size()) != env_.dim)
				throw SchemaError("state.vector", "expected " + std::to_string(env_.dim) + " entries");
			Point pt;
			pt.phi.resize(env_.dim);
			for(std::size_t k = 0; k < v.size(); ++k)
			{
				const std::string field = index_path("state.vector", k);
				pt.phi(Eigen::Index(k)) = guarded(field, [&] { return evaluate_scalar(text_of(v[k], field), env_); });
			}
			if(n["normalize"] && as<bool>(n["normalize"], "state.normalize", "a boolean"))
				normalize(pt.phi, "state.vector");
			pt.state["kind"] = "vector";
			points_.push_back(std::move(pt));
		}
		else if(const auto r = n["random"])
		{
			if(!as<bool>(r, "state.random", "a boolean"))
				throw SchemaError("state.random", "must be true");
			Point pt;
			std::normal_distribution<double> nd(0, 1);
			pt.phi.resize(env_.dim);
			for(Eigen::Index k = 0; k < env_.dim; ++k)
				pt.phi(k) = Scalar(nd(rng_), nd(rng_));
			normalize(pt.phi, "state.random");
			pt.state["kind"] = "random";
			points_.push_back(std::move(pt));
		}
		else if(const auto e = n["eigenvector"])
		{
			require_map(e, "state.eigenvector");
			allow_keys(e, "state.eigenvector", {"of", "index"});
			const std::string expr = text_of(required(e, "of", "state.eigenvector"), "state.eigenvector.of");
			const int index = e["index"] ? as<int>(e["index"], "state.eigenvector.index", "an integer") : 0;
			const auto sys = guarded("state.eigenvector.of", [&] { return spectral(evaluate_operator(expr, env_)); });
			if(index < 0 || index >= sys.size())
				throw SchemaError("state.eigenvector.index", "out of range");
			std::vector<Eigen::Index> order(static_cast<std::size_t>(sys.size()));
			std::iota(order.begin(), order.end(), Eigen::Index(0));
			std::stable_sort(order.begin(), order.end(), [&](Eigen::Index p, Eigen::Index q) {
				const Scalar u = sys.eigenvalues(p), w = sys.eigenvalues(q);
				return u.real() != w.real() ? u.real() < w.real() : u.imag() < w.imag();
			});
			const Eigen::Index k = order[static_cast<std::size_t>(index)];
			Point pt;
			pt.phi = sys.right.col(k);
			normalize(pt.phi, "state.eigenvector");
			pt.state["kind"] = "eigenvector";
			pt.state["of"] = expr;
			pt.state["eigenvalue"] = cjson(sys.eigenvalues(k));
			points_.push_back(std::move(pt));
		}
		else
			throw SchemaError("state", "needs one of coherent, coherent_grid, bi_coherent, vector, random, eigenvector");

		for(const auto& pt : points_)
			guarded("state", [&] { require_normalized(pt.phi, *product_, report_.tolerances.normalization); });
	}

	void normalize(VectorXcd& v, const std::string& field) const
	{
		const double nv = product_->norm(v);
		if(!(nv > 0))
			throw SchemaError(field, "zero vector");
		v /= nv;
	}

	Environment point_env(const Point& pt) const
	{
		Environment e = env_;
		for(const auto& [k, v] : pt.vars)
			e.set(k, v);
		return e;
	}

	OperatorXcd op(const YAML::Node& a, const char* key, const std::string& base, const Environment& e)
	{
		const std::string field = key_path(base, key);
		const std::string expr = text_of(required(a, key, base), field);
		return guarded(field, [&] { return evaluate_operator(expr, e); });
	}

	OperatorXcd op_or(const YAML::Node& a, const char* key, const char* fallback, const std::string& base,
	                  const Environment& e)
	{
		return a[key] ? op(a, key, base, e) : op(a, fallback, base, e);
	}

	const Metric<double>& gamma_metric(const OperatorXcd& h, const std::string& field)
	{
		if(const auto& m = product_->metric())
			return *m;
		hamiltonian_metric_ = guarded(field, [&] { return metric_from_hamiltonian(h).metric; });
		return *hamiltonian_metric_;
	}

	Json analyse(const std::string& kind, const YAML::Node& a, const std::string& base, const Point& pt,
	             const Environment& e, std::size_t point_index, const std::string& id)
	{
		const auto& tol = report_.tolerances;
		const auto& p = *product_;
		Json out;
		if(kind == "ur_report")
		{
			allow_keys(a, base, {"kind", "id", "A", "B", "expect"});
			const auto r = guarded(base, [&] { return ur_report(op(a, "A", base, e), op(a, "B", base, e), pt.phi, p); });
			out["mean_a"] = cjson(r.mean_a);
			out["mean_b"] = cjson(r.mean_b);
			out["delta_a"] = r.delta_a;
			out["delta_b"] = r.delta_b;
			out["delta_product"] = r.delta_product();
			out["cross"] = cjson(r.cross);
			out["bound23"] = r.bound23;
			out["c"] = r.c;
			out["d"] = r.d;
			out["bound210"] = r.bound210;
			out["commutator_term"] = cjson(r.commutator_term);
			out["anticommutator_term"] = cjson(r.anticommutator_term);
			out["projector_cross"] = cjson(r.projector_cross);
			out["lemma1"] = lemma1_check(r, tol.lemma);
		}
		else if(kind == "saturation")
		{
			allow_keys(a, base, {"kind", "id", "A", "B", "expect"});
			const auto s = guarded(base, [&] {
				return saturation_test(op(a, "A", base, e), op(a, "B", base, e), pt.phi, p, tol.saturation);
			});
			out["saturated"] = s.saturated;
			out["saturated210"] = s.saturated210;
			out["condition"] = to_string(s.condition);
			out["gamma"] = s.gamma ? cjson(*s.gamma) : Json(nullptr);
			out["residual"] = s.residual;
			out["consistent"] = s.consistent;
			out["delta_product"] = s.delta_product;
			out["bound23"] = s.bound23;
			out["bound210"] = s.bound210;
		}
		else if(kind == "triple")
		{
			allow_keys(a, base, {"kind", "id", "A", "B", "C", "expect"});
			const auto t = guarded(base, [&] {
				return triple_report(op(a, "A", base, e), op(a, "B", base, e), op(a, "C", base, e), pt.phi, p);
			});
			const double scale = std::max(1.0, t.ineq221_lhs);
			out["delta_a"] = t.deltas[0];
			out["delta_b"] = t.deltas[1];
			out["delta_c"] = t.deltas[2];
			out["minor1"] = t.minors[0];
			out["minor2"] = t.minors[1];
			out["minor3"] = t.minors[2];
			out["ineq220_lhs"] = t.ineq220_lhs;
			out["ineq220_rhs"] = t.ineq220_rhs;
			out["ineq221_lhs"] = t.ineq221_lhs;
			out["ineq221_rhs"] = t.ineq221_rhs;
			out["ineq220"] = t.ineq220_lhs >= t.ineq220_rhs - tol.lemma * scale;
			out["ineq221"] = t.ineq221_lhs >= t.ineq221_rhs - tol.lemma * scale;
		}
		else if(kind == "mean")
		{
			allow_keys(a, base, {"kind", "id", "of", "expect"});
			const Scalar m = guarded(base, [&] { return mean(op(a, "of", base, e), pt.phi, p); });
			out["value"] = cjson(m);
			out["variance"] = guarded(base, [&] { return variance(op(a, "of", base, e), pt.phi, p); });
		}
		else if(kind == "symmetry_check")
		{
			allow_keys(a, base, {"kind", "id", "H", "X", "expect"});
			const OperatorXcd h = a["H"] ? op(a, "H", base, e) : guarded(key_path(base, "H"), [&] {
				return evaluate_operator("H", e);
			});
			const OperatorXcd x = op(a, "X", base, e);
			const auto& m = gamma_metric(h, key_path(base, "H"));
			const auto r = guarded(base, [&] { return is_gamma_symmetry(h, m, x, tol.symmetry); });
			out["commutator"] = r.commutator;
			out["adjoint_commutator"] = r.adjoint_commutator;
			out["intertwining"] = r.intertwining;
			out["derivation"] = r.derivation;
			out["orbit"] = r.orbit;
			out["threshold"] = r.threshold;
			out["verdict"] = r.verdict;
			out["agree"] = r.agree;
		}
		else if(kind == "gamma_orbit")
			out = gamma_orbit(a, base, pt, e, point_index, id);
		else
			throw SchemaError(key_path(base, "kind"),
			                  "unknown analysis '" + kind + "' (ur_report, saturation, triple, mean, gamma_orbit, "
			                  "symmetry_check)");
		return out;
	}

	Json gamma_orbit(const YAML::Node& a, const std::string& base, const Point& pt, const Environment& e,
	                 std::size_t point_index, const std::string& id)
	{
		allow_keys(a, base, {"kind", "id", "H", "X", "A", "B", "times", "expect"});
		const auto& tol = report_.tolerances;
		const OperatorXcd h = a["H"] ? op(a, "H", base, e) : guarded(key_path(base, "H"), [&] {
			return evaluate_operator("H", e);
		});
		const OperatorXcd x = op(a, "X", base, e);
		const OperatorXcd oa = op_or(a, "A", "X", base, e);
		const OperatorXcd ob = op_or(a, "B", "X", base, e);

		const std::string tfield = key_path(base, "times");
		const YAML::Node tn = required(a, "times", base);
		require_map(tn, tfield);
		allow_keys(tn, tfield, {"from", "to", "count"});
		const double from = tn["from"] ? as<double>(tn["from"], key_path(tfield, "from"), "a number") : 0.0;
		const double to = as<double>(required(tn, "to", tfield), key_path(tfield, "to"), "a number");
		const int count = as<int>(required(tn, "count", tfield), key_path(tfield, "count"), "an integer");
		if(count < 1)
			throw SchemaError(key_path(tfield, "count"), "must be at least 1");

		std::ostringstream csv;
		csv << "t,orbit_defect,delta_product,bound23,bound210,saturated\n";
		double max_defect = 0;
		int saturated = 0;
		for(int k = 0; k < count; ++k)
		{
			const double t = count == 1 ? from : from + (to - from) * k / (count - 1);
			const auto flow = GammaFlow<double>::make(h, t);
			const double defect = (flow(x) - x).norm();
			const auto s = guarded(base, [&] { return saturation_test(flow(oa), flow(ob), pt.phi, *product_, tol.saturation); });
			for(const double v : {defect, s.delta_product, s.bound23, s.bound210})
				if(!std::isfinite(v))
					throw Overflow(base + ": non-finite value at t = " + format_number(t));
			max_defect = std::max(max_defect, defect);
			saturated += s.saturated ? 1 : 0;
			csv << format_exact(t) << ',' << format_exact(defect) << ',' << format_exact(s.delta_product) << ','
			    << format_exact(s.bound23) << ',' << format_exact(s.bound210) << ',' << (s.saturated ? 1 : 0) << '\n';
		}
		std::string file = report_.name + "." + id;
		if(points_.size() > 1)
			file += "." + std::to_string(point_index);
		report_.series.push_back({file + ".csv", csv.str()});

		Json out;
		out["samples"] = count;
		out["max_orbit_defect"] = max_defect;
		out["saturated_count"] = saturated;
		out["all_saturated"] = saturated == count;
		out["csv"] = file + ".csv";
		return out;
	}

	static Field field_value(const Json& v)
	{
		if(v.is_boolean())
			return v.get<bool>();
		if(v.is_number())
			return Scalar(v.get<double>());
		if(v.is_string())
			return v.get<std::string>();
		if(v.is_array() && v.size() == 2)
			return Scalar(v[0].get<double>(), v[1].get<double>());
		return std::monostate{};
	}

	static std::string show(const Field& f)
	{
		if(std::holds_alternative<Scalar>(f))
			return format_scalar(std::get<Scalar>(f));
		if(std::holds_alternative<bool>(f))
			return std::get<bool>(f) ? "true" : "false";
		if(std::holds_alternative<std::string>(f))
			return std::get<std::string>(f);
		return "absent";
	}

	std::vector<Check> checks(const YAML::Node& a, const std::string& base, const Json& result, Environment e)
	{
		std::vector<Check> out;
		const YAML::Node list = a["expect"];
		if(!list)
			return out;
		const std::string lfield = key_path(base, "expect");
		if(!list.IsSequence())
			throw SchemaError(lfield, "expected a list");

		for(const auto& [k, v] : result.items())
		{
			const Field f = field_value(v);
			if(std::holds_alternative<Scalar>(f))
				e.set(k, std::get<Scalar>(f));
			else if(std::holds_alternative<bool>(f))
				e.set(k, Scalar(std::get<bool>(f) ? 1.0 : 0.0));
		}

		for(std::size_t j = 0; j < list.size(); ++j)
		{
			const YAML::Node item = list[j];
			const std::string ifield = index_path(lfield, j);
			require_map(item, ifield);
			allow_keys(item, ifield, {"field", "tol", "value", "abs", "min", "max", "equals", "holds"});
			const auto number = [&](const char* key) {
				const std::string f = key_path(ifield, key);
				const Scalar s = guarded(f, [&] { return evaluate_scalar(text_of(item[key], f), e); });
				if(!std::isfinite(s.real()) || !std::isfinite(s.imag()))
					throw SchemaError(f, "expression is not finite");
				return s;
			};
			const double tol = item["tol"] ? number("tol").real() : report_.tolerances.expect;

			bool any = false;
			if(item["holds"])
			{
				any = true;
				const std::string expr = text_of(item["holds"], key_path(ifield, "holds"));
				const bool ok = number("holds") != Scalar(0);
				out.push_back({expr, "holds", ok, ok ? "true" : "false"});
			}
			if(!item["field"])
			{
				if(!any)
					throw SchemaError(key_path(ifield, "field"), "missing");
				continue;
			}
			const std::string name = as<std::string>(item["field"], key_path(ifield, "field"), "a result field name");
			if(!result.contains(name))
			{
				std::string known;
				for(const auto& [k, v] : result.items())
					known += (known.empty() ? "" : ", ") + k;
				throw SchemaError(key_path(ifield, "field"), "unknown result field '" + name + "' (have: " + known + ")");
			}
			const Field f = field_value(result[name]);
			const bool numeric = std::holds_alternative<Scalar>(f);
			const Scalar got = numeric ? std::get<Scalar>(f) : Scalar(0);
			const std::string tol_note = " (tol " + format_number(tol) + ")";

			const auto numeric_rule = [&](const char* rule, auto&& test, const std::string& want) {
				any = true;
				if(!numeric)
				{
					out.push_back({name, rule, false, "field is " + show(f) + ", not a number"});
					return;
				}
				const bool ok = test();
				out.push_back({name, rule, ok, "got " + show(f) + ", want " + want + tol_note});
			};
			if(item["value"])
			{
				const Scalar want = number("value");
				numeric_rule("value", [&] { return std::abs(got - want) <= tol; }, format_scalar(want));
			}
			if(item["abs"])
			{
				const double want = number("abs").real();
				numeric_rule("abs", [&] { return std::abs(std::abs(got) - want) <= tol; }, "|.| = " + format_number(want));
			}
			if(item["min"])
			{
				const double lo = number("min").real();
				numeric_rule("min", [&] { return got.real() >= lo - tol; }, ">= " + format_number(lo));
			}
			if(item["max"])
			{
				const double hi = number("max").real();
				numeric_rule("max", [&] { return got.real() <= hi + tol; }, "<= " + format_number(hi));
			}
			if(const auto eq = item["equals"])
			{
				any = true;
				const std::string efield = key_path(ifield, "equals");
				if(std::holds_alternative<std::string>(f))
				{
					const std::string want = as<std::string>(eq, efield, "a string");
					out.push_back({name, "equals", std::get<std::string>(f) == want, "got " + show(f) + ", want " + want});
				}
				else if(std::holds_alternative<bool>(f))
				{
					bool want = false;
					const std::string s = text_of(eq, efield);
					if(s == "true" || s == "false")
						want = s == "true";
					else
						want = number("equals") != Scalar(0);
					out.push_back({name, "equals", std::get<bool>(f) == want,
					               "got " + show(f) + ", want " + (want ? "true" : "false")});
				}
				else
				{
					const Scalar want = number("equals");
					numeric_rule("equals", [&] { return std::abs(got - want) <= tol; }, format_scalar(want));
				}
			}
			if(!any)
				throw SchemaError(ifield, "needs a rule: value, abs, min, max, equals or holds");
		}
		return out;
	}

	void run_analyses()
	{
		const YAML::Node list = required(root_, "analyses", "");
		if(!list.IsSequence() || list.size() == 0)
			throw SchemaError("analyses", "expected a non-empty list");
		std::set<std::string> ids;
		for(std::size_t i = 0; i < list.size(); ++i)
		{
			const YAML::Node a = list[i];
			const std::string base = index_path("analyses", i);
			require_map(a, base);
			const std::string kind = as<std::string>(required(a, "kind", base), key_path(base, "kind"), "an analysis kind");
			const std::string id =
				a["id"] ? as<std::string>(a["id"], key_path(base, "id"), "a name") : kind + "_" + std::to_string(i);
			if(!ids.insert(id).second)
				throw SchemaError(key_path(base, "id"), "duplicate id '" + id + "'");

			for(std::size_t k = 0; k < points_.size(); ++k)
			{
				const Environment e = point_env(points_[k]);
				Record rec;
				rec.id = id;
				rec.kind = kind;
				rec.point = k;
				rec.state = points_[k].state;
				rec.result = analyse(kind, a, base, points_[k], e, k, id);
				rec.checks = checks(a, base, rec.result, e);
				report_.records.push_back(std::move(rec));
			}
		}
	}

	const YAML::Node& root_;
	const Overrides& ov_;
	Report report_;
	Environment env_;
	std::mt19937_64 rng_;
	std::optional<fock::RegularTransform<double>> transform_;
	std::optional<ScalarProduct<double>> product_;
	std::optional<Metric<double>> hamiltonian_metric_;
	std::vector<Point> points_;
};

void require_finite(const Json& j, const std::string& where)
{
	if(j.is_number_float() && !std::isfinite(j.get<double>()))
		throw Overflow("report field " + where + " is not finite");
	if(j.is_structured())
		for(const auto& [k, v] : j.items())
			require_finite(v, where + "." + k);
}

} // namespace

Report run_text(const std::string& yaml, const Overrides& overrides)
{
	YAML::Node root;
	try
	{
		root = YAML::Load(yaml);
	}
	catch(const YAML::Exception& e)
	{
		throw SchemaError("<document>", std::string("YAML: ") + e.what());
	}
	Report r = Runner(root, overrides).run();
	for(const auto& rec : r.records)
	{
		require_finite(rec.result, rec.id + ".result");
		require_finite(rec.state, rec.id + ".state");
	}
	return r;
}

Report run_file(const std::filesystem::path& file, const Overrides& overrides)
{
	std::ifstream in(file, std::ios::binary);
	if(!in)
		throw SchemaError("<file>", "cannot read " + file.string());
	std::ostringstream ss;
	ss << in.rdbuf();
	return run_text(ss.str(), overrides);
}

} // namespace nhur::scenario
