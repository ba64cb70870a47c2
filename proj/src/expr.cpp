#include "nhur/expr.hpp"

#include "nhur/gamma.hpp"
#include "nhur/linalg.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <numbers>

namespace nhur::scenario
{

const Value* Environment::find(std::string_view name) const
{
	const auto it = vars.find(name);
	return it == vars.end() ? nullptr : &it->second;
}

bool is_scalar(const Value& v)
{
	return std::holds_alternative<Scalar>(v);
}

std::string describe(const Value& v)
{
	if(is_scalar(v))
		return "scalar";
	const auto& x = std::get<OperatorXcd>(v);
	return std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + " operator";
}

namespace
{

OperatorXcd identity_like(const OperatorXcd& x, Scalar s)
{
	return s * OperatorXcd::Identity(x.rows(), x.cols());
}

class Parser
{
public:
	Parser(std::string_view text, const Environment& env) : text_(text), env_(env) {}

	Value run()
	{
		Value v = comparison();
		skip_space();
		if(pos_ != text_.size())
			fail("unexpected '" + std::string(1, text_[pos_]) + "'");
		return v;
	}

private:
	[[noreturn]] void fail(const std::string& what) const
	{
		throw ExprError("in \"" + std::string(text_) + "\" at column " + std::to_string(pos_ + 1) + ": " + what);
	}

	void skip_space()
	{
		while(pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
			++pos_;
	}

	bool accept(std::string_view tok)
	{
		skip_space();
		if(text_.substr(pos_, tok.size()) == tok)
		{
			pos_ += tok.size();
			return true;
		}
		return false;
	}

	void expect(char c)
	{
		if(!accept(std::string_view(&c, 1)))
			fail(std::string("expected '") + c + "'");
	}

	Value comparison()
	{
		Value lhs = sum();
		static constexpr std::array<std::string_view, 6> ops{"==", "!=", "<=", ">=", "<", ">"};
		for(const auto op : ops)
		{
			if(!accept(op))
				continue;
			const Value rhs = sum();
			if(!is_scalar(lhs) || !is_scalar(rhs))
				fail("comparison '" + std::string(op) + "' needs scalars");
			const Scalar a = std::get<Scalar>(lhs), b = std::get<Scalar>(rhs);
			bool r = false;
			if(op == "==")
				r = a == b;
			else if(op == "!=")
				r = a != b;
			else if(op == "<=")
				r = a.real() <= b.real();
			else if(op == ">=")
				r = a.real() >= b.real();
			else if(op == "<")
				r = a.real() < b.real();
			else
				r = a.real() > b.real();
			return Scalar(r ? 1.0 : 0.0);
		}
		return lhs;
	}

	Value sum()
	{
		Value acc = product();
		for(;;)
		{
			skip_space();
			// "==" and friends are handled one level up
			if(accept("+"))
				acc = add(acc, product(), 1.0);
			else if(accept("-"))
				acc = add(acc, product(), -1.0);
			else
				return acc;
		}
	}

	Value add(const Value& a, const Value& b, double sign)
	{
		if(is_scalar(a) && is_scalar(b))
			return std::get<Scalar>(a) + sign * std::get<Scalar>(b);
		if(is_scalar(a))
		{
			const auto& y = std::get<OperatorXcd>(b);
			return OperatorXcd(identity_like(y, std::get<Scalar>(a)) + sign * y);
		}
		const auto& x = std::get<OperatorXcd>(a);
		if(is_scalar(b))
			return OperatorXcd(x + sign * identity_like(x, std::get<Scalar>(b)));
		const auto& y = std::get<OperatorXcd>(b);
		if(x.rows() != y.rows() || x.cols() != y.cols())
			fail("cannot add " + describe(a) + " and " + describe(b));
		return OperatorXcd(x + sign * y);
	}

	Value product()
	{
		Value acc = unary();
		for(;;)
		{
			if(accept("*"))
				acc = multiply(acc, unary());
			else if(accept("/"))
			{
				const Value d = unary();
				if(!is_scalar(d))
					fail("division by an operator");
				const Scalar s = std::get<Scalar>(d);
				if(s == Scalar(0))
					fail("division by zero");
				acc = multiply(acc, Scalar(1.0) / s);
			}
			else
				return acc;
		}
	}

	Value multiply(const Value& a, const Value& b)
	{
		if(is_scalar(a) && is_scalar(b))
			return std::get<Scalar>(a) * std::get<Scalar>(b);
		if(is_scalar(a))
			return OperatorXcd(std::get<Scalar>(a) * std::get<OperatorXcd>(b));
		if(is_scalar(b))
			return OperatorXcd(std::get<OperatorXcd>(a) * std::get<Scalar>(b));
		const auto& x = std::get<OperatorXcd>(a);
		const auto& y = std::get<OperatorXcd>(b);
		if(x.cols() != y.rows())
			fail("cannot multiply " + describe(a) + " by " + describe(b));
		return OperatorXcd(x * y);
	}

	Value unary()
	{
		if(accept("-"))
			return multiply(Scalar(-1.0), unary());
		if(accept("+"))
			return unary();
		return power();
	}

	Value power()
	{
		Value base = atom();
		if(!accept("^"))
			return base;
		const Value e = unary();
		if(!is_scalar(e))
			fail("exponent must be a scalar");
		const Scalar k = std::get<Scalar>(e);
		if(is_scalar(base))
			return std::pow(std::get<Scalar>(base), k);
		const double kr = k.real();
		if(k.imag() != 0 || kr < 0 || kr != std::floor(kr) || kr > 1e6)
			fail("operator power needs a non-negative integer exponent");
		const auto& x = std::get<OperatorXcd>(base);
		OperatorXcd acc = OperatorXcd::Identity(x.rows(), x.cols());
		OperatorXcd sq = x;
		for(auto n = static_cast<long long>(kr); n > 0; n >>= 1)
		{
			if(n & 1)
				acc = acc * sq;
			if(n > 1)
				sq = sq * sq;
		}
		return acc;
	}

	Value atom()
	{
		skip_space();
		if(pos_ >= text_.size())
			fail("unexpected end of expression");
		const char c = text_[pos_];
		if(c == '(')
		{
			++pos_;
			Value v = comparison();
			expect(')');
			return v;
		}
		if(std::isdigit(static_cast<unsigned char>(c)) || c == '.')
			return number();
		if(std::isalpha(static_cast<unsigned char>(c)) || c == '_')
		{
			const std::string name = identifier();
			if(accept("("))
			{
				std::vector<Value> args;
				if(!accept(")"))
				{
					do
						args.push_back(comparison());
					while(accept(","));
					expect(')');
				}
				return call(name, args);
			}
			return variable(name);
		}
		fail(std::string("unexpected '") + c + "'");
	}

	Value number()
	{
		const char* first = text_.data() + pos_;
		const char* last = text_.data() + text_.size();
		double v = 0;
		const auto [ptr, ec] = std::from_chars(first, last, v);
		if(ec != std::errc())
			fail("malformed number");
		pos_ += static_cast<std::size_t>(ptr - first);
		if(pos_ < text_.size() && text_[pos_] == 'i' &&
		   (pos_ + 1 == text_.size() || !(std::isalnum(static_cast<unsigned char>(text_[pos_ + 1])) || text_[pos_ + 1] == '_')))
		{
			++pos_;
			return Scalar(0, v);
		}
		return Scalar(v);
	}

	std::string identifier()
	{
		const std::size_t start = pos_;
		while(pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
			++pos_;
		return std::string(text_.substr(start, pos_ - start));
	}

	Value variable(const std::string& name)
	{
		if(const Value* v = env_.find(name))
			return *v;
		if(name == "i")
			return Scalar(0, 1);
		if(name == "pi")
			return Scalar(std::numbers::pi);
		fail("unknown name '" + name + "'");
	}

	void arity(const std::string& name, const std::vector<Value>& args, std::size_t n)
	{
		if(args.size() != n)
			fail(name + "() takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
	}

	Scalar scalar_arg(const std::string& name, const Value& v)
	{
		if(!is_scalar(v))
			fail(name + "() needs a scalar argument");
		return std::get<Scalar>(v);
	}

	const OperatorXcd& operator_arg(const std::string& name, const Value& v)
	{
		if(is_scalar(v))
			fail(name + "() needs an operator argument");
		return std::get<OperatorXcd>(v);
	}

	Value call(const std::string& name, const std::vector<Value>& args)
	{
		using ScalarFn = std::function<Scalar(Scalar)>;
		static const std::map<std::string, ScalarFn, std::less<>> scalar_fns{
			{"sqrt", [](Scalar z) { return std::sqrt(z); }},
			{"abs", [](Scalar z) { return Scalar(std::abs(z)); }},
			{"re", [](Scalar z) { return Scalar(z.real()); }},
			{"im", [](Scalar z) { return Scalar(z.imag()); }},
		};
		if(const auto it = scalar_fns.find(name); it != scalar_fns.end())
		{
			arity(name, args, 1);
			return it->second(scalar_arg(name, args[0]));
		}
		if(name == "conj" || name == "adj")
		{
			arity(name, args, 1);
			if(is_scalar(args[0]))
				return std::conj(std::get<Scalar>(args[0]));
			return OperatorXcd(std::get<OperatorXcd>(args[0]).adjoint());
		}
		if(name == "exp")
		{
			arity(name, args, 1);
			if(is_scalar(args[0]))
				return std::exp(std::get<Scalar>(args[0]));
			return mat_exp<double>(std::get<OperatorXcd>(args[0]));
		}
		if(name == "max" || name == "min")
		{
			if(args.empty())
				fail(name + "() needs at least one argument");
			double best = scalar_arg(name, args[0]).real();
			for(std::size_t k = 1; k < args.size(); ++k)
			{
				const double v = scalar_arg(name, args[k]).real();
				best = name == "max" ? std::max(best, v) : std::min(best, v);
			}
			return Scalar(best);
		}
		if(name == "comm" || name == "anti")
		{
			arity(name, args, 2);
			const auto& a = operator_arg(name, args[0]);
			const auto& b = operator_arg(name, args[1]);
			if(a.rows() != b.rows())
				fail(name + "() operands differ in dimension");
			return name == "comm" ? commutator(a, b) : anticommutator(a, b);
		}
		if(name == "tr")
		{
			arity(name, args, 1);
			return operator_arg(name, args[0]).trace();
		}
		if(name == "norm")
		{
			arity(name, args, 1);
			if(is_scalar(args[0]))
				return Scalar(std::abs(std::get<Scalar>(args[0])));
			return Scalar(norm2(operator_arg(name, args[0])));
		}
		if(name == "sharp")
		{
			arity(name, args, 1);
			const auto& x = operator_arg(name, args[0]);
			if(env_.product == nullptr)
				return OperatorXcd(x.adjoint());
			return env_.product->adjoint(x);
		}
		if(name == "good")
		{
			arity(name, args, 1);
			const auto& b0 = operator_arg(name, args[0]);
			if(env_.product == nullptr || !env_.product->metric())
				fail("good() needs a metric scalar product");
			return good_observable(*env_.product->metric(), b0);
		}
		if(name == "rand")
		{
			arity(name, args, 0);
			if(env_.rng == nullptr || env_.dim <= 0)
				fail("rand() is not available here");
			return random_operator<double>(env_.dim, *env_.rng);
		}
		fail("unknown function '" + name + "'");
	}

	std::string_view text_;
	const Environment& env_;
	std::size_t pos_ = 0;
};

} // namespace

Value evaluate(std::string_view text, const Environment& env)
{
	return Parser(text, env).run();
}

Scalar evaluate_scalar(std::string_view text, const Environment& env)
{
	const Value v = evaluate(text, env);
	if(!is_scalar(v))
		throw ExprError("\"" + std::string(text) + "\" is an operator, expected a scalar");
	return std::get<Scalar>(v);
}

OperatorXcd evaluate_operator(std::string_view text, const Environment& env)
{
	const Value v = evaluate(text, env);
	if(is_scalar(v))
	{
		if(env.dim <= 0)
			throw ExprError("\"" + std::string(text) + "\" is a scalar and the space dimension is unknown");
		return std::get<Scalar>(v) * OperatorXcd::Identity(env.dim, env.dim);
	}
	const auto& x = std::get<OperatorXcd>(v);
	if(env.dim > 0 && x.rows() != env.dim)
		throw ExprError("\"" + std::string(text) + "\" has dimension " + std::to_string(x.rows()) + ", space has " +
		                std::to_string(env.dim));
	return x;
}

} // namespace nhur::scenario
