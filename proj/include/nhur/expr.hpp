#pragma once

#include "nhur/metric.hpp"

#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>

namespace nhur::scenario
{

using Scalar = std::complex<double>;
using Value = std::variant<Scalar, OperatorXcd>;

class ExprError : public Error
{
public:
	using Error::Error;
};

/// Names visible to an expression plus the context some functions need:
/// `sharp` and `good` use the scalar product, `rand` draws from `rng`.
struct Environment
{
	std::map<std::string, Value, std::less<>> vars;
	Eigen::Index dim = 0;
	const ScalarProduct<double>* product = nullptr;
	std::mt19937_64* rng = nullptr;

	void set(const std::string& name, Value v) { vars[name] = std::move(v); }
	const Value* find(std::string_view name) const;
};

/// Grammar, loosest binding first:
///   cmp    := sum [("==" | "!=" | "<" | "<=" | ">" | ">=") sum]
///   sum    := prod {("+" | "-") prod}
///   prod   := unary {("*" | "/") unary}
///   unary  := ("-" | "+") unary | power
///   power  := atom ["^" unary]
///   atom   := number ["i"] | name | name "(" [cmp {"," cmp}] ")" | "(" cmp ")"
/// A scalar added to an operator stands for that multiple of the identity.
Value evaluate(std::string_view text, const Environment& env);

Scalar evaluate_scalar(std::string_view text, const Environment& env);
OperatorXcd evaluate_operator(std::string_view text, const Environment& env);

bool is_scalar(const Value& v);
std::string describe(const Value& v);

} // namespace nhur::scenario
