#include "nhur/scenario.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace nhur::scenario
{

namespace
{

using Json = nlohmann::ordered_json;

Json tolerance_json(const Tolerances& t)
{
	return Json{{"expect", t.expect},
	            {"normalization", t.normalization},
	            {"saturation", t.saturation},
	            {"symmetry", t.symmetry},
	            {"lemma", t.lemma}};
}

Json truncation_json(const Report& r)
{
	return r.truncation ? Json(*r.truncation) : Json(nullptr);
}

std::string show(const Json& v)
{
	if(v.is_number_float())
	{
		char buf[32];
		std::snprintf(buf, sizeof buf, "%.15g", v.get<double>());
		return buf;
	}
	if(v.is_array() && v.size() == 2 && v[0].is_number())
	{
		char buf[80];
		std::snprintf(buf, sizeof buf, "%.15g%+.15gi", v[0].get<double>(), v[1].get<double>());
		return buf;
	}
	if(v.is_string())
		return v.get<std::string>();
	return v.dump();
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
	std::ofstream out(path, std::ios::binary);
	out << text;
	if(!out)
		throw Error("cannot write " + path.string());
}

} // namespace

std::string machine_report(const Report& r)
{
	std::ostringstream out;
	const Json header{{"type", "scenario"},
	                  {"name", r.name},
	                  {"description", r.description},
	                  {"seed", r.seed},
	                  {"dim", r.dim},
	                  {"truncation", truncation_json(r)},
	                  {"product", r.product},
	                  {"tolerances", tolerance_json(r.tolerances)}};
	out << header.dump() << '\n';
	for(const auto& rec : r.records)
	{
		Json checks = Json::array();
		for(const auto& c : rec.checks)
			checks.push_back(Json{{"field", c.field}, {"rule", c.rule}, {"passed", c.passed}, {"detail", c.detail}});
		const Json line{{"type", "analysis"}, {"id", rec.id},         {"kind", rec.kind},     {"point", rec.point},
		                {"state", rec.state}, {"result", rec.result}, {"checks", checks},     {"passed", rec.passed()}};
		out << line.dump() << '\n';
	}
	const Json summary{{"type", "summary"},
	                   {"name", r.name},
	                   {"seed", r.seed},
	                   {"truncation", truncation_json(r)},
	                   {"tolerances", tolerance_json(r.tolerances)},
	                   {"checks", r.check_count()},
	                   {"failed", r.failure_count()},
	                   {"passed", r.passed()}};
	out << summary.dump() << '\n';
	return out.str();
}

std::string text_report(const Report& r)
{
	std::ostringstream out;
	out << "scenario " << r.name << '\n';
	if(!r.description.empty())
		out << "  " << r.description << '\n';
	out << "seed " << r.seed << ", dim " << r.dim;
	if(r.truncation)
		out << ", truncation N = " << *r.truncation;
	out << ", product " << r.product << '\n';
	const auto& t = r.tolerances;
	out << "tolerances: expect " << show(Json(t.expect)) << ", normalization " << show(Json(t.normalization))
	    << ", saturation " << show(Json(t.saturation)) << ", symmetry " << show(Json(t.symmetry)) << ", lemma "
	    << show(Json(t.lemma)) << '\n';

	for(const auto& rec : r.records)
	{
		out << '\n' << '[' << rec.id << "] " << rec.kind;
		if(rec.state.contains("z"))
			out << " at z = " << show(rec.state["z"]);
		else if(rec.state.contains("kind"))
			out << " on " << rec.state["kind"].get<std::string>() << " state";
		out << '\n';
		if(rec.state.contains("tail_mass"))
			out << "  " << std::left << std::setw(22) << "truncation residual" << show(rec.state["tail_mass"]) << '\n';
		for(const auto& [k, v] : rec.result.items())
			out << "  " << std::left << std::setw(22) << k << show(v) << '\n';
		for(const auto& c : rec.checks)
			out << "  " << (c.passed ? "PASS " : "FAIL ") << c.field << ' ' << c.rule << ": " << c.detail << '\n';
	}
	out << '\n'
	    << r.check_count() << " checks, " << r.failure_count() << " failed: " << (r.passed() ? "PASS" : "FAIL") << '\n';
	return out.str();
}

void write_report(const Report& r, const std::filesystem::path& dir)
{
	std::filesystem::create_directories(dir);
	write_file(dir / (r.name + ".txt"), text_report(r));
	write_file(dir / (r.name + ".jsonl"), machine_report(r));
	for(const auto& s : r.series)
		write_file(dir / s.file, s.csv);
}

} // namespace nhur::scenario
