#include "nhur/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{

enum Exit : int
{
	ok = 0,
	expectation_failed = 1,
	schema_error = 2,
	numerical_guard = 3,
};

int run(const std::string& target, const std::string& out_dir, const nhur::scenario::Overrides& ov)
{
	using namespace nhur::scenario;
	try
	{
		Report report;
		if(std::filesystem::is_regular_file(target))
			report = run_file(target, ov);
		else if(const auto text = bundled_scenario(target))
			report = run_text(*text, ov);
		else
			throw SchemaError("<file>", "no scenario file or bundled scenario named '" + target + "'");

		write_report(report, out_dir);
		std::cout << text_report(report);
		return report.passed() ? ok : expectation_failed;
	}
	catch(const SchemaError& e)
	{
		std::cerr << "schema error: " << e.what() << '\n';
		return schema_error;
	}
	catch(const nhur::TruncationTooSmall& e)
	{
		std::cerr << "numerical guard: " << e.what() << " (minimal truncation " << e.minimal_truncation() << ")\n";
		return numerical_guard;
	}
	catch(const nhur::NumericalGuard& e)
	{
		std::cerr << "numerical guard: " << e.what() << '\n';
		return numerical_guard;
	}
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Uncertainty relations for non-Hermitian operators: scenario runner"};
	app.set_version_flag("--version", std::string("nhur ") + NHUR_VERSION);
	app.require_subcommand(1);

	std::string target;
	std::string out_dir = ".";
	std::uint64_t seed = 0;
	double tol = 0;
	int truncation = 0;
	auto* run_cmd = app.add_subcommand("run", "Run a scenario file or a bundled scenario by name");
	run_cmd->add_option("file", target, "Scenario YAML file or bundled name")->required();
	run_cmd->add_option("--out", out_dir, "Directory for the .txt, .jsonl and .csv outputs");
	auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
	auto* tol_opt = run_cmd->add_option("--tol", tol, "Override the default expectation tolerance");
	auto* trunc_opt = run_cmd->add_option("--truncation", truncation, "Override the Fock truncation N");

	std::string dir;
	auto* list_cmd = app.add_subcommand("list", "List bundled scenarios and those found in --dir");
	list_cmd->add_option("--dir", dir, "Directory with additional scenario files");

	CLI11_PARSE(app, argc, argv);

	if(*list_cmd)
	{
		const auto entries = nhur::scenario::list_scenarios(dir.empty() ? std::nullopt : std::optional(std::filesystem::path(dir)));
		std::size_t width = 0;
		for(const auto& e : entries)
			width = std::max(width, e.name.size());
		for(const auto& e : entries)
		{
			std::cout << e.name << std::string(width + 2 - e.name.size(), ' ') << e.description;
			if(e.source != "bundled")
				std::cout << "  [" << e.source << ']';
			std::cout << '\n';
		}
		return ok;
	}

	nhur::scenario::Overrides ov;
	if(*seed_opt)
		ov.seed = seed;
	if(*tol_opt)
		ov.tol = tol;
	if(*trunc_opt)
		ov.truncation = truncation;
	return run(target, out_dir, ov);
}
