#pragma once

#include "nhur/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nhur::scenario
{

/// Malformed scenario; `field()` is the dotted path of the offending entry,
/// e.g. "analyses[1].expect[0].value".
class SchemaError : public Error
{
public:
	SchemaError(std::string field, const std::string& what)
		: Error("field '" + field + "': " + what), field_(std::move(field))
	{
	}

	const std::string& field() const noexcept { return field_; }

private:
	std::string field_;
};

/// Command-line overrides. `tol` replaces the default expectation tolerance.
struct Overrides
{
	std::optional<std::uint64_t> seed;
	std::optional<double> tol;
	std::optional<int> truncation;
};

struct Tolerances
{
	double expect = 1e-10;
	double normalization = 1e-10;
	double saturation = 1e-8;
	double symmetry = 1e-8;
	double lemma = 1e-10;
};

struct Check
{
	std::string field;
	std::string rule;
	bool passed = false;
	std::string detail;
};

/// One analysis evaluated at one state.
struct Record
{
	std::string id;
	std::string kind;
	std::size_t point = 0;
	nlohmann::ordered_json state;
	nlohmann::ordered_json result;
	std::vector<Check> checks;

	bool passed() const;
};

struct Series
{
	std::string file;
	std::string csv;
};

struct Report
{
	std::string name;
	std::string description;
	std::uint64_t seed = 0;
	Eigen::Index dim = 0;
	std::optional<int> truncation;
	std::string product;
	Tolerances tolerances;
	std::vector<Record> records;
	std::vector<Series> series;

	std::size_t check_count() const;
	std::size_t failure_count() const;
	bool passed() const { return failure_count() == 0; }
};

Report run_text(const std::string& yaml, const Overrides& overrides = {});
Report run_file(const std::filesystem::path& file, const Overrides& overrides = {});

/// One JSON document per line: a header, one line per record, a summary.
std::string machine_report(const Report& r);
std::string text_report(const Report& r);

/// Writes <name>.txt, <name>.jsonl and any CSV series into `dir`.
void write_report(const Report& r, const std::filesystem::path& dir);

struct CatalogEntry
{
	std::string name;
	std::string description;
	std::string source; // "bundled" or the file path
};

std::vector<CatalogEntry> list_scenarios(const std::optional<std::filesystem::path>& custom_dir = std::nullopt);
std::optional<std::string> bundled_scenario(std::string_view name);

} // namespace nhur::scenario
