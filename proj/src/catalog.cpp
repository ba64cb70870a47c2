#include "nhur/scenario.hpp"

#include "bundled.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <iterator>

namespace nhur::scenario
{

namespace
{

std::string describe_text(const std::string& text, std::string& name)
{
	try
	{
		const YAML::Node root = YAML::Load(text);
		if(root.IsMap())
		{
			if(root["name"] && root["name"].IsScalar())
				name = root["name"].Scalar();
			if(root["description"] && root["description"].IsScalar())
				return root["description"].Scalar();
		}
	}
	catch(const YAML::Exception& e)
	{
		return std::string("(unreadable: ") + e.what() + ")";
	}
	return "";
}

} // namespace

std::optional<std::string> bundled_scenario(std::string_view name)
{
	for(const auto& [n, text] : detail::bundled_sources())
		if(n == name)
			return std::string(text);
	return std::nullopt;
}

std::vector<CatalogEntry> list_scenarios(const std::optional<std::filesystem::path>& custom_dir)
{
	std::vector<CatalogEntry> out;
	for(const auto& [n, text] : detail::bundled_sources())
	{
		std::string name(n);
		const std::string desc = describe_text(std::string(text), name);
		out.push_back({std::string(n), desc, "bundled"});
	}
	std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });

	if(!custom_dir)
		return out;
	std::error_code ec;
	std::vector<std::filesystem::path> files;
	for(const auto& entry : std::filesystem::directory_iterator(*custom_dir, ec))
	{
		const auto ext = entry.path().extension();
		if(entry.is_regular_file() && (ext == ".yaml" || ext == ".yml"))
			files.push_back(entry.path());
	}
	std::sort(files.begin(), files.end());
	for(const auto& f : files)
	{
		std::ifstream in(f, std::ios::binary);
		const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
		std::string name = f.stem().string();
		const std::string desc = describe_text(text, name);
		out.push_back({name, desc, f.string()});
	}
	return out;
}

} // namespace nhur::scenario
