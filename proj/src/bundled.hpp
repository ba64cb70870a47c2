#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace nhur::scenario::detail
{

// (name, YAML text) for every file in scenarios/, generated at configure time.
const std::vector<std::pair<std::string_view, std::string_view>>& bundled_sources();

} // namespace nhur::scenario::detail
