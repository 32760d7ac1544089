#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "xtract/source_model.hpp"

namespace xtract::testing {

inline std::filesystem::path data_dir() { return XTRACT_TEST_DATA_DIR; }

inline std::filesystem::path fixture(std::string_view relative) { return data_dir() / std::string(relative); }

inline SourceUnit load_fixture(std::string_view relative) { return load_unit(fixture(relative)); }

inline MethodModel fixture_method(std::string_view relative, std::string_view name)
{
    return locate_method(load_fixture(relative), MethodLocator{std::string(name)});
}

}  // namespace xtract::testing

namespace xtract::testing {

inline std::filesystem::path demo_dir() { return XTRACT_DEMO_DIR; }

}  // namespace xtract::testing
