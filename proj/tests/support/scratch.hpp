#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "xtract/provider.hpp"

namespace xtract::testing {

struct TempDir {
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() / ("xtract-test-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path write(const std::string& name, const std::string& content) const
    {
        auto p = path / name;
        std::filesystem::create_directories(p.parent_path());
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }
};

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Completion i is texts[i % size]; iterations in `failing` fail.
class ListProvider : public Provider {
public:
    explicit ListProvider(std::vector<std::string> texts, std::set<int> failing = {})
        : texts_(std::move(texts)), failing_(std::move(failing))
    {
    }
    [[nodiscard]] std::string name() const override { return "list"; }
    [[nodiscard]] Completion complete(const PromptSpec&, const ProviderConfig&, const std::string&, int i) override
    {
        if (failing_.count(i)) return {std::nullopt, "timeout"};
        return {texts_.at(static_cast<std::size_t>(i) % texts_.size()), {}};
    }

private:
    std::vector<std::string> texts_;
    std::set<int> failing_;
};

}  // namespace xtract::testing
