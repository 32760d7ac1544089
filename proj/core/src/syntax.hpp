#pragma once

// Internal tree-sitter plumbing shared by the source model and its users.

#include <tree_sitter/api.h>

#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xtract/source_model.hpp"

extern "C" const TSLanguage* tree_sitter_java(void);

namespace xtract::detail {

struct TreeDeleter {
    void operator()(TSTree* tree) const { ts_tree_delete(tree); }
};
using TreePtr = std::unique_ptr<TSTree, TreeDeleter>;

struct UnitData {
    std::string path;
    std::string text;
    std::vector<std::size_t> line_starts;
    std::vector<std::optional<SourceUnit::TokenBounds>> line_tokens;  // index = line - 1
    std::string digest;
    TreePtr tree;
};

inline bool is(TSNode node, const char* type) { return std::strcmp(ts_node_type(node), type) == 0; }

inline bool is_comment(TSNode node) { return is(node, "line_comment") || is(node, "block_comment"); }

inline TSNode field(TSNode node, const char* name)
{
    return ts_node_child_by_field_name(node, name, static_cast<uint32_t>(std::strlen(name)));
}

inline std::string_view text_of(const std::string& src, TSNode node)
{
    auto a = ts_node_start_byte(node);
    auto b = ts_node_end_byte(node);
    return std::string_view(src).substr(a, b - a);
}

inline int line_of(TSPoint p) { return static_cast<int>(p.row) + 1; }

inline std::vector<TSNode> named_children(TSNode node)
{
    std::vector<TSNode> out;
    uint32_t n = ts_node_named_child_count(node);
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        out.push_back(ts_node_named_child(node, i));
    }
    return out;
}

/// Children carrying a given field name, in order (for repeated fields such
/// as `init` and `update` of a for statement).
inline std::vector<TSNode> field_children(TSNode node, const char* name)
{
    std::vector<TSNode> out;
    uint32_t n = ts_node_child_count(node);
    for (uint32_t i = 0; i < n; ++i) {
        const char* f = ts_node_field_name_for_child(node, i);
        if (f && std::strcmp(f, name) == 0) {
            out.push_back(ts_node_child(node, i));
        }
    }
    return out;
}

/// Parses text that is already known to be valid for the unit.
TreePtr parse_java(std::string_view text);

/// Method, constructor and compact-constructor declarations with bodies.
std::vector<TSNode> method_nodes(TSNode root);

}  // namespace xtract::detail
