#include <algorithm>
#include <fstream>
#include <sstream>

#include "syntax.hpp"
#include "xtract/digest.hpp"
#include "xtract/error.hpp"
#include "xtract/source_model.hpp"

namespace xtract {

namespace detail {

TreePtr parse_java(std::string_view text)
{
    std::unique_ptr<TSParser, decltype(&ts_parser_delete)> parser(ts_parser_new(), &ts_parser_delete);
    if (!parser || !ts_parser_set_language(parser.get(), tree_sitter_java())) {
        throw Error(ErrorCode::parse_error, "cannot initialize the Java grammar");
    }
    TreePtr tree(ts_parser_parse_string(parser.get(), nullptr, text.data(), static_cast<uint32_t>(text.size())));
    if (!tree) {
        throw Error(ErrorCode::parse_error, "parser returned no tree");
    }
    return tree;
}

std::vector<TSNode> method_nodes(TSNode root)
{
    std::vector<TSNode> out;
    std::vector<TSNode> stack{root};
    while (!stack.empty()) {
        TSNode n = stack.back();
        stack.pop_back();
        if ((is(n, "method_declaration") || is(n, "constructor_declaration")
             || is(n, "compact_constructor_declaration"))
            && !ts_node_is_null(field(n, "body"))) {
            out.push_back(n);
        }
        uint32_t count = ts_node_named_child_count(n);
        for (uint32_t i = count; i-- > 0;) {
            stack.push_back(ts_node_named_child(n, i));
        }
    }
    return out;
}

}  // namespace detail

namespace {

// Byte offset of the first malformed sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s)
{
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        }
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return i;
        }
        if (i + len > s.size()) return i;
        for (std::size_t k = 1; k < len; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return i;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) || cp > 0x10FFFF
            || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return i;
        }
        i += len;
    }
    return std::string_view::npos;
}

std::vector<std::size_t> build_line_index(std::string_view text)
{
    std::vector<std::size_t> starts{0};
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n' && i + 1 < text.size()) {
            starts.push_back(i + 1);
        }
    }
    return starts;
}

std::optional<TSNode> first_error(TSNode root)
{
    std::vector<TSNode> stack{root};
    while (!stack.empty()) {
        TSNode n = stack.back();
        stack.pop_back();
        if (ts_node_is_error(n) || ts_node_is_missing(n)) {
            return n;
        }
        if (!ts_node_has_error(n)) continue;
        uint32_t count = ts_node_child_count(n);
        for (uint32_t i = count; i-- > 0;) {
            stack.push_back(ts_node_child(n, i));
        }
    }
    return std::nullopt;
}

void collect_token_bounds(TSNode root, detail::UnitData& data)
{
    data.line_tokens.assign(data.line_starts.size(), std::nullopt);
    std::vector<TSNode> stack{root};
    while (!stack.empty()) {
        TSNode n = stack.back();
        stack.pop_back();
        if (detail::is_comment(n)) continue;
        uint32_t count = ts_node_child_count(n);
        if (count > 0) {
            for (uint32_t i = 0; i < count; ++i) stack.push_back(ts_node_child(n, i));
            continue;
        }
        auto begin = ts_node_start_byte(n);
        auto end = ts_node_end_byte(n);
        if (end <= begin) continue;
        TSPoint sp = ts_node_start_point(n);
        TSPoint ep = ts_node_end_point(n);
        uint32_t last_row = (ep.column == 0 && ep.row > sp.row) ? ep.row - 1 : ep.row;
        for (uint32_t row = sp.row; row <= last_row && row < data.line_tokens.size(); ++row) {
            auto& slot = data.line_tokens[row];
            if (!slot) {
                slot = SourceUnit::TokenBounds{begin, end};
            } else {
                slot->first_begin = std::min<std::size_t>(slot->first_begin, begin);
                slot->last_end = std::max<std::size_t>(slot->last_end, end);
            }
        }
    }
}

}  // namespace

SourceUnit parse_unit(std::string text, std::string path)
{
    auto data = std::make_shared<detail::UnitData>();
    data->path = std::move(path);
    data->text = std::move(text);
    data->line_starts = build_line_index(data->text);

    if (auto bad = find_invalid_utf8(data->text); bad != std::string_view::npos) {
        auto it = std::upper_bound(data->line_starts.begin(), data->line_starts.end(), bad);
        int line = static_cast<int>(it - data->line_starts.begin());
        int column = static_cast<int>(bad - data->line_starts[static_cast<std::size_t>(line - 1)]) + 1;
        throw ParseError(data->path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": invalid UTF-8",
                         line, column);
    }

    data->tree = detail::parse_java(data->text);
    TSNode root = ts_tree_root_node(data->tree.get());
    if (ts_node_has_error(root)) {
        TSPoint p = ts_node_start_point(root);
        std::string what = "syntax error";
        if (auto err = first_error(root)) {
            p = ts_node_start_point(*err);
            if (ts_node_is_missing(*err)) {
                what = std::string("missing '") + ts_node_type(*err) + "'";
            }
        }
        int line = static_cast<int>(p.row) + 1;
        int column = static_cast<int>(p.column) + 1;
        throw ParseError(data->path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what, line,
                         column);
    }

    collect_token_bounds(root, *data);
    data->digest = sha256_hex(data->text);

    SourceUnit unit;
    unit.data_ = std::move(data);
    return unit;
}

SourceUnit load_unit(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_unit(buf.str(), path.string());
}

const std::string& SourceUnit::path() const { return data_->path; }
const std::string& SourceUnit::text() const { return data_->text; }
const std::vector<std::size_t>& SourceUnit::line_index() const { return data_->line_starts; }
int SourceUnit::line_count() const { return static_cast<int>(data_->line_starts.size()); }

std::size_t SourceUnit::line_start(int line) const
{
    return data_->line_starts.at(static_cast<std::size_t>(line - 1));
}

std::size_t SourceUnit::line_end(int line) const
{
    if (line >= line_count()) return data_->text.size();
    return data_->line_starts.at(static_cast<std::size_t>(line));
}

std::string_view SourceUnit::line_text(int line) const
{
    std::string_view all(data_->text);
    auto a = line_start(line);
    auto b = line_end(line);
    auto s = all.substr(a, b - a);
    if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

int SourceUnit::line_of_byte(std::size_t offset) const
{
    auto it = std::upper_bound(data_->line_starts.begin(), data_->line_starts.end(), offset);
    return static_cast<int>(it - data_->line_starts.begin());
}

bool SourceUnit::is_code_line(int line) const { return token_bounds(line).has_value(); }

std::optional<SourceUnit::TokenBounds> SourceUnit::token_bounds(int line) const
{
    if (line < 1 || line > line_count()) return std::nullopt;
    return data_->line_tokens[static_cast<std::size_t>(line - 1)];
}

const std::string& SourceUnit::digest() const { return data_->digest; }

}  // namespace xtract
