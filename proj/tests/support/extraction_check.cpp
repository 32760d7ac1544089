#include "extraction_check.hpp"

#include <algorithm>
#include <cctype>

#include "xtract/error.hpp"

namespace xtract::testing {

namespace {

std::string squeeze(std::string_view s)
{
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    }
    return out;
}

bool has(const std::vector<TypedName>& v, const std::string& name)
{
    return std::any_of(v.begin(), v.end(), [&](const TypedName& t) { return t.name == name; });
}

}  // namespace

std::vector<std::string> extraction_violations(const SourceUnit& unit, const MethodModel& m,
                                               const MethodAnalysis& a, const std::vector<StmtId>& run,
                                               const std::string& name)
{
    std::vector<std::string> bad;
    const LineRange lines = run_lines(m, run);
    ExtractPlan p;
    ApplyResult r;
    try {
        p = plan(m, a.cfg, a.live, run, lines, name);
        r = apply(unit, m, p);
    } catch (const Error& e) {
        return {std::string("plan/apply failed: ") + e.what()};
    }

    auto io = fragment_io(m, a.cfg, a.live, run);
    for (const auto& in : io.inputs) {
        if (!has(p.parameters, in)) bad.push_back("input " + in + " is not a parameter");
    }
    for (const auto& out : io.outputs) {
        if (!p.return_variable || p.return_variable->name != out) bad.push_back("output " + out + " is not returned");
    }

    SourceUnit reparsed;
    MethodModel host;
    MethodModel extracted;
    try {
        reparsed = parse_unit(r.new_text, unit.path());
        host = locate_method(reparsed, MethodLocator{m.declaration_span.first});
        extracted = locate_method(reparsed, MethodLocator{r.new_method_lines.first});
    } catch (const Error& e) {
        bad.push_back(std::string("re-parse failed: ") + e.what());
        return bad;
    }
    if (extracted.name != name) bad.push_back("new method at line " + std::to_string(r.new_method_lines.first) + " is " + extracted.name);
    if (extracted.parameters.size() != p.parameters.size()) bad.push_back("parameter count differs after re-parse");

    // Statement count: the fragment's statements become one call (plus a
    // bare return when the fragment always returned from a void host).
    std::size_t moved = 0;
    for (StmtId s : run) moved += m.subtree(s).size();
    std::size_t call_statements = p.all_paths_return && p.host_return_type == "void" ? 2 : 1;
    if (host.size() != m.size() - moved + call_statements) {
        bad.push_back("host has " + std::to_string(host.size()) + " statements, expected "
                      + std::to_string(m.size() - moved + call_statements));
    }

    // Conservation, modulo whitespace.
    std::string fragment_text;
    for (int l = lines.first; l <= lines.last; ++l) fragment_text += unit.line_text(l);
    const std::string frag = squeeze(fragment_text);
    std::string new_body(reparsed.text().substr(extracted.body_open, extracted.body_close - extracted.body_open));
    if (squeeze(new_body).find(frag) == std::string::npos) bad.push_back("fragment text missing from the new method");
    std::string old_host = squeeze(unit.text().substr(m.declaration_begin, m.declaration_end - m.declaration_begin));
    std::string new_host =
        squeeze(reparsed.text().substr(host.declaration_begin, host.declaration_end - host.declaration_begin));
    // Locate the fragment by position: identical lines may occur earlier.
    const std::size_t cut =
        squeeze(unit.text().substr(m.declaration_begin, unit.line_start(lines.first) - m.declaration_begin)).size();
    if (old_host.compare(cut, frag.size(), frag) != 0
        || new_host != old_host.replace(cut, frag.size(), squeeze(p.call_text()))) {
        bad.push_back("host differs from the original with the fragment replaced by the call");
    }

    // Round trip: the new method's own analysis.
    try {
        MethodAnalysis again(extracted);
        auto own = fragment_io(extracted, again.cfg, again.live, extracted.top_level);
        for (const auto& in : own.inputs) {
            if (!has(p.parameters, in)) bad.push_back("new method reads " + in + " before any write");
        }
        for (const auto& out : own.outputs) {
            if (!p.return_variable || p.return_variable->name != out) bad.push_back("new method leaks " + out);
        }
    } catch (const Error& e) {
        bad.push_back(std::string("new method does not analyse: ") + e.what());
    }
    return bad;
}

}  // namespace xtract::testing
