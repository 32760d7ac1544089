#include "xtract/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "xtract/error.hpp"
#include "xtract/source_model.hpp"

namespace xtract {

using nlohmann::json;

namespace {

std::vector<int> lines_of(const LineRange& r, const std::vector<int>& code_lines)
{
    std::vector<int> out;
    if (code_lines.empty()) {
        for (int l = r.first; l <= r.last; ++l) out.push_back(l);
        return out;
    }
    for (int l : code_lines) {
        if (r.contains(l)) out.push_back(l);
    }
    return out;
}

LineRange range_from(const json& j, const char* first, const char* last)
{
    return {j.at(first).get<int>(), j.at(last).get<int>()};
}

}  // namespace

LocSummary summarize_loc(std::vector<int> locs)
{
    LocSummary s;
    if (locs.empty()) return s;
    std::sort(locs.begin(), locs.end());
    s.count = static_cast<int>(locs.size());
    s.min = locs.front();
    s.max = locs.back();
    s.mean = std::accumulate(locs.begin(), locs.end(), 0.0) / s.count;
    std::size_t mid = locs.size() / 2;
    s.median = locs.size() % 2 ? locs[mid] : (locs[mid - 1] + locs[mid]) / 2.0;
    return s;
}

OracleLoad load_oracle(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read oracle " + path.string());
    const auto base = path.parent_path();
    OracleLoad out;
    std::map<std::filesystem::path, std::optional<SourceUnit>> units;
    std::string line;
    int number = 0;
    std::vector<int> locs;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto where = path.filename().string() + ":" + std::to_string(number) + ": ";
        OracleEntry e;
        try {
            json j = json::parse(line);
            e.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
            e.file = j.at("file").get<std::string>();
            e.method_name = j.at("method_name").get<std::string>();
            e.method_lines = range_from(j, "method_start", "method_end");
            e.extracted = range_from(j, "extracted_start", "extracted_end");
            if (auto n = j.find("extracted_name"); n != j.end() && n->is_string()) e.extracted_name = n->get<std::string>();
        } catch (const json::exception& ex) {
            out.diagnostics.push_back(where + "malformed entry: " + ex.what());
            continue;
        }
        auto file = e.file.is_absolute() ? e.file : base / e.file;
        auto [it, fresh] = units.try_emplace(file);
        if (fresh) {
            try {
                it->second = load_unit(file);
            } catch (const Error& ex) {
                it->second.reset();
                out.diagnostics.push_back(where + e.id + ": " + ex.what());
                continue;
            }
        }
        if (!it->second) {
            out.diagnostics.push_back(where + e.id + ": " + file.string() + " is unavailable");
            continue;
        }
        try {
            auto model = locate_method(*it->second, MethodLocator{e.method_lines.first});
            if (model.name != e.method_name) {
                out.diagnostics.push_back(where + e.id + ": line " + std::to_string(e.method_lines.first) + " is in "
                                          + model.name + ", not " + e.method_name);
                continue;
            }
            if (e.extracted.empty() || !e.method_lines.contains(e.extracted)) {
                out.diagnostics.push_back(where + e.id + ": extracted lines " + to_string(e.extracted)
                                          + " are not inside the host " + to_string(e.method_lines));
                continue;
            }
            e.code_lines = model.code_lines();
        } catch (const Error& ex) {
            out.diagnostics.push_back(where + e.id + ": " + ex.what());
            continue;
        }
        e.file = file;
        locs.push_back(e.host_loc());
        out.entries.push_back(std::move(e));
    }
    if (out.entries.empty()) throw Error(ErrorCode::empty_oracle, "no oracle entry in " + path.string() + " resolves");
    out.host_loc = summarize_loc(std::move(locs));
    return out;
}

int floor_allowance(int host_loc, double tolerance)
{
    return static_cast<int>(std::floor(tolerance * host_loc + 1e-9));
}

bool matches(const std::vector<int>& suggested_lines, const std::vector<int>& oracle_lines, int host_loc,
             double tolerance, const Allowance& allowance)
{
    std::vector<int> a = suggested_lines;
    std::vector<int> b = oracle_lines;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<int> diff;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
    return static_cast<int>(diff.size()) <= allowance(host_loc, tolerance);
}

bool matches(const LineRange& suggested, const LineRange& oracle, int host_loc, double tolerance,
             const Allowance& allowance)
{
    return matches(lines_of(suggested, {}), lines_of(oracle, {}), host_loc, tolerance, allowance);
}

DumpSource DumpSource::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot read suggestion dump " + path.string());
    std::map<std::string, std::vector<RankedRange>> dump;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json j = json::parse(line);
            std::string id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
            auto& ranked = dump[id];
            for (const auto& s : j.at("suggestions")) {
                ranked.push_back({range_from(s, "start", "end"), s.value("name", std::string())});
            }
        } catch (const json::exception& ex) {
            throw Error(ErrorCode::invalid_config,
                        path.string() + ":" + std::to_string(number) + ": malformed dump line: " + ex.what());
        }
    }
    return DumpSource(std::move(dump));
}

SourcedSuggestions DumpSource::suggestions_for(const OracleEntry& entry, int k)
{
    SourcedSuggestions out;
    auto it = dump_.find(entry.id);
    if (it == dump_.end()) {
        out.trail.push_back("no suggestions in the dump");
        return out;
    }
    for (const auto& r : it->second) {
        if (static_cast<int>(out.ranked.size()) == k) break;
        out.ranked.push_back(r);
    }
    return out;
}

EvalReport evaluate(const std::vector<OracleEntry>& entries, SuggestionSource& source, const EvalOptions& options)
{
    if (entries.empty()) throw Error(ErrorCode::empty_oracle, "the oracle has no entries");
    if (options.k < 1) throw Error(ErrorCode::invalid_config, "k must be at least 1");
    EvalReport report;
    report.k = options.k;
    report.tolerance = options.tolerance;
    for (const auto& e : entries) {
        EntryVerdict v;
        v.id = e.id;
        SourcedSuggestions s = source.suggestions_for(e, options.k);
        v.trail = std::move(s.trail);
        v.error = std::move(s.error);
        const auto oracle = lines_of(e.extracted, e.code_lines);
        for (std::size_t i = 0; i < s.ranked.size() && static_cast<int>(i) < options.k; ++i) {
            if (matches(lines_of(s.ranked[i].range, e.code_lines), oracle, e.host_loc(), options.tolerance,
                        options.allowance)) {
                v.matched_rank = static_cast<int>(i) + 1;
                v.matched_range = s.ranked[i].range;
                break;
            }
        }
        if (v.matched_rank) ++report.matched;
        report.verdicts.push_back(std::move(v));
    }
    report.total = static_cast<int>(entries.size());
    report.recall = static_cast<double>(report.matched) / report.total;
    return report;
}

RunStats repeated_stats(const std::vector<double>& recalls, double baseline)
{
    if (recalls.size() < 2) {
        throw Error(ErrorCode::insufficient_samples,
                    "a t-test needs at least 2 samples, got " + std::to_string(recalls.size()));
    }
    RunStats s;
    s.n = static_cast<int>(recalls.size());
    s.baseline = baseline;
    // Identical samples are exactly degenerate; summing them can leave a
    // rounding residue in the mean and a tiny nonzero sd.
    const bool constant = std::all_of(recalls.begin(), recalls.end(), [&](double r) { return r == recalls[0]; });
    s.mean = constant ? recalls[0] : std::accumulate(recalls.begin(), recalls.end(), 0.0) / s.n;
    double ss = 0;
    for (double r : recalls) ss += (r - s.mean) * (r - s.mean);
    s.sd = constant ? 0 : std::sqrt(ss / (s.n - 1));
    if (s.sd == 0) {
        s.degenerate = true;
        if (s.mean == baseline) {
            s.t = 0;
            s.p = 1;
        } else {
            s.t = s.mean > baseline ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            s.p = 0;
        }
        return s;
    }
    s.t = (s.mean - baseline) / (s.sd / std::sqrt(static_cast<double>(s.n)));
    boost::math::students_t dist(s.n - 1);
    s.p = 2 * boost::math::cdf(boost::math::complement(dist, std::fabs(s.t)));
    return s;
}

std::string report_json(const EvalReport& report)
{
    json verdicts = json::array();
    for (const auto& v : report.verdicts) {
        json j{{"id", v.id}, {"trail", v.trail}};
        j["matched_rank"] = v.matched_rank ? json(*v.matched_rank) : json(nullptr);
        j["matched_range"] = v.matched_range ? json(to_string(*v.matched_range)) : json(nullptr);
        if (v.error) j["error"] = *v.error;
        verdicts.push_back(std::move(j));
    }
    json j{{"k", report.k},         {"tolerance", report.tolerance}, {"matched", report.matched},
           {"total", report.total}, {"recall", report.recall},       {"verdicts", std::move(verdicts)}};
    if (report.stats) {
        const auto& s = *report.stats;
        auto finite = [](double x) { return std::isfinite(x) ? json(x) : json(x > 0 ? "inf" : "-inf"); };
        j["stats"] = json{{"n", s.n},        {"baseline", s.baseline}, {"mean", s.mean},
                          {"sd", s.sd},      {"t", finite(s.t)},       {"p", s.p},
                          {"degenerate", s.degenerate}};
    }
    return j.dump(2);
}

std::string report_table(const EvalReport& report)
{
    std::ostringstream out;
    std::size_t width = 2;
    for (const auto& v : report.verdicts) width = std::max(width, v.id.size());
    out << std::left << std::setw(static_cast<int>(width)) << "id" << "  rank  range\n";
    for (const auto& v : report.verdicts) {
        out << std::setw(static_cast<int>(width)) << v.id << "  ";
        if (v.matched_rank) out << std::setw(4) << *v.matched_rank << "  " << to_string(*v.matched_range);
        else out << std::setw(4) << "-" << "  miss";
        if (v.error) out << "  (" << *v.error << ")";
        out << "\n";
        if (!v.matched_rank) {
            for (const auto& t : v.trail) out << "    " << t << "\n";
        }
    }
    out << std::fixed << std::setprecision(4) << "Recall@" << report.k << " at tolerance " << report.tolerance << ": "
        << report.recall << " (" << report.matched << "/" << report.total << ")\n";
    if (report.stats) {
        const auto& s = *report.stats;
        out << "runs " << s.n << "  mean " << s.mean << "  sd " << s.sd << "  t " << s.t << "  p "
            << std::setprecision(6) << std::scientific << s.p << (s.degenerate ? "  (degenerate: sd = 0)" : "") << "\n";
    }
    return out.str();
}

}  // namespace xtract
