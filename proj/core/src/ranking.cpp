#include "xtract/ranking.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace xtract {

namespace {

bool ranks_before(const RankedGroup& a, const RankedGroup& b)
{
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    if (a.canonical_range.size() != b.canonical_range.size()) {
        return a.canonical_range.size() > b.canonical_range.size();
    }
    return a.canonical_range.first < b.canonical_range.first;
}

bool by_range(const RankedGroup& a, const RankedGroup& b)
{
    return a.canonical_range < b.canonical_range;
}

void absorb(RankedGroup& into, const RankedGroup& from)
{
    into.frequency += from.frequency;
    into.names.insert(into.names.end(), from.names.begin(), from.names.end());
    into.members.insert(into.members.end(), from.members.begin(), from.members.end());
}

void finish(RankedGroup& g)
{
    std::sort(g.names.begin(), g.names.end());
    std::sort(g.members.begin(), g.members.end());
    g.representative_name = modal_name(g.names);
}

}  // namespace

std::string modal_name(const std::vector<std::string>& names)
{
    std::map<std::string, int> counts;
    for (const auto& n : names) ++counts[n];
    std::string best;
    int best_count = 0;
    for (const auto& [name, count] : counts) {
        if (count > best_count) {
            best = name;
            best_count = count;
        }
    }
    return best;
}

double line_jaccard(const LineRange& a, const LineRange& b)
{
    int inter = std::max(0, std::min(a.last, b.last) - std::max(a.first, b.first) + 1);
    int uni = a.size() + b.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
}

std::vector<RankedGroup> aggregate(const std::vector<Suggestion>& useful, const AggregateOptions& options)
{
    std::map<std::pair<int, int>, RankedGroup> exact;
    for (const auto& s : useful) {
        if (s.state != SuggestionState::useful || !s.normalized_range || !s.fragment) {
            throw std::invalid_argument("aggregate expects useful suggestions only");
        }
        auto& g = exact[{s.normalized_range->first, s.normalized_range->last}];
        g.canonical_range = *s.normalized_range;
        g.fragment = *s.fragment;
        g.frequency += 1;
        g.names.push_back(s.proposed_name);
        g.members.push_back(s.id);
    }
    std::vector<RankedGroup> groups;
    for (auto& [key, g] : exact) groups.push_back(std::move(g));

    if (options.overlap_jaccard) {
        std::sort(groups.begin(), groups.end(), ranks_before);
        std::vector<RankedGroup> kept;
        for (auto& g : groups) {
            auto anchor = std::find_if(kept.begin(), kept.end(), [&](const RankedGroup& k) {
                return line_jaccard(k.canonical_range, g.canonical_range) >= *options.overlap_jaccard;
            });
            if (anchor == kept.end()) kept.push_back(std::move(g));
            else absorb(*anchor, g);
        }
        groups = std::move(kept);
        std::sort(groups.begin(), groups.end(), by_range);
    }
    for (auto& g : groups) finish(g);
    return groups;
}

std::vector<RankedGroup> rank(std::vector<RankedGroup> groups, int top_n)
{
    if (top_n < 1) throw std::invalid_argument("top_n must be at least 1");
    std::sort(groups.begin(), groups.end(), ranks_before);
    if (groups.size() > static_cast<std::size_t>(top_n)) groups.resize(static_cast<std::size_t>(top_n));
    return groups;
}

}  // namespace xtract
