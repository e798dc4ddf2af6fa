#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

#include "aisoc/corpus.hpp"
#include "aisoc/rng.hpp"

namespace aisoc {
namespace {

void validate_fractions(const SplitSpec& spec) {
    for (const double f : {spec.train, spec.validation, spec.test}) {
        if (!(f >= 0.0 && f <= 1.0)) throw SplitError("split fractions must be in [0,1]");
    }
    if (std::abs(spec.train + spec.validation + spec.test - 1.0) > 1e-9)
        throw SplitError("split fractions must sum to 1");
    if (spec.train <= 0.0 || spec.test <= 0.0)
        throw SplitError("train and test fractions must be positive");
}

void require_nonempty(const IndexSplit& s, const SplitSpec& spec) {
    if (s.train.empty()) throw SplitError("split produced an empty train partition");
    if (s.test.empty()) throw SplitError("split produced an empty test partition");
    if (spec.validation > 0.0 && s.validation.empty())
        throw SplitError("split produced an empty validation partition");
}

std::map<int, std::vector<std::size_t>> group_by_stratum(const std::vector<int>& strata) {
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < strata.size(); ++i) groups[strata[i]].push_back(i);
    return groups;
}

// Largest-remainder apportionment of n items over the given fractions; every
// positive-fraction bucket receives at least one item when n allows it.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& fractions) {
    const std::size_t k = fractions.size();
    std::vector<std::size_t> counts(k, 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < k; ++p) {
        const double exact = fractions[p] * static_cast<double>(n);
        counts[p] = static_cast<std::size_t>(std::floor(exact + 1e-9));
        assigned += counts[p];
        remainders.emplace_back(exact - static_cast<double>(counts[p]), p);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n && i < remainders.size(); ++i) {
        if (fractions[remainders[i].second] <= 0.0) continue;
        ++counts[remainders[i].second];
        ++assigned;
    }
    const auto positive = static_cast<std::size_t>(
        std::count_if(fractions.begin(), fractions.end(), [](double f) { return f > 0.0; }));
    if (n >= positive) {
        for (std::size_t p = 0; p < k; ++p) {
            if (fractions[p] <= 0.0 || counts[p] > 0) continue;
            const auto donor = static_cast<std::size_t>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            --counts[donor];
            ++counts[p];
        }
    }
    return counts;
}

IndexSplit time_ordered(const std::vector<std::int64_t>& ts, const SplitSpec& spec) {
    const std::size_t n = ts.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ts[a] < ts[b]; });

    // Count quantiles on the time-sorted list.
    auto b1 = static_cast<std::size_t>(std::llround(spec.train * static_cast<double>(n)));
    auto b2 = std::min(n, b1 + static_cast<std::size_t>(
                                   std::llround(spec.validation * static_cast<double>(n))));
    b1 = std::min(b1, n);
    // Equal timestamps never straddle a boundary; ties move to the later partition.
    const auto retreat = [&](std::size_t b) {
        while (b > 0 && b < n && ts[order[b - 1]] == ts[order[b]]) --b;
        return b;
    };
    b2 = retreat(b2);
    b1 = retreat(std::min(b1, b2));

    IndexSplit s;
    s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(b1));
    s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(b1),
                        order.begin() + static_cast<std::ptrdiff_t>(b2));
    s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(b2), order.end());
    return s;
}

IndexSplit stratified_random(const std::vector<int>& strata, const SplitSpec& spec) {
    IndexSplit s;
    const std::vector<double> fractions{spec.train, spec.validation, spec.test};
    for (auto& [key, members] : group_by_stratum(strata)) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(key + 2)));
        rng.shuffle(std::span(members));
        const auto counts = apportion(members.size(), fractions);
        const std::array<std::vector<std::size_t>*, 3> parts{&s.train, &s.validation, &s.test};
        auto it = members.begin();
        for (std::size_t p = 0; p < parts.size(); ++p) {
            const auto c = static_cast<std::ptrdiff_t>(counts[p]);
            parts[p]->insert(parts[p]->end(), it, it + c);
            it += c;
        }
    }
    for (auto* part : {&s.train, &s.validation, &s.test}) std::sort(part->begin(), part->end());
    return s;
}

}  // namespace

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& strata,
                                                       std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw SplitError("k-fold split needs at least 2 folds");
    if (strata.size() < folds) throw SplitError("fewer items than folds");
    std::vector<std::vector<std::size_t>> out(folds);
    std::size_t offset = 0;
    for (auto& [key, members] : group_by_stratum(strata)) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(key + 2)));
        rng.shuffle(std::span(members));
        for (std::size_t i = 0; i < members.size(); ++i) out[(offset + i) % folds].push_back(members[i]);
        offset = (offset + members.size()) % folds;
    }
    for (auto& f : out) std::sort(f.begin(), f.end());
    return out;
}

IndexSplit split_indices(const std::vector<int>& strata, const std::vector<std::int64_t>* timestamps,
                         const SplitSpec& spec) {
    if (strata.empty()) throw SplitError("cannot split an empty dataset");
    if (spec.kind == SplitKind::KFold) {
        IndexSplit s;
        s.folds = stratified_folds(strata, spec.folds, spec.seed);
        return s;
    }
    validate_fractions(spec);
    IndexSplit s;
    if (spec.kind == SplitKind::TimeOrdered) {
        if (!timestamps) throw SplitError("time-ordered split requires timestamps");
        s = time_ordered(*timestamps, spec);
    } else {
        s = stratified_random(strata, spec);
    }
    require_nonempty(s, spec);
    return s;
}

namespace {

template <typename T>
DatasetSplit<T> gather(const std::vector<T>& items, const IndexSplit& idx) {
    const auto pick = [&](const std::vector<std::size_t>& ids) {
        std::vector<T> v;
        v.reserve(ids.size());
        for (const auto i : ids) v.push_back(items[i]);
        return v;
    };
    DatasetSplit<T> out;
    out.train = pick(idx.train);
    out.validation = pick(idx.validation);
    out.test = pick(idx.test);
    for (const auto& f : idx.folds) out.folds.push_back(pick(f));
    return out;
}

}  // namespace

DatasetSplit<LogRecord> split(const std::vector<LogRecord>& records, const SplitSpec& spec) {
    std::vector<int> strata;
    std::vector<std::int64_t> ts;
    for (const auto& r : records) {
        strata.push_back(stratum_of(r.label));
        ts.push_back(r.timestamp);
    }
    return gather(records, split_indices(strata, &ts, spec));
}

DatasetSplit<MalwareSample> split(const std::vector<MalwareSample>& samples, const SplitSpec& spec) {
    std::vector<int> strata;
    for (const auto& s : samples) strata.push_back(stratum_of(s.label));
    return gather(samples, split_indices(strata, nullptr, spec));
}

}  // namespace aisoc
