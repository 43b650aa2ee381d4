#include <algorithm>
#include <numeric>
#include <random>

#include "stinger/augment.hpp"
#include "stinger/error.hpp"

namespace stinger {

UndersampleResult random_undersample_detailed(const Dataset& train, Seed seed) {
    const auto n1 = train.count(1), n0 = train.count(0);
    if (n1 == 0 || n0 == 0) throw StrategyError("undersampling needs both classes in the training data");
    const int majority = n1 > n0 ? 1 : 0;
    const auto keep = std::min(n1, n0);

    std::vector<std::size_t> minority_rows, majority_rows;
    for (std::size_t i = 0; i < train.size(); ++i)
        (train.labels()[i] == majority ? majority_rows : minority_rows).push_back(i);

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> chosen;
    std::sample(majority_rows.begin(), majority_rows.end(), std::back_inserter(chosen), keep, rng);

    UndersampleResult out;
    out.source_rows = minority_rows;
    out.source_rows.insert(out.source_rows.end(), chosen.begin(), chosen.end());
    std::shuffle(out.source_rows.begin(), out.source_rows.end(), rng);
    out.data = train.subset(out.source_rows);
    return out;
}

Dataset random_undersample(const Dataset& train, Seed seed) {
    return random_undersample_detailed(train, seed).data;
}

}  // namespace stinger
