#pragma once

#include "stinger/schema.hpp"

namespace stinger {

struct FixtureSpec {
    std::size_t n = 2000;
    double prevalence = 0.06;
    double overlap = 0.5;  // 1: identical class-conditional distributions
    Seed seed = 0;

    void validate() const;
};

/// Synthetic beach observations on the study schema. Continuous features
/// follow class-conditional Gaussians (positive means shifted by
/// (1 - overlap) * 2 SD); wind direction is westerly for absences and
/// northerly for presences, current direction northward for absences and
/// southward for presences; presence months favour summer. Exactly
/// round(prevalence * n) rows are positive.
Dataset generate_fixture(const FixtureSpec& spec);

}  // namespace stinger
