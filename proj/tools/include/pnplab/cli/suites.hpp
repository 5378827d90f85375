#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pnplab/cli/pipeline.hpp"

namespace pnp::cli {

struct Criterion {
    std::string id;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<Criterion> criteria;

    bool passed() const;
    const Criterion& at(const std::string& id) const;
};

struct SuiteOptions {
    /// Sampling seeds become {seed, seed + 1, seed + 2}.
    std::optional<std::uint64_t> seed;
    /// Replaces K of the treatment plan (toy-sine, mode-seek, jitter only).
    std::optional<std::size_t> iterations;
};

const std::vector<std::string>& suite_names();
std::string suite_description(const std::string& name);

/// Trains or loads what the suite needs, writes its artifacts under ctx.out and checks its criteria.
SuiteReport run_suite(const std::string& name, const SuiteOptions& opts, const Context& ctx);

inline constexpr std::string_view kCriteriaSchema = "# schema: pnplab.criteria.v1";
inline constexpr std::string_view kChainSchema = "# schema: pnplab.chain.v1";

std::string criteria_csv(const SuiteReport& report);
std::string criteria_table(const SuiteReport& report);

}  // namespace pnp::cli
