#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace spinloc {

struct UnknownSuite : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SuiteResult {
    std::string name;
    bool pass = false;
    nlohmann::json details;
};

// Names in criterion order.
std::vector<std::string> suite_names();

// Runs one named verification suite; throws UnknownSuite for a bad name.
SuiteResult run_suite(const std::string& name);

} // namespace spinloc
