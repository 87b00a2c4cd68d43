#pragma once

#include "ult/config.hpp"
#include "ult/json_io.hpp"

#include <string>
#include <vector>

namespace ult {

inline constexpr const char* run_schema = "ult-run/1";
std::string library_version();

struct csv_table {
    std::string name; // file name without extension
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct run_report {
    json doc;    // deterministic given (config, master seed)
    json timing; // wall clock and the runtime threshold
    std::vector<csv_table> tables;
    std::vector<std::string> threshold_failures;
    bool accepted = true;
};

json to_json(const experiment_config& c);

// Derived seed of run index i.
std::uint64_t run_seed(std::uint64_t master, int index);

// jobs <= 0 keeps the OpenMP default.
run_report run(const experiment_config& cfg, int jobs = 0);

// Writes report.json, timing.json and one CSV per table into dir.
void write_run(const run_report& r, const std::string& dir);

// Structural checks of a report document; returns the problems found.
std::vector<std::string> validate_report(const json& doc);

std::string csv_escape(const std::string& s);

} // namespace ult
