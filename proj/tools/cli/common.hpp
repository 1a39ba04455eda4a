#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

namespace levdyn::cli {

using json = nlohmann::ordered_json;

/// Report skeleton shared by all commands: command name, library version,
/// master seed and the full configuration.
json provenance(const std::string& command, const json& config, std::uint64_t seed);

/// Prints the report to stdout; when `artifact` is set, also writes it next to
/// the artifact as `<artifact>.json`.
void emit(const json& report, const std::string& artifact = {});

/// Opens a file for writing, creating parent directories; IoError on failure.
std::ofstream open_output(const std::string& path);

/// "inf" (or "infinity") or a number >= 1.
double parse_n(const std::string& text);
std::string format_n(double n);
/// "a,b" with a < b.
std::pair<double, double> parse_range(const std::string& text);
/// "WxH".
std::pair<int, int> parse_grid(const std::string& text);

/// Cell centres of `count` equal cells over [lo, hi].
std::vector<double> cell_centres(double lo, double hi, int count);

/// JSON number or null for non-finite values.
json number(double v);

void add_model_commands(CLI::App& app);
void add_data_commands(CLI::App& app);

}  // namespace levdyn::cli
