#include "common.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <limits>

#include "levdyn/errors.hpp"
#include "levdyn/workbench.hpp"

namespace levdyn::cli {

json provenance(const std::string& command, const json& config, std::uint64_t seed) {
    json j;
    j["command"] = command;
    j["version"] = version();
    j["seed"] = seed;
    j["config"] = config;
    return j;
}

void emit(const json& report, const std::string& artifact) {
    const std::string text = report.dump(2);
    std::cout << text << '\n';
    if (artifact.empty()) return;
    std::ofstream side = open_output(artifact + ".json");
    side << text << '\n';
    if (!side) throw IoError("cannot write " + artifact + ".json");
}

std::ofstream open_output(const std::string& path) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

double parse_n(const std::string& text) {
    if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !(v >= 1.0))
        throw DomainError("--n must be a number >= 1 or 'inf', got '" + text + "'");
    return v;
}

std::string format_n(double n) {
    if (std::isinf(n)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", n);
    return buf;
}

std::pair<double, double> parse_range(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw DomainError("range must be 'a,b', got '" + text + "'");
    const double a = std::stod(text.substr(0, comma));
    const double b = std::stod(text.substr(comma + 1));
    if (!(a < b)) throw DomainError("range must satisfy a < b, got '" + text + "'");
    return {a, b};
}

std::pair<int, int> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw DomainError("grid must be 'WxH', got '" + text + "'");
    const int w = std::stoi(text.substr(0, x));
    const int h = std::stoi(text.substr(x + 1));
    if (w < 1 || h < 1) throw DomainError("grid dimensions must be positive");
    return {w, h};
}

std::vector<double> cell_centres(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * (i + 0.5) / count;
    return out;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace levdyn::cli
