#include "boxres/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "boxres/error.hpp"

namespace boxres {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

std::string where(int line, std::string_view key) {
    std::ostringstream msg;
    msg << "line " << line << ": " << key;
    return msg.str();
}

std::string interval(double lo, double hi, bool lo_open = false) {
    std::ostringstream msg;
    msg << (lo_open ? "(" : "[") << lo << ", " << hi << "]";
    return msg.str();
}

double parse_double(std::string_view text, int line, std::string_view key) {
    double value = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ConfigError(where(line, key) + ": expected a number, got '" + std::string(text) + "'");
    }
    return value;
}

int parse_int(std::string_view text, int line, std::string_view key) {
    int value = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw ConfigError(where(line, key) + ": expected an integer, got '" + std::string(text) +
                          "'");
    }
    return value;
}

void check_range(double value, double lo, double hi, int line, std::string_view key,
                 bool lo_open = false) {
    const bool above = lo_open ? value > lo : value >= lo;
    if (!above || value > hi) {
        std::ostringstream msg;
        msg << where(line, key) << " = " << value << " is outside the permitted interval "
            << interval(lo, hi, lo_open);
        throw ConfigError(msg.str());
    }
}

} // namespace

std::string_view to_string(RunMode mode) {
    switch (mode) {
    case RunMode::stabilize:
        return "stabilize";
    case RunMode::oracle:
        return "oracle";
    case RunMode::both:
        return "both";
    }
    return "?";
}

RunMode parse_mode(std::string_view text) {
    if (text == "stabilize") {
        return RunMode::stabilize;
    }
    if (text == "oracle") {
        return RunMode::oracle;
    }
    if (text == "both") {
        return RunMode::both;
    }
    throw ConfigError("mode must be one of stabilize, oracle, both; got '" + std::string(text) +
                      "'");
}

RunConfig validate_config(std::string_view raw) {
    RunConfig cfg;
    using Handler = std::function<void(std::string_view, int)>;
    const std::map<std::string_view, Handler> handlers{
        {"v0",
         [&](std::string_view v, int line) {
             cfg.potential.v0 = parse_double(v, line, "v0");
             check_range(cfg.potential.v0, -1000.0, 1000.0, line, "v0");
         }},
        {"z",
         [&](std::string_view v, int line) {
             cfg.potential.z = parse_double(v, line, "z");
             check_range(cfg.potential.z, -100.0, 100.0, line, "z");
         }},
        {"l",
         [&](std::string_view v, int line) {
             cfg.partial_waves.clear();
             std::set<int> seen;
             for (std::string_view item : split(v, ',')) {
                 const int l = parse_int(item, line, "l");
                 check_range(l, 0, 20, line, "l");
                 if (!seen.insert(l).second) {
                     throw ConfigError(where(line, "l") + ": partial wave " + std::to_string(l) +
                                       " listed twice");
                 }
                 cfg.partial_waves.push_back(l);
             }
         }},
        {"r_min",
         [&](std::string_view v, int line) {
             cfg.r_range.min = parse_double(v, line, "r_min");
             check_range(cfg.r_range.min, 2.0, 40.0, line, "r_min");
         }},
        {"r_max",
         [&](std::string_view v, int line) {
             cfg.r_range.max = parse_double(v, line, "r_max");
             check_range(cfg.r_range.max, 2.0, 40.0, line, "r_max");
         }},
        {"r_scan_step",
         [&](std::string_view v, int line) {
             cfg.r_scan_step = parse_double(v, line, "r_scan_step");
             check_range(cfg.r_scan_step, 1e-3, 1.0, line, "r_scan_step");
         }},
        {"dr",
         [&](std::string_view v, int line) {
             cfg.dr = parse_double(v, line, "dr");
             check_range(cfg.dr, 1e-5, 1e-3, line, "dr");
         }},
        {"e_max",
         [&](std::string_view v, int line) {
             cfg.e_max = parse_double(v, line, "e_max");
             check_range(cfg.e_max, 0.0, 100.0, line, "e_max", true);
         }},
        {"outputs",
         [&](std::string_view v, int line) {
             if (v.empty()) {
                 throw ConfigError(where(line, "outputs") + ": directory must not be empty");
             }
             cfg.outputs = std::string(v);
         }},
        {"mode",
         [&](std::string_view v, int line) {
             try {
                 cfg.mode = parse_mode(v);
             } catch (const ConfigError& e) {
                 throw ConfigError(where(line, "mode") + ": " + e.what());
             }
         }},
        {"match_radius",
         [&](std::string_view v, int line) {
             cfg.match_radius = parse_double(v, line, "match_radius");
             check_range(cfg.match_radius, 10.0, 1000.0, line, "match_radius");
         }},
        {"oracle_points",
         [&](std::string_view v, int line) {
             cfg.oracle_points = parse_int(v, line, "oracle_points");
             check_range(cfg.oracle_points, 7, 100000, line, "oracle_points");
         }},
        {"oracle_windows",
         [&](std::string_view v, int line) {
             cfg.oracle_windows.clear();
             for (std::string_view item : split(v, ',')) {
                 const auto fields = split(item, ':');
                 if (fields.size() != 3) {
                     throw ConfigError(where(line, "oracle_windows") +
                                       ": expected l:lo:hi, got '" + std::string(item) + "'");
                 }
                 OracleWindow w;
                 w.l = parse_int(fields[0], line, "oracle_windows");
                 check_range(w.l, 0, 20, line, "oracle_windows l");
                 w.lo = parse_double(fields[1], line, "oracle_windows");
                 w.hi = parse_double(fields[2], line, "oracle_windows");
                 check_range(w.lo, 0.0, 100.0, line, "oracle_windows lo", true);
                 check_range(w.hi, w.lo, 100.0, line, "oracle_windows hi", true);
                 cfg.oracle_windows.push_back(w);
             }
         }},
        {"wf_stride",
         [&](std::string_view v, int line) {
             cfg.wf_stride = parse_int(v, line, "wf_stride");
             check_range(cfg.wf_stride, 1, 100000, line, "wf_stride");
         }},
    };

    std::set<std::string, std::less<>> seen;
    int line_no = 0;
    int r_line = 0;
    std::size_t start = 0;
    while (start <= raw.size()) {
        const auto end = raw.find('\n', start);
        std::string_view line = raw.substr(start, end == std::string_view::npos ? end : end - start);
        start = end == std::string_view::npos ? raw.size() + 1 : end + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                              std::string(line) + "'");
        }
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        const auto it = handlers.find(key);
        if (it == handlers.end()) {
            throw ConfigError(where(line_no, key) + ": unknown key");
        }
        if (!seen.emplace(key).second) {
            throw ConfigError(where(line_no, key) + ": key given twice");
        }
        it->second(value, line_no);
        if (key == "r_min" || key == "r_max") {
            r_line = line_no;
        }
    }

    if (!(cfg.r_range.min < cfg.r_range.max)) {
        throw ConfigError(where(r_line, "r_min/r_max") + ": r_min must be smaller than r_max");
    }
    if (cfg.partial_waves.empty()) {
        throw ConfigError("no partial waves given");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return validate_config(text.str());
}

} // namespace boxres
