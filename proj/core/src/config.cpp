#include "rcdepth/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include "rcdepth/errors.hpp"
#include "rcdepth/format.hpp"

namespace rcdepth {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end != value.c_str() + value.size() || value.empty() || errno != 0) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + value);
    }
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end != value.c_str() + value.size() || value.empty() || errno != 0) {
        throw ConfigError("config: bad integer value for '" + key + "': " + value);
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad boolean value for '" + key + "': " + value);
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_double(key, trim(item)));
    }
    if (out.empty()) throw ConfigError("config: empty list for '" + key + "'");
    return out;
}

}  // namespace

void apply_config_entry(Config& config, const std::string& key,
                        const std::string& value) {
    if (key == "beta") {
        config.beta = parse_double(key, value);
    } else if (key == "gamma1") {
        config.gamma[0] = parse_double(key, value);
    } else if (key == "gamma2") {
        config.gamma[1] = parse_double(key, value);
    } else if (key == "gamma3") {
        config.gamma[2] = parse_double(key, value);
    } else if (key == "gamma4") {
        config.gamma[3] = parse_double(key, value);
    } else if (key == "detach_u") {
        config.detach_u = parse_bool(key, value);
    } else if (key == "caps") {
        config.caps = parse_double_list(key, value);
    } else if (key == "demo_resolution") {
        config.demo_resolution = parse_u64(key, value);
    } else if (key == "demo_steps") {
        config.demo_steps = parse_u64(key, value);
    } else if (key == "demo_lr") {
        config.demo_lr = parse_double(key, value);
    } else if (key == "demo_seed") {
        config.demo_seed = parse_u64(key, value);
    } else if (key == "demo_train_scenes") {
        config.demo_train_scenes = parse_u64(key, value);
    } else if (key == "demo_eval_scenes") {
        config.demo_eval_scenes = parse_u64(key, value);
    } else if (key == "demo_eval_every") {
        config.demo_eval_every = parse_u64(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

Config load_config_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path.string());
    Config config;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: expected key=value at " + path.string() +
                              ":" + std::to_string(lineno));
        }
        apply_config_entry(config, trim(line.substr(0, eq)),
                           trim(line.substr(eq + 1)));
    }
    return config;
}

void print_config(std::ostream& out, const Config& c) {
    out << "beta=" << format_double(c.beta) << "\n";
    for (int i = 0; i < 4; ++i) {
        out << "gamma" << (i + 1) << "=" << format_double(c.gamma[i]) << "\n";
    }
    out << "detach_u=" << (c.detach_u ? "true" : "false") << "\n";
    out << "caps=";
    for (std::size_t i = 0; i < c.caps.size(); ++i) {
        if (i) out << ",";
        out << format_double(c.caps[i]);
    }
    out << "\n";
    out << "demo_resolution=" << c.demo_resolution << "\n";
    out << "demo_steps=" << c.demo_steps << "\n";
    out << "demo_lr=" << format_double(c.demo_lr) << "\n";
    out << "demo_seed=" << c.demo_seed << "\n";
    out << "demo_train_scenes=" << c.demo_train_scenes << "\n";
    out << "demo_eval_scenes=" << c.demo_eval_scenes << "\n";
    out << "demo_eval_every=" << c.demo_eval_every << "\n";
}

}  // namespace rcdepth
