#include "urbanrl/kv.hpp"

#include <fstream>
#include <sstream>

#include "urbanrl/errors.hpp"
#include "urbanrl/numfmt.hpp"

namespace urbanrl {

KvFile KvFile::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str(), path);
}

KvFile KvFile::from_string(const std::string& text, const std::string& label) {
    KvFile kv;
    kv.label_ = label;
    std::size_t lineno = 0;
    for (std::string_view rest = text; !rest.empty() || lineno == 0;) {
        std::size_t nl = rest.find('\n');
        std::string_view line = (nl == std::string_view::npos) ? rest : rest.substr(0, nl);
        rest = (nl == std::string_view::npos) ? std::string_view{} : rest.substr(nl + 1);
        ++lineno;
        if (std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (nl == std::string_view::npos) break;
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw IoError(label + ":" + std::to_string(lineno) + ": expected key=value");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw IoError(label + ":" + std::to_string(lineno) + ": empty key");
        if (kv.has(key)) throw IoError(label + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.entries_.emplace_back(std::move(key), std::move(value));
        if (nl == std::string_view::npos) break;
    }
    return kv;
}

bool KvFile::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

const std::string& KvFile::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw ConfigError(label_ + ": missing key '" + key + "'");
}

double KvFile::get_double(const std::string& key) const {
    return parse_double(get(key), label_ + " key '" + key + "'");
}

long long KvFile::get_int(const std::string& key) const {
    return parse_int(get(key), label_ + " key '" + key + "'");
}

} // namespace urbanrl
