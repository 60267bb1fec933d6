#include "wheatsim/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "wheatsim/csv.hpp"
#include "wheatsim/error.hpp"

namespace wheatsim {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
    throw Error(ErrorCode::parse, origin + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

const std::string& KeyValueFile::Section::get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) {
        throw Error(ErrorCode::validation, origin + ": section [" + (name.empty() ? "<root>" : name) +
                                               "] is missing key '" + key + "'");
    }
    return it->second;
}

std::string KeyValueFile::Section::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double KeyValueFile::Section::number(const std::string& key) const {
    const auto& v = get(key);
    try {
        return csv::parse_double(v, lines.at(key), key);
    } catch (const Error& e) {
        throw Error(ErrorCode::parse, origin + ": " + e.what());
    }
}

double KeyValueFile::Section::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

long long KeyValueFile::Section::integer(const std::string& key) const {
    const auto& v = get(key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        fail(origin, lines.at(key), "key '" + key + "' is not an integer: '" + v + "'");
    }
    return out;
}

long long KeyValueFile::Section::integer_or(const std::string& key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::vector<std::string> KeyValueFile::Section::list(const std::string& key) const {
    std::vector<std::string> out;
    for (auto& item : csv::split(get(key))) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
    KeyValueFile file;
    file.origin_ = origin;
    file.sections_.push_back({});
    file.sections_.back().origin = origin;
    std::istringstream in(text);
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, number, "unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) fail(origin, number, "empty section name");
            if (file.find(name)) fail(origin, number, "duplicate section [" + name + "]");
            file.sections_.push_back({name, origin, number, {}, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, number, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) fail(origin, number, "empty key");
        auto& sec = file.sections_.back();
        if (sec.has(key)) fail(origin, number, "duplicate key '" + key + "'");
        sec.values[key] = trim(line.substr(eq + 1));
        sec.lines[key] = number;
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

const KeyValueFile::Section* KeyValueFile::find(const std::string& name) const {
    for (const auto& s : sections_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

const KeyValueFile::Section& KeyValueFile::section(const std::string& name) const {
    if (const auto* s = find(name)) return *s;
    throw Error(ErrorCode::validation, origin_ + ": missing section [" + name + "]");
}

std::vector<const KeyValueFile::Section*> KeyValueFile::with_prefix(const std::string& prefix) const {
    std::vector<const Section*> out;
    for (const auto& s : sections_) {
        if (s.name.size() > prefix.size() + 1 && s.name.compare(0, prefix.size(), prefix) == 0 &&
            s.name[prefix.size()] == '.') {
            out.push_back(&s);
        }
    }
    return out;
}

}  // namespace wheatsim
