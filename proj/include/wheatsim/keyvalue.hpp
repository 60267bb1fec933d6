#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace wheatsim {

/// A parsed key-value text file:
///
///     # comment
///     top_level_key = value
///     [section.name]
///     key = value
///
/// Sections keep their file order, keys are unique within a section.
class KeyValueFile {
  public:
    struct Section {
        std::string name;
        std::string origin;
        std::size_t line = 0;
        std::map<std::string, std::string> values;
        std::map<std::string, std::size_t> lines;

        bool has(const std::string& key) const { return values.count(key) != 0; }
        const std::string& get(const std::string& key) const;
        std::string get_or(const std::string& key, const std::string& fallback) const;
        double number(const std::string& key) const;
        double number_or(const std::string& key, double fallback) const;
        long long integer(const std::string& key) const;
        long long integer_or(const std::string& key, long long fallback) const;
        std::vector<std::string> list(const std::string& key) const;
    };

    static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
    static KeyValueFile load(const std::filesystem::path& path);

    const Section& root() const { return sections_.front(); }
    const Section* find(const std::string& name) const;
    const Section& section(const std::string& name) const;
    /// All sections whose name starts with `prefix` followed by '.'.
    std::vector<const Section*> with_prefix(const std::string& prefix) const;
    const std::string& origin() const { return origin_; }

  private:
    std::vector<Section> sections_;
    std::string origin_;
};

}  // namespace wheatsim
