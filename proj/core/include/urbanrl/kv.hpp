#pragma once

#include <string>
#include <utility>
#include <vector>

namespace urbanrl {

// Flat key=value text files: one pair per line, '#' starts a comment,
// blank lines ignored. Used for building parameters, reward/episode
// settings and agent hyperparameters.
class KvFile {
public:
    static KvFile from_file(const std::string& path);
    static KvFile from_string(const std::string& text, const std::string& label);

    /// Entries in file order. Duplicate keys are rejected at parse time.
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    const std::string& label() const { return label_; }

    bool has(const std::string& key) const;
    /// Throws ConfigError naming the key when absent.
    const std::string& get(const std::string& key) const;

    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::string label_;
};

} // namespace urbanrl
