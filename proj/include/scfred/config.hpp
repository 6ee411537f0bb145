#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scfred {

/// Plain-text configuration: `[section]` headers, `key = value` lines,
/// `#` comments. Values are stored verbatim and converted on access.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long get_int(const std::string& section, const std::string& key) const;
    long get_int(const std::string& section, const std::string& key, long fallback) const;
    std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

    /// Deterministic canonical dump (sections and keys sorted) used for hashing.
    std::string canonical() const;

    /// FNV-1a hash of the canonical form, printed as hex.
    std::string hash() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::map<std::string, std::map<std::string, Entry>> sections_;

    const Entry& lookup(const std::string& section, const std::string& key) const;
};

/// FNV-1a 64-bit hash of a byte string, hex encoded.
std::string fnv1a_hex(const std::string& data);

}  // namespace scfred
