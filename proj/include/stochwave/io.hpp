#pragma once
/**
 * @file io.hpp
 * @brief CSV and key=value writers. Every file starts with the config hash;
 *        numbers are written with 17 significant digits so output is exact and
 *        byte-stable.
 */

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochwave {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& config_hash, const std::vector<std::string>& header)
        : path_(path), out_(path) {
        if (!out_) throw std::runtime_error("cannot write '" + path + "'");
        out_ << "# config_hash=" << config_hash << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
        out_ << '\n';
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
        out_ << '\n';
    }

    ~CsvWriter() noexcept(false) {
        out_.flush();
        if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("write failed for '" + path_ + "'");
    }

private:
    std::string path_;
    std::ofstream out_;
};

/// Flat key=value file; keys in sorted order, config_hash first.
inline void write_key_values(const std::string& path, const std::string& config_hash,
                             const std::map<std::string, std::string>& kv) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "config_hash=" << config_hash << '\n';
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline void write_text(const std::string& path, const std::string& header_line, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << header_line << '\n' << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace stochwave
