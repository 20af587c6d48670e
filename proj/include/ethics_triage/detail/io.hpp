#ifndef ETHICS_TRIAGE_DETAIL_IO_HPP
#define ETHICS_TRIAGE_DETAIL_IO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "../error.hpp"

namespace ethics_triage::detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestError(path.string(), "cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IngestError(path.string(), "read failed");
    }
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IngestError(path.string(), "cannot open file for writing");
    }
    out << content;
    if (!out) {
        throw IngestError(path.string(), "write failed");
    }
}

/// Parses JSON, converting nlohmann's byte offset into a line/column pair and
/// quoting the offending line.
inline nlohmann::json parse_json(std::string_view text, std::string_view origin = {}) {
    try {
        return nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
        if (offset > text.size()) {
            offset = text.size();
        }
        std::size_t line = 1;
        std::size_t line_start = 0;
        for (std::size_t i = 0; i < offset; ++i) {
            if (text[i] == '\n') {
                ++line;
                line_start = i + 1;
            }
        }
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) {
            line_end = text.size();
        }
        std::string message = "malformed JSON";
        if (!origin.empty()) {
            message += " in " + std::string(origin);
        }
        message += " near `" + std::string(text.substr(line_start, line_end - line_start)) + "`";
        throw ParseError(message, line, offset - line_start + 1);
    }
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::string to_hex(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

} // namespace ethics_triage::detail

#endif
