#include "microdispatch/io_util.hpp"

#include "microdispatch/errors.hpp"
#include "microdispatch/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <thread>
#include <fstream>
#include <sstream>

namespace microdispatch::io {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        throw Error("cannot format number");
    }
    return std::string(buf, end);
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace

double parse_double(std::string_view text, const std::string& context) {
    text = trim(text);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(context + ": not a number: '" + std::string(text) + "'");
    }
    return v;
}

long long parse_int(std::string_view text, const std::string& context) {
    text = trim(text);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(context + ": not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n\r") == std::string_view::npos) {
        return std::string(text);
    }
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"') {
            out.push_back('"');
        }
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

std::vector<double> read_profile_csv(const std::filesystem::path& path, int steps) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || trim(line) != "hour,value") {
        throw ParseError(path.string() + ": expected header 'hour,value'");
    }
    std::vector<double> values(static_cast<std::size_t>(steps), 0.0);
    std::vector<bool> seen(values.size(), false);
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        const std::string ctx = path.string() + ":" + std::to_string(row);
        if (fields.size() != 2) {
            throw ParseError(ctx + ": expected 2 columns");
        }
        const long long hour = parse_int(fields[0], ctx);
        if (hour < 0 || hour >= steps || seen[static_cast<std::size_t>(hour)]) {
            throw ParseError(ctx + ": hour out of range or repeated");
        }
        seen[static_cast<std::size_t>(hour)] = true;
        values[static_cast<std::size_t>(hour)] = parse_double(fields[1], ctx);
    }
    for (std::size_t h = 0; h < seen.size(); ++h) {
        if (!seen[h]) {
            throw ParseError(path.string() + ": missing hour " + std::to_string(h));
        }
    }
    return values;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    auto splitmix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

}  // namespace microdispatch::io

namespace microdispatch {

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("MICRODISPATCH_THREADS")) {
        try {
            const long long v = io::parse_int(env, "MICRODISPATCH_THREADS");
            if (v > 0) {
                return static_cast<int>(v);
            }
        } catch (const ParseError&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace microdispatch
