#include "thermosense/materials.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bundled_materials.hpp"

namespace thermosense {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

struct PendingRecord {
    std::size_t line = 0;
    MaterialRecord record;
    bool has_name = false;
    bool has_conductivity = false;
    bool has_effusivity = false;
    bool has_source = false;
};

class Parser {
   public:
    explicit Parser(std::string origin) : origin_(std::move(origin)) {}

    MaterialDb run(std::string_view text) {
        std::size_t line_no = 0;
        while (!text.empty()) {
            const auto eol = text.find('\n');
            const auto raw = text.substr(0, eol);
            text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
            ++line_no;
            handle_line(trim(raw), line_no);
        }
        flush();
        if (records_.empty()) throw MaterialDbError(origin_, line_no, "no [material] blocks");
        // Validates uniqueness and positivity; rethrow with the offending line.
        for (std::size_t i = 0; i < records_.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                if (iequals(records_[i].name, records_[j].name)) {
                    throw MaterialDbError(origin_, lines_[i],
                                          "duplicate material name '" + records_[i].name +
                                              "' (first defined on line " +
                                              std::to_string(lines_[j]) + ")");
                }
            }
        }
        return MaterialDb(std::move(records_));
    }

   private:
    void handle_line(std::string_view line, std::size_t line_no) {
        if (line.empty() || line.front() == '#') return;
        if (line.front() == '[') {
            if (line != "[material]") {
                throw MaterialDbError(origin_, line_no,
                                      "unknown section '" + std::string(line) + "'");
            }
            flush();
            pending_ = PendingRecord{};
            pending_->line = line_no;
            return;
        }
        if (!pending_) {
            throw MaterialDbError(origin_, line_no, "field outside of a [material] block");
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw MaterialDbError(origin_, line_no, "expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        auto& p = *pending_;
        if (key == "name") {
            mark(p.has_name, key, line_no);
            if (value.empty()) throw MaterialDbError(origin_, line_no, "empty material name");
            p.record.name = std::string(value);
        } else if (key == "conductivity") {
            mark(p.has_conductivity, key, line_no);
            p.record.conductivity = parse_positive(value, key, line_no);
        } else if (key == "effusivity") {
            mark(p.has_effusivity, key, line_no);
            p.record.effusivity = parse_positive(value, key, line_no);
        } else if (key == "source") {
            mark(p.has_source, key, line_no);
            p.record.source = std::string(value);
        } else {
            throw MaterialDbError(origin_, line_no, "unknown field '" + std::string(key) + "'");
        }
    }

    void mark(bool& seen, std::string_view key, std::size_t line_no) {
        if (seen) {
            throw MaterialDbError(origin_, line_no, "field '" + std::string(key) + "' repeated");
        }
        seen = true;
    }

    double parse_positive(std::string_view value, std::string_view key, std::size_t line_no) {
        double out = 0.0;
        const auto* first = value.data();
        const auto* last = value.data() + value.size();
        const auto res = std::from_chars(first, last, out);
        if (res.ec != std::errc{} || res.ptr != last) {
            throw MaterialDbError(origin_, line_no,
                                  "field '" + std::string(key) + "': '" + std::string(value) +
                                      "' is not a number");
        }
        if (!std::isfinite(out) || out <= 0.0) {
            throw MaterialDbError(origin_, line_no,
                                  "field '" + std::string(key) + "' must be positive");
        }
        return out;
    }

    void flush() {
        if (!pending_) return;
        const auto& p = *pending_;
        const char* missing = !p.has_name           ? "name"
                              : !p.has_conductivity ? "conductivity"
                              : !p.has_effusivity   ? "effusivity"
                                                    : nullptr;
        if (missing) {
            throw MaterialDbError(origin_, p.line,
                                  std::string("[material] block is missing '") + missing + "'");
        }
        records_.push_back(p.record);
        lines_.push_back(p.line);
        pending_.reset();
    }

    std::string origin_;
    std::optional<PendingRecord> pending_;
    std::vector<MaterialRecord> records_;
    std::vector<std::size_t> lines_;
};

}  // namespace

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

MaterialDbError::MaterialDbError(const std::string& origin, std::size_t line,
                                 const std::string& message)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + message), line_(line) {}

ThermalProps to_thermal_props(const MaterialRecord& record) {
    return ThermalProps::from_conductivity_effusivity(record.conductivity, record.effusivity);
}

MaterialDb::MaterialDb(std::vector<MaterialRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.name.empty()) throw MaterialDbError("<db>", 0, "empty material name");
        if (!(r.conductivity > 0.0) || !std::isfinite(r.conductivity) || !(r.effusivity > 0.0) ||
            !std::isfinite(r.effusivity)) {
            throw MaterialDbError("<db>", 0, "material '" + r.name + "' has non-positive values");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (iequals(r.name, records_[j].name)) {
                throw MaterialDbError("<db>", 0, "duplicate material name '" + r.name + "'");
            }
        }
    }
}

const MaterialRecord* MaterialDb::find(std::string_view name) const {
    const auto it = std::find_if(records_.begin(), records_.end(),
                                 [&](const MaterialRecord& r) { return iequals(r.name, name); });
    return it == records_.end() ? nullptr : &*it;
}

const MaterialRecord& MaterialDb::at(std::string_view name) const {
    if (const auto* r = find(name)) return *r;
    throw std::out_of_range("unknown material '" + std::string(name) + "'");
}

MaterialDb parse_db(std::string_view text, const std::string& origin) {
    return Parser(origin).run(text);
}

MaterialDb load_db(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MaterialDbError(path.string(), 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_db(ss.str(), path.string());
}

std::string format_db(const MaterialDb& db) {
    std::ostringstream out;
    bool first = true;
    for (const auto& r : db.records()) {
        if (!first) out << '\n';
        first = false;
        out << "[material]\n"
            << "name = " << r.name << '\n'
            << "conductivity = " << format_number(r.conductivity) << '\n'
            << "effusivity = " << format_number(r.effusivity) << '\n';
        if (!r.source.empty()) out << "source = " << r.source << '\n';
    }
    return out.str();
}

void write_db(const MaterialDb& db, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MaterialDbError(path.string(), 0, "cannot open file for writing");
    out << format_db(db);
    if (!out) throw MaterialDbError(path.string(), 0, "write failed");
}

std::string_view bundled_db_text() { return detail::kBundledMaterials; }

const MaterialDb& bundled_db() {
    static const MaterialDb db = parse_db(bundled_db_text(), "<bundled materials.db>");
    return db;
}

}  // namespace thermosense
