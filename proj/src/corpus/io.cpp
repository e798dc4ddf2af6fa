#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "aisoc/corpus.hpp"

namespace aisoc {
namespace {

bool is_blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

LogRecord parse_log_object(const nlohmann::json& j) {
    static const std::set<std::string> kFields{"timestamp", "host", "channel", "message", "label", "origin"};
    if (!j.is_object()) throw LoadError("line is not a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!kFields.contains(key)) throw LoadError("unknown field '" + key + "'");
    }
    LogRecord r;
    const auto& ts = j.at("timestamp");
    if (!ts.is_number_integer()) throw LoadError("timestamp must be an integer");
    r.timestamp = ts.get<std::int64_t>();
    if (r.timestamp < 0) throw LoadError("timestamp must be non-negative");
    if (!j.at("host").is_string()) throw LoadError("host must be a string");
    r.host = j["host"].get<std::string>();
    if (!j.at("channel").is_string()) throw LoadError("channel must be a string");
    const auto channel = parse_channel(j["channel"].get<std::string>());
    if (!channel) throw LoadError("unknown channel");
    r.channel = *channel;
    if (!j.at("message").is_string()) throw LoadError("message must be a string");
    r.message = j["message"].get<std::string>();
    if (const auto it = j.find("label"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) throw LoadError("label must be a string");
        const auto s = it->get<std::string>();
        if (s != "BENIGN" && s != "MALICIOUS") throw LoadError("unknown label '" + s + "'");
        r.label = parse_label(s);
    }
    r.origin = Origin::Loaded;
    if (const auto it = j.find("origin"); it != j.end() && !it->is_null()) {
        const auto origin = it->is_string() ? parse_origin(it->get<std::string>()) : std::nullopt;
        if (!origin) throw LoadError("unknown origin");
        r.origin = *origin;
    }
    if (r.label && is_blank(r.message)) throw LoadError("labeled record has an empty message");
    return r;
}

}  // namespace

LogLoadResult parse_log_ndjson(std::istream& in) {
    LogLoadResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) continue;
        try {
            result.records.push_back(parse_log_object(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            ++result.skipped;
            result.issues.push_back({line_no, e.what()});
        } catch (const LoadError& e) {
            ++result.skipped;
            result.issues.push_back({line_no, e.what()});
        }
    }
    return result;
}

LogLoadResult load_log_ndjson(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    return parse_log_ndjson(in);
}

std::string log_record_to_json_line(const LogRecord& r) {
    nlohmann::ordered_json j;
    j["timestamp"] = r.timestamp;
    j["host"] = r.host;
    j["channel"] = to_string(r.channel);
    j["message"] = r.message;
    if (r.label) j["label"] = to_string(*r.label);
    j["origin"] = to_string(r.origin);
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_log_ndjson(std::ostream& out, const std::vector<LogRecord>& records) {
    for (const auto& r : records) out << log_record_to_json_line(r) << '\n';
}

void write_log_ndjson(const std::filesystem::path& path, const std::vector<LogRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path.string());
    write_log_ndjson(out, records);
}

// ---------------------------------------------------------------------------
// CSV

bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
    fields.clear();
    if (in.peek() == std::char_traits<char>::eof()) return false;
    ++line_no;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (;;) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) {
            if (quoted) throw LoadError("unterminated quoted field", line_no);
            if (any || !field.empty() || !fields.empty()) fields.push_back(std::move(field));
            return true;
        }
        any = true;
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_no;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && field.empty()) {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (ch == '\r' && in.peek() == '\n') {
            continue;
        } else if (ch == '\n') {
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(ch);
        }
    }
}

namespace {

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
    return v;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

MalwareLoadResult parse_malware_csv(std::istream& in, const std::string& label_column,
                                    const std::optional<std::string>& id_column) {
    MalwareLoadResult result;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    if (!read_csv_record(in, header, line_no)) throw LoadError("CSV has no header row", 1);

    std::optional<std::size_t> label_idx;
    std::optional<std::size_t> id_idx;
    std::vector<std::size_t> feature_idx;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == label_column) {
            label_idx = c;
        } else if (id_column && header[c] == *id_column) {
            id_idx = c;
        } else {
            feature_idx.push_back(c);
            result.feature_names.push_back(header[c]);
        }
    }
    if (!label_idx) throw LoadError("missing label column '" + label_column + "'", 1);
    if (id_column && !id_idx) throw LoadError("missing id column '" + *id_column + "'", 1);
    if (feature_idx.empty()) throw LoadError("CSV has no feature columns", 1);

    std::vector<std::string> row;
    for (;;) {
        const std::size_t row_line = line_no + 1;
        if (!read_csv_record(in, row, line_no)) break;
        if (row.size() == 1 && is_blank(row[0])) continue;
        if (row.size() != header.size()) {
            throw LoadError("expected " + std::to_string(header.size()) + " columns, found " +
                                std::to_string(row.size()),
                            row_line);
        }
        MalwareSample s;
        s.sample_id = id_idx ? row[*id_idx] : "row-" + std::to_string(row_line);
        const auto& label_text = row[*label_idx];
        if (!label_text.empty()) {
            s.label = parse_label(label_text);
            if (!s.label) {
                ++result.rejected;
                result.issues.push_back({row_line, "unknown label '" + label_text + "'"});
                continue;
            }
        }
        bool ok = true;
        for (const auto c : feature_idx) {
            const auto v = parse_number(row[c]);
            if (!v || !std::isfinite(*v)) {
                ok = false;
                result.issues.push_back({row_line, "non-finite or invalid value in column '" + header[c] + "'"});
                break;
            }
            s.features.push_back(*v);
        }
        if (!ok) {
            ++result.rejected;
            continue;
        }
        result.samples.push_back(std::move(s));
    }
    return result;
}

MalwareLoadResult load_malware_csv(const std::filesystem::path& path, const std::string& label_column,
                                   const std::optional<std::string>& id_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path.string());
    return parse_malware_csv(in, label_column, id_column);
}

void write_malware_csv(std::ostream& out, const std::vector<MalwareSample>& samples,
                       const std::vector<std::string>& feature_names) {
    out << "sample_id";
    for (const auto& n : feature_names) out << ',' << csv_escape(n);
    out << ",label\n";
    char buf[40];
    for (const auto& s : samples) {
        if (s.features.size() != feature_names.size())
            throw DimensionError("sample " + s.sample_id + " has the wrong feature count");
        out << csv_escape(s.sample_id);
        for (const double v : s.features) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << ',' << (s.label ? to_string(*s.label) : std::string_view{}) << '\n';
    }
}

void write_malware_csv(const std::filesystem::path& path, const std::vector<MalwareSample>& samples,
                       const std::vector<std::string>& feature_names) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path.string());
    write_malware_csv(out, samples, feature_names);
}

}  // namespace aisoc
