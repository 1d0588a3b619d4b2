#include "shapekrrc/data_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace shapekrrc {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_line(const std::string& line, char delimiter) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, delimiter)) fields.push_back(field);
    if (!line.empty() && line.back() == delimiter) fields.emplace_back();
    return fields;
}

double parse_double(const std::string& tok, std::size_t line) {
    double value = 0.0;
    const char* begin = tok.data();
    const char* end = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError("line " + std::to_string(line) + ": bad number '" + tok + "'", line);
    }
    if (!std::isfinite(value)) {
        throw ParseError("line " + std::to_string(line) + ": non-finite coordinate '" + tok + "'",
                         line);
    }
    return value;
}

int parse_label(const std::string& tok, std::size_t line) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || value < 0) {
        throw ParseError(
            "line " + std::to_string(line) + ": label must be a non-negative integer, got '" +
                tok + "'",
            line);
    }
    return value;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

LabeledPreshapes LandmarkDataset::to_preshapes() const {
    LabeledPreshapes out;
    out.shapes.reserve(records.size());
    out.labels.reserve(records.size());
    out.ids.reserve(records.size());
    for (const LandmarkConfig& record : records) {
        if (!record.label) {
            throw InvalidInput("record '" + record.id + "' has no label");
        }
        out.shapes.push_back(to_preshape(record));
        out.labels.push_back(*record.label);
        out.ids.push_back(record.id);
    }
    return out;
}

LandmarkDataset load_landmark_csv(const std::string& path, const CsvReadOptions& options) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);

    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty", 0);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_line(line, options.delimiter);
    if (header.size() < 2 + 2 * 3 || header[0] != "id" || header[1] != "label" ||
        (header.size() - 2) % 2 != 0) {
        throw ParseError("line 1: expected header id,label,x1,y1,...,xk,yk with k >= 3", 1);
    }
    const int k = static_cast<int>((header.size() - 2) / 2);

    LandmarkDataset dataset;
    dataset.k = k;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line, options.delimiter);
        if (fields.size() < 2 || (fields.size() - 2) % 2 != 0) {
            throw ParseError("line " + std::to_string(line_no) + ": malformed row", line_no);
        }
        const int row_k = static_cast<int>((fields.size() - 2) / 2);
        if (row_k != k) {
            throw InconsistentLandmarkCount(
                "line " + std::to_string(line_no) + ": expected " + std::to_string(k) +
                    " landmarks, got " + std::to_string(row_k),
                line_no);
        }

        LandmarkConfig record;
        record.id = fields[0];
        record.label = parse_label(fields[1], line_no);
        record.points.resize(k);
        for (int j = 0; j < k; ++j) {
            record.points[j] = Complex(parse_double(fields[2 + 2 * j], line_no),
                                       parse_double(fields[3 + 2 * j], line_no));
        }

        if (options.class_names && !options.class_names->count(*record.label)) {
            throw UnknownLabel("line " + std::to_string(line_no) + ": label " +
                               std::to_string(*record.label) + " is not in the class map");
        }
        dataset.records.push_back(std::move(record));
    }

    if (options.class_names) {
        dataset.class_names = *options.class_names;
    } else {
        for (const LandmarkConfig& r : dataset.records) {
            dataset.class_names.emplace(*r.label, "class" + std::to_string(*r.label));
        }
    }
    return dataset;
}

void save_landmark_csv(const LandmarkDataset& dataset, const std::string& path) {
    for (const LandmarkConfig& r : dataset.records) {
        if (r.landmark_count() != dataset.k) {
            throw InvalidInput("record '" + r.id + "' has " +
                               std::to_string(r.landmark_count()) + " landmarks, dataset says " +
                               std::to_string(dataset.k));
        }
    }
    std::string out;
    out += "id,label";
    for (int j = 1; j <= dataset.k; ++j) {
        out += ",x" + std::to_string(j) + ",y" + std::to_string(j);
    }
    out += '\n';
    for (const LandmarkConfig& r : dataset.records) {
        out += r.id;
        out += ',';
        out += r.label ? std::to_string(*r.label) : std::string("0");
        for (int j = 0; j < dataset.k; ++j) {
            out += ',';
            out += format_double(r.points[j].real());
            out += ',';
            out += format_double(r.points[j].imag());
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::map<int, std::string> load_class_names(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("'" + path + "' is not valid JSON: " + e.what(), 0);
    }
    if (!doc.is_object()) throw ParseError("'" + path + "' must be a JSON object", 0);

    std::map<int, std::string> names;
    for (const auto& [key, value] : doc.items()) {
        int label = 0;
        const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), label);
        if (ec != std::errc{} || ptr != key.data() + key.size() || label < 0) {
            throw ParseError("class map key '" + key + "' is not a non-negative integer", 0);
        }
        names[label] = value.get<std::string>();
    }
    return names;
}

void save_class_names(const std::map<int, std::string>& names, const std::string& path) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [label, name] : names) doc[std::to_string(label)] = name;
    write_file_atomic(path, doc.dump(2) + "\n");
}

LandmarkDataset generate_synthetic(const std::vector<Preshape>& templates, int per_class,
                                   double noise_sd, std::uint64_t seed) {
    if (templates.empty()) throw InvalidInput("need at least one template");
    if (!(noise_sd > 0.0)) throw InvalidInput("noise_sd must be positive");
    if (per_class < 0) throw InvalidInput("per_class must be >= 0");
    const int k = templates.front().landmark_count();
    for (std::size_t i = 0; i < templates.size(); ++i) {
        if (templates[i].landmark_count() != k) {
            throw InvalidInput("templates must share the landmark count");
        }
        for (std::size_t j = i + 1; j < templates.size(); ++j) {
            if (extrinsic_dist_sq(templates[i], templates[j]) < 1e-20) {
                throw InvalidInput("templates must be distinct shapes");
            }
        }
    }

    LandmarkDataset dataset;
    dataset.k = k;
    Rng rng(seed);
    for (std::size_t c = 0; c < templates.size(); ++c) {
        dataset.class_names.emplace(static_cast<int>(c), "class" + std::to_string(c));
        for (int s = 0; s < per_class; ++s) {
            LandmarkConfig record;
            record.label = static_cast<int>(c);
            record.id = "synth-" + std::to_string(c) + "-" + std::to_string(s);
            record.points = templates[c].coords();
            for (int j = 0; j < k; ++j) {
                record.points[j] += Complex(noise_sd * gaussian(rng), noise_sd * gaussian(rng));
            }
            dataset.records.push_back(std::move(record));
        }
    }
    return dataset;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out.flush()) throw IoError("failed writing '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace shapekrrc
