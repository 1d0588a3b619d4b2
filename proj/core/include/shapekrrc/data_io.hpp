#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapekrrc/shape.hpp"

namespace shapekrrc {

// A loaded landmark table: records sharing one landmark count, each with a
// non-negative integer label, plus label -> display-name mapping.
struct LandmarkDataset {
    std::vector<LandmarkConfig> records;
    int k = 0;
    std::map<int, std::string> class_names;

    std::size_t size() const { return records.size(); }

    // Normalizes every record. Throws if any record is degenerate or unlabeled.
    LabeledPreshapes to_preshapes() const;
};

struct CsvReadOptions {
    char delimiter = ',';
    // When set, every label in the file must appear here (UnknownLabel
    // otherwise) and the mapping is copied into the dataset.
    std::optional<std::map<int, std::string>> class_names;
};

// Reads the canonical CSV: header `id,label,x1,y1,...,xk,yk`, UTF-8, decimal
// point, no thousands separators. Throws ParseError (with line number),
// InconsistentLandmarkCount, UnknownLabel.
LandmarkDataset load_landmark_csv(const std::string& path, const CsvReadOptions& options = {});

// Writes the canonical CSV with full double precision. Atomic: the content
// goes to a temp file in the same directory, then renames over the target.
void save_landmark_csv(const LandmarkDataset& dataset, const std::string& path);

// Sidecar `classes.json`: an object mapping label (as string key) -> name.
std::map<int, std::string> load_class_names(const std::string& path);
void save_class_names(const std::map<int, std::string>& names, const std::string& path);

// One template per class; each sample is the template plus i.i.d. complex
// Gaussian noise per landmark (sd = noise_sd per real component), left
// un-normalized. Deterministic given the seed.
LandmarkDataset generate_synthetic(const std::vector<Preshape>& templates, int per_class,
                                   double noise_sd, std::uint64_t seed);

// Temp file + rename in the target's directory.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace shapekrrc
