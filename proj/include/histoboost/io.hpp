#pragma once

#include <string>

#include "histoboost/boosting.hpp"
#include "histoboost/dataset.hpp"

namespace histoboost {

// CSV with one numeric label column named or indexed by label_column.
// Empty fields are missing values (NaN). Ragged rows and non-numeric fields
// fail with the 1-based line number.
RawDataset load_csv(const std::string& path, const std::string& label_column, bool has_header);

// LibSVM "label idx:value ..." rows; indices are 1-based, must be strictly
// increasing within a row, and absent pairs are raw zeros (not missing).
RawDataset load_libsvm(const std::string& path);

// Writes label,f0,f1,... with shortest round-trip decimals; missing values
// become empty fields. Counterpart of load_csv for round-trip checks.
void save_csv(const RawDataset& data, const std::string& path);

// Line-oriented model text: a fixed header (version, loss, learning_rate,
// initial_score, num_trees), then per tree "tree <id> <num_nodes>" and one
// "node <id> <feature|leaf> <threshold> <left> <right> <leaf_value>" per
// node. Reals are shortest round-trip decimals. Loading is strict: version
// mismatches, malformed lines, and truncation all fail.
void save_model(const Model& model, const std::string& path);
std::string model_to_string(const Model& model);
Model load_model(const std::string& path);
Model model_from_string(const std::string& text);

// One shortest-round-trip decimal per line.
void save_predictions(const std::vector<double>& values, const std::string& path);
std::vector<double> load_value_lines(const std::string& path);

// Sniffs csv vs libsvm from the first data line ("idx:value" pairs mean
// libsvm) unless format names one explicitly ("csv" or "libsvm").
RawDataset load_dataset(const std::string& path, const std::string& format,
                        const std::string& label_column, bool has_header = true);

}  // namespace histoboost
