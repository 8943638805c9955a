#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairmw/domain.hpp"

namespace fairmw {

enum class MissingPolicy { drop_row };

/// How to turn CSV rows into Examples.
///
/// The label is positive when the cell equals one of the '|'-separated
/// alternatives in positive_value. The group is A when the cell equals one of
/// the alternatives in group_a_value or, if group_a_min is set, when the cell
/// parses as a number >= group_a_min.
struct DatasetSchema {
    std::string label_column;
    std::string positive_value;
    std::string group_column;
    std::string group_a_value;
    std::optional<double> group_a_min;
    /// Empty means every remaining column.
    std::vector<std::string> feature_columns;
    /// Removed from the "all remaining" feature set.
    std::vector<std::string> excluded_columns;
    MissingPolicy missing_policy = MissingPolicy::drop_row;

    /// Throws SchemaError.
    void validate() const;
};

struct FeatureColumn {
    std::string name;
    bool numeric = true;
    /// One-hot categories in first-occurrence order (categorical columns).
    std::vector<std::string> categories;
};

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_dropped = 0;
    std::vector<FeatureColumn> columns;
    /// Expanded feature names, e.g. "race=White".
    std::vector<std::string> feature_names;
};

struct Dataset {
    std::vector<Example> examples;
    IngestReport report;
};

/// Parses CSV text with a header row. A row with an empty label, group or
/// feature cell is dropped. Columns whose kept cells all parse as numbers are
/// numeric; others are one-hot encoded. Throws SchemaError (missing column,
/// positive value never present) or FormatError (ragged row).
Dataset parse_dataset(std::string_view csv_text, const DatasetSchema& schema);
/// Throws IoError in addition to parse_dataset's errors.
Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema);

struct DatasetStats {
    std::size_t n_rounds = 0;
    double p = 0.0;
    std::optional<double> mu_a_pos;
    std::optional<double> mu_b_pos;
    /// mu_{B,+} / mu_{A,+}; missing when mu_{A,+} is 0 or undefined.
    std::optional<double> disparate_impact;
};

/// Exact empirical frequencies. Throws EmptyDataset.
DatasetStats dataset_stats(std::span<const Example> examples);

/// Seeded Fisher-Yates permutation (Rng(seed), draws via Rng::below), then
/// the first floor(ratio n) rows are the training split. Throws EmptyDataset,
/// InvalidArgument when ratio is outside (0, 1).
std::pair<std::vector<Example>, std::vector<Example>> split_shuffle(std::span<const Example> examples, double ratio,
                                                                    std::uint64_t seed);

/// Same permutation as split_shuffle, returned as indices.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Arrival order for one trial.
std::vector<Example> shuffle_arrivals(std::span<const Example> examples, std::uint64_t seed);

/// Canonical CSV: columns x0..x{k-1}, group (A/B), label (1/0). Feature values
/// use shortest round-trip formatting so re-ingesting with canonical_schema()
/// reproduces the examples exactly.
std::string write_canonical_csv(std::span<const Example> examples);
DatasetSchema canonical_schema();

}  // namespace fairmw
