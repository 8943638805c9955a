#include "fairmw/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "fairmw/csv.hpp"
#include "fairmw/error.hpp"
#include "fairmw/rng.hpp"

namespace fairmw {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::vector<std::string> split_alternatives(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto bar = s.find('|', start);
        out.emplace_back(trim(s.substr(start, bar == std::string_view::npos ? std::string_view::npos : bar - start)));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return out;
}

bool matches(std::string_view cell, const std::vector<std::string>& alternatives) {
    return std::find(alternatives.begin(), alternatives.end(), cell) != alternatives.end();
}

std::size_t column_of(const CsvRecord& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (trim(header[i]) == name) return i;
    }
    throw Error(ErrorKind::SchemaError, "column '" + name + "' not found in header");
}

}  // namespace

void DatasetSchema::validate() const {
    if (label_column.empty()) throw Error(ErrorKind::SchemaError, "label column is not set");
    if (positive_value.empty()) throw Error(ErrorKind::SchemaError, "positive label value is not set");
    if (group_column.empty()) throw Error(ErrorKind::SchemaError, "group column is not set");
    if (group_a_value.empty() && !group_a_min) {
        throw Error(ErrorKind::SchemaError, "group A needs a value or a numeric threshold");
    }
    if (label_column == group_column) throw Error(ErrorKind::SchemaError, "label and group columns coincide");
}

Dataset parse_dataset(std::string_view csv_text, const DatasetSchema& schema) {
    schema.validate();
    const auto records = parse_csv(csv_text);
    if (records.empty()) throw Error(ErrorKind::SchemaError, "dataset has no header row");
    const CsvRecord& header = records.front();

    const std::size_t label_col = column_of(header, schema.label_column);
    const std::size_t group_col = column_of(header, schema.group_column);
    std::vector<std::size_t> feature_cols;
    if (schema.feature_columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            const std::string name(trim(header[i]));
            if (i == label_col || i == group_col) continue;
            if (std::find(schema.excluded_columns.begin(), schema.excluded_columns.end(), name) !=
                schema.excluded_columns.end()) {
                continue;
            }
            feature_cols.push_back(i);
        }
    } else {
        for (const auto& name : schema.feature_columns) feature_cols.push_back(column_of(header, name));
    }
    for (const auto& name : schema.excluded_columns) column_of(header, name);

    const auto positive = split_alternatives(schema.positive_value);
    const auto group_a = split_alternatives(schema.group_a_value);

    Dataset out;
    IngestReport& report = out.report;
    std::vector<const CsvRecord*> kept;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const CsvRecord& row = records[r];
        ++report.rows_read;
        if (row.size() != header.size()) {
            throw Error(ErrorKind::FormatError, "row " + std::to_string(r + 1) + " has " +
                                                    std::to_string(row.size()) + " fields, header has " +
                                                    std::to_string(header.size()));
        }
        bool missing = trim(row[label_col]).empty() || trim(row[group_col]).empty();
        for (std::size_t c : feature_cols) missing = missing || trim(row[c]).empty();
        if (missing) {
            ++report.rows_dropped;
            continue;
        }
        kept.push_back(&row);
    }
    report.rows_kept = kept.size();

    for (std::size_t c : feature_cols) {
        FeatureColumn column;
        column.name = std::string(trim(header[c]));
        column.numeric = std::all_of(kept.begin(), kept.end(),
                                     [&](const CsvRecord* row) { return parse_number((*row)[c]).has_value(); });
        if (!column.numeric) {
            for (const CsvRecord* row : kept) {
                const std::string value(trim((*row)[c]));
                if (std::find(column.categories.begin(), column.categories.end(), value) == column.categories.end()) {
                    column.categories.push_back(value);
                }
            }
        }
        if (column.numeric) {
            report.feature_names.push_back(column.name);
        } else {
            for (const auto& cat : column.categories) report.feature_names.push_back(column.name + "=" + cat);
        }
        report.columns.push_back(std::move(column));
    }

    std::vector<std::unordered_map<std::string, std::size_t>> category_index(feature_cols.size());
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
        const auto& cats = report.columns[k].categories;
        for (std::size_t j = 0; j < cats.size(); ++j) category_index[k].emplace(cats[j], j);
    }

    bool any_positive = false;
    out.examples.reserve(kept.size());
    for (const CsvRecord* row : kept) {
        Example ex;
        ex.label = label_from_bool(matches(trim((*row)[label_col]), positive));
        any_positive = any_positive || ex.label == Label::positive;

        const std::string_view group_cell = trim((*row)[group_col]);
        bool is_a = !group_a.empty() && !schema.group_a_value.empty() && matches(group_cell, group_a);
        if (!is_a && schema.group_a_min) {
            const auto v = parse_number(group_cell);
            is_a = v && *v >= *schema.group_a_min;
        }
        ex.group = is_a ? GroupId::A : GroupId::B;

        ex.features.reserve(report.feature_names.size());
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            const std::string_view cell = (*row)[feature_cols[k]];
            const FeatureColumn& column = report.columns[k];
            if (column.numeric) {
                ex.features.push_back(*parse_number(cell));
            } else {
                const std::size_t hot = category_index[k].at(std::string(trim(cell)));
                for (std::size_t j = 0; j < column.categories.size(); ++j) ex.features.push_back(j == hot ? 1.0 : 0.0);
            }
        }
        out.examples.push_back(std::move(ex));
    }
    if (!out.examples.empty() && !any_positive) {
        throw Error(ErrorKind::SchemaError, "positive label value '" + schema.positive_value + "' never occurs in '" +
                                                schema.label_column + "'");
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
    return parse_dataset(read_file(path), schema);
}

DatasetStats dataset_stats(std::span<const Example> examples) {
    if (examples.empty()) throw Error(ErrorKind::EmptyDataset, "no examples");
    std::array<std::size_t, kCells> counts{};
    for (const auto& ex : examples) ++counts[cell_index(ex.group, ex.label)];
    DatasetStats stats;
    stats.n_rounds = examples.size();
    const auto n = static_cast<double>(examples.size());
    const std::size_t n_a = counts[0] + counts[1];
    const std::size_t n_b = counts[2] + counts[3];
    stats.p = static_cast<double>(n_a) / n;
    if (n_a > 0) stats.mu_a_pos = static_cast<double>(counts[1]) / static_cast<double>(n_a);
    if (n_b > 0) stats.mu_b_pos = static_cast<double>(counts[3]) / static_cast<double>(n_b);
    if (stats.mu_a_pos && stats.mu_b_pos && *stats.mu_a_pos > 0.0) {
        stats.disparate_impact = *stats.mu_b_pos / *stats.mu_a_pos;
    }
    return stats;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

std::pair<std::vector<Example>, std::vector<Example>> split_shuffle(std::span<const Example> examples, double ratio,
                                                                    std::uint64_t seed) {
    if (examples.empty()) throw Error(ErrorKind::EmptyDataset, "cannot split an empty dataset");
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::InvalidArgument, "split ratio must lie in (0, 1)");
    const auto perm = seeded_permutation(examples.size(), seed);
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(examples.size())));
    std::vector<Example> train, test;
    train.reserve(n_train);
    test.reserve(examples.size() - n_train);
    for (std::size_t i = 0; i < perm.size(); ++i) {
        (i < n_train ? train : test).push_back(examples[perm[i]]);
    }
    return {std::move(train), std::move(test)};
}

std::vector<Example> shuffle_arrivals(std::span<const Example> examples, std::uint64_t seed) {
    const auto perm = seeded_permutation(examples.size(), seed);
    std::vector<Example> out;
    out.reserve(examples.size());
    for (std::size_t i : perm) out.push_back(examples[i]);
    return out;
}

std::string write_canonical_csv(std::span<const Example> examples) {
    const std::size_t k = examples.empty() ? 0 : examples.front().features.size();
    std::string out;
    for (std::size_t j = 0; j < k; ++j) out += "x" + std::to_string(j) + ",";
    out += "group,label\n";
    for (const auto& ex : examples) {
        if (ex.features.size() != k) throw Error(ErrorKind::InvalidArgument, "examples have ragged features");
        for (double v : ex.features) {
            out += format_double(v);
            out += ',';
        }
        out += group_name(ex.group);
        out += ',';
        out += std::to_string(label_value(ex.label));
        out += '\n';
    }
    return out;
}

DatasetSchema canonical_schema() {
    DatasetSchema schema;
    schema.label_column = "label";
    schema.positive_value = "1";
    schema.group_column = "group";
    schema.group_a_value = "A";
    return schema;
}

}  // namespace fairmw
