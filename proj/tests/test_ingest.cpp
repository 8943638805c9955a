#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "fairmw/error.hpp"
#include "fairmw/ingest.hpp"
#include "support.hpp"

using namespace fairmw;

namespace {

DatasetSchema toy_schema() {
    DatasetSchema s;
    s.label_column = "income";
    s.positive_value = ">50K";
    s.group_column = "race";
    s.group_a_value = "White";
    return s;
}

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("toy CSV") {
    const auto ds = parse_dataset("age,race,income\n30,White,>50K\n40,Black,<=50K\n50,White,<=50K\n", toy_schema());
    REQUIRE(ds.examples.size() == 3);
    CHECK(ds.examples[0].group == GroupId::A);
    CHECK(ds.examples[0].label == Label::positive);
    CHECK(ds.examples[1].group == GroupId::B);
    CHECK(ds.examples[1].label == Label::negative);
    CHECK(ds.examples[2].features == std::vector<double>{50.0});
    const auto stats = dataset_stats(ds.examples);
    CHECK(stats.n_rounds == 3);
    CHECK(stats.p == doctest::Approx(2.0 / 3.0));
    CHECK(*stats.mu_a_pos == doctest::Approx(0.5));
    CHECK(*stats.mu_b_pos == 0.0);
    CHECK(*stats.disparate_impact == 0.0);
}

TEST_CASE("a missing label drops the row") {
    const auto ds = parse_dataset("age,race,income\n30,White,>50K\n40,Black,\n50,White,<=50K\n", toy_schema());
    CHECK(ds.examples.size() == 2);
    CHECK(ds.report.rows_read == 3);
    CHECK(ds.report.rows_kept == 2);
    CHECK(ds.report.rows_dropped == 1);
}

TEST_CASE("a group value that never matches puts every row in B") {
    auto schema = toy_schema();
    schema.group_a_value = "Martian";
    const auto ds = parse_dataset("age,race,income\n30,White,>50K\n40,Black,<=50K\n", schema);
    const auto stats = dataset_stats(ds.examples);
    CHECK(stats.p == 0.0);
    CHECK_FALSE(stats.mu_a_pos.has_value());
    CHECK_FALSE(stats.disparate_impact.has_value());
}

TEST_CASE("numeric group threshold and label alternatives") {
    DatasetSchema s;
    s.label_column = "y";
    s.positive_value = "good|1";
    s.group_column = "age";
    s.group_a_value = "";
    s.group_a_min = 25;
    const auto ds = parse_dataset("age,y\n24,good\n25,1\n60,bad\n", s);
    REQUIRE(ds.examples.size() == 3);
    CHECK(ds.examples[0].group == GroupId::B);
    CHECK(ds.examples[1].group == GroupId::A);
    CHECK(ds.examples[0].label == Label::positive);
    CHECK(ds.examples[1].label == Label::positive);
    CHECK(ds.examples[2].label == Label::negative);
}

TEST_CASE("categorical columns are one-hot in first-occurrence order") {
    auto schema = toy_schema();
    const auto ds = parse_dataset("job,race,income\nclerk,White,>50K\nchef,Black,<=50K\nclerk,Black,<=50K\n", schema);
    REQUIRE(ds.report.columns.size() == 1);
    CHECK_FALSE(ds.report.columns[0].numeric);
    CHECK(ds.report.feature_names == std::vector<std::string>{"job=clerk", "job=chef"});
    CHECK(ds.examples[0].features == std::vector<double>{1.0, 0.0});
    CHECK(ds.examples[1].features == std::vector<double>{0.0, 1.0});
}

TEST_CASE("feature selection and exclusion") {
    auto schema = toy_schema();
    schema.excluded_columns = {"w"};
    auto ds = parse_dataset("a,w,race,income\n1,9,White,>50K\n", schema);
    CHECK(ds.examples[0].features == std::vector<double>{1.0});
    schema.excluded_columns.clear();
    schema.feature_columns = {"w"};
    ds = parse_dataset("a,w,race,income\n1,9,White,>50K\n", schema);
    CHECK(ds.examples[0].features == std::vector<double>{9.0});
}

TEST_CASE("ingest errors") {
    CHECK(kind_of([] { parse_dataset("age,income\n30,>50K\n", toy_schema()); }) == ErrorKind::SchemaError);
    CHECK(kind_of([] { parse_dataset("age,race,income\n30,White\n", toy_schema()); }) == ErrorKind::FormatError);
    CHECK(kind_of([] { parse_dataset("age,race,income\n30,White,<=50K\n", toy_schema()); }) ==
          ErrorKind::SchemaError);
    CHECK(kind_of([] { load_dataset("/nonexistent/file.csv", toy_schema()); }) == ErrorKind::IoError);
    CHECK(kind_of([] { dataset_stats(std::vector<Example>{}); }) == ErrorKind::EmptyDataset);
    CHECK(kind_of([] { DatasetSchema{}.validate(); }) == ErrorKind::SchemaError);
}

TEST_CASE("split_shuffle") {
    testing_support::Gen gen(51);
    const auto data = gen.stream(1000, 0.6, 0.3, 0.2);
    SUBCASE("sizes") {
        const auto [train, test] = split_shuffle(data, 0.7, 3);
        CHECK(train.size() == 700);
        CHECK(test.size() == 300);
    }
    SUBCASE("same seed, same split; different seed, different split") {
        CHECK(split_shuffle(data, 0.7, 3) == split_shuffle(data, 0.7, 3));
        CHECK(seeded_permutation(1000, 3) != seeded_permutation(1000, 4));
    }
    SUBCASE("invalid ratio") {
        CHECK(kind_of([&] { split_shuffle(data, 0.0, 1); }) == ErrorKind::InvalidArgument);
        CHECK(kind_of([&] { split_shuffle(data, 1.0, 1); }) == ErrorKind::InvalidArgument);
        CHECK(kind_of([] { split_shuffle(std::vector<Example>{}, 0.5, 1); }) == ErrorKind::EmptyDataset);
    }
}

TEST_CASE("splits partition the input") {
    testing_support::Gen gen(52);
    for (int i = 0; i < 30; ++i) {
        const std::size_t n = gen.integer(2, 400);
        std::vector<Example> data;
        for (std::size_t k = 0; k < n; ++k) data.push_back({{static_cast<double>(k)}, gen.group(), gen.label()});
        const double ratio = gen.uniform(0.05, 0.95);
        const auto [train, test] = split_shuffle(data, ratio, gen.integer(0, 1000));
        CHECK(train.size() == static_cast<std::size_t>(ratio * static_cast<double>(n)));
        CHECK(train.size() + test.size() == n);
        std::multiset<double> ids;
        for (const auto& e : train) ids.insert(e.features[0]);
        for (const auto& e : test) ids.insert(e.features[0]);
        CHECK(ids.size() == n);
        CHECK(std::set<double>(ids.begin(), ids.end()).size() == n);
        const auto perm = seeded_permutation(n, 9);
        std::vector<std::size_t> sorted = perm;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t k = 0; k < n; ++k) CHECK(sorted[k] == k);
    }
}

TEST_CASE("stats are invariant under permutation") {
    testing_support::Gen gen(53);
    for (int i = 0; i < 20; ++i) {
        const auto data = gen.stream(gen.integer(1, 500), 0.5, 0.4, 0.6);
        const auto shuffled = shuffle_arrivals(data, gen.integer(0, 99));
        const auto a = dataset_stats(data);
        const auto b = dataset_stats(shuffled);
        CHECK(a.n_rounds == b.n_rounds);
        CHECK(a.p == b.p);
        CHECK(a.mu_a_pos == b.mu_a_pos);
        CHECK(a.mu_b_pos == b.mu_b_pos);
    }
}

TEST_CASE("canonical CSV round trip") {
    testing_support::Gen gen(54);
    std::vector<Example> data;
    for (int i = 0; i < 100; ++i) {
        data.push_back({{gen.uniform(-1e6, 1e6), gen.uniform(0, 1e-9), 0.1 * i}, gen.group(), gen.label()});
    }
    // Make sure both labels are present for the schema check.
    data[0].label = Label::positive;
    const auto back = parse_dataset(write_canonical_csv(data), canonical_schema());
    CHECK(back.examples == data);
}

TEST_CASE("bundled German data: 1000 rows, 300 in the test split") {
    const std::filesystem::path path = std::filesystem::path(FAIRMW_SOURCE_DIR) / "data" / "german.csv";
    DatasetSchema s;
    s.label_column = "credit";
    s.positive_value = "good";
    s.group_column = "age";
    s.group_a_min = 25;
    const auto ds = load_dataset(path, s);
    CHECK(ds.examples.size() == 1000);
    const auto [train, test] = split_shuffle(ds.examples, 0.7, 0);
    CHECK(test.size() == 300);
}
