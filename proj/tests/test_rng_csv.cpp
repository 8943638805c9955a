#include <doctest.h>

#include <charconv>

#include <cmath>
#include <set>

#include "fairmw/csv.hpp"
#include "fairmw/error.hpp"
#include "fairmw/rng.hpp"

using namespace fairmw;

TEST_CASE("derived seeds differ by stream and index and are reproducible") {
    std::set<std::uint64_t> seen;
    for (auto stream : {RngStream::arrivals, RngStream::experts, RngStream::engine, RngStream::shuffle,
                        RngStream::split}) {
        for (std::uint64_t i = 0; i < 50; ++i) {
            const auto s = derive_seed(42, stream, i);
            CHECK(s == derive_seed(42, stream, i));
            seen.insert(s);
        }
    }
    CHECK(seen.size() == 250);
    CHECK(derive_seed(1, RngStream::engine, 0) != derive_seed(2, RngStream::engine, 0));
}

TEST_CASE("uniform and below") {
    Rng rng(9);
    double sum = 0.0;
    std::size_t counts[3] = {0, 0, 0};
    for (int i = 0; i < 30000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        ++counts[rng.below(3)];
    }
    CHECK(std::abs(sum / 30000.0 - 0.5) < 0.01);
    for (auto c : counts) CHECK(std::abs(static_cast<double>(c) / 30000.0 - 1.0 / 3.0) < 0.015);
    CHECK_THROWS_AS(rng.below(0), Error);
}

TEST_CASE("sample_index follows index order and skips zero weights") {
    const std::vector<double> w{0.0, 1.0, 0.0, 3.0};
    CHECK(sample_index(w, 0.0) == 1);
    CHECK(sample_index(w, 0.2499) == 1);
    CHECK(sample_index(w, 0.25) == 3);
    CHECK(sample_index(w, 0.999999) == 3);
    const std::vector<double> floor{1.0, 1e-300};
    CHECK(sample_index(floor, 0.9999999999) == 0);
}

TEST_CASE("parse_csv handles quotes, CRLF and blank lines") {
    const auto rows = parse_csv("a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\n\n2,,3\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == CsvRecord{"a", "b", "c"});
    CHECK(rows[1] == CsvRecord{"1", "x,y", "he said \"hi\""});
    CHECK(rows[2] == CsvRecord{"2", "", "3"});
    CHECK(parse_csv("a\nb").size() == 2);
    CHECK(parse_csv("").empty());
    CHECK_THROWS_AS(parse_csv("a,\"b\n"), Error);
    CHECK(parse_csv("\"multi\nline\",x\n")[0][0] == "multi\nline");
}

TEST_CASE("csv_escape round-trips through parse_csv") {
    for (const std::string field : {"plain", "a,b", "q\"uote", "line\nbreak", ""}) {
        const auto rows = parse_csv(csv_escape(field) + ",end\n");
        REQUIRE(rows.size() == 1);
        CHECK(rows[0][0] == field);
    }
}

TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-10) == "-2.5e-10");
    for (double v : {1.0 / 3.0, 2.0 / 7.0, 123456.789e-7, 5e-324}) {
        const std::string text = format_double(v);
        double back = 0.0;
        std::from_chars(text.data(), text.data() + text.size(), back);
        CHECK(back == v);
    }
}

TEST_CASE("file helpers report IoError") {
    try {
        read_file("/nonexistent/dir/file.csv");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::IoError);
    }
}
