#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hetavg/report.hpp"

namespace {

using namespace hetavg;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("hetavg_report_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TEST(ResultTable, CsvRoundTripsDoubles) {
    ResultTable t({"epsilon", "value"});
    t.add_row({0.1, 1.0 / 3.0});
    t.add_row({0.2, std::numeric_limits<double>::quiet_NaN()});
    const std::string csv = t.to_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "epsilon,value");
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    const double back = std::stod(line.substr(line.find(',') + 1));
    EXPECT_EQ(back, 1.0 / 3.0);
    std::getline(is, line);
    EXPECT_EQ(line, "0.20000000000000001,nan");
}

TEST(ResultTable, RejectsRaggedRows) {
    ResultTable t({"a", "b"});
    EXPECT_THROW(t.add_row({1.0}), DomainError);
    EXPECT_TRUE(t.rows.empty());
}

TEST(ResultTable, JsonCarriesMetadataAndTiming) {
    ResultTable t({"x"});
    t.metadata["seed"] = 7;
    t.summary["slope"] = 2.0;
    t.add_row({1.0});
    const auto j = t.to_json(1.5);
    EXPECT_EQ(j["config"]["seed"], 7);
    EXPECT_EQ(j["summary"]["slope"], 2.0);
    EXPECT_EQ(j["version"], kVersion);
    EXPECT_EQ(j["wall_clock_seconds"], 1.5);
    EXPECT_EQ(j["row_count"], 1);
}

TEST(WriteResults, CsvIsByteIdenticalAcrossRuns) {
    const auto dir = scratch("repro");
    ResultTable t({"x", "y"});
    t.metadata["k"] = 4;
    t.add_row({0.5, 2.25});
    write_results(t, (dir / "a").string(), 0.1);
    write_results(t, (dir / "b").string(), 9.9);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_NE(slurp(dir / "a.json"), slurp(dir / "b.json"));
    EXPECT_FALSE(fs::exists(dir / "a.csv.tmp"));
}

TEST(WriteResults, FailureLeavesNoFiles) {
    const auto dir = scratch("fail");
    // A directory squatting on the JSON target makes the second rename fail.
    fs::create_directories(dir / "out.json" / "blocker");
    ResultTable t({"x"});
    t.add_row({1.0});
    EXPECT_ANY_THROW(write_results(t, (dir / "out").string(), 0.0));
    EXPECT_FALSE(fs::exists(dir / "out.csv"));
    EXPECT_FALSE(fs::exists(dir / "out.csv.tmp"));
    EXPECT_FALSE(fs::exists(dir / "out.json.tmp"));
}

TEST(WriteAtomic, ReplacesExistingFile) {
    const auto dir = scratch("atomic");
    write_atomic(dir / "f.txt", "old");
    write_atomic(dir / "f.txt", "new");
    EXPECT_EQ(slurp(dir / "f.txt"), "new");
}

}  // namespace
