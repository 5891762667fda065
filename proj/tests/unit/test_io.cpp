#include "qfreq/io.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

using namespace qfreq;
using namespace qfreq::io;

TEST(Io, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 79.786461393821537}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(json_number(-std::numeric_limits<double>::infinity()), Json("-inf"));
}

TEST(Io, StateJsonRoundTrip) {
    const StateVector psi({2, 3}, {0.1, {0.2, -0.3}, 0.0, 1.0 / 3.0, {0.0, 1e-20}, -0.5});
    const auto back = parse_state(to_json(psi).dump());
    EXPECT_EQ(back, psi);
}

TEST(Io, StateJsonErrors) {
    EXPECT_THROW(parse_state("{"), FormatError);
    EXPECT_THROW(parse_state(R"({"dims":[2]})"), FormatError);
    EXPECT_THROW(parse_state(R"({"dims":[2],"amps":[[1,0],[0]]})"), FormatError);
    EXPECT_THROW(parse_state(R"({"dims":[2],"amps":[["x",0],[0,0]]})"), FormatError);
    EXPECT_THROW(parse_state(R"({"dims":[3],"amps":[[1,0],[0,0]]})"), ShapeError);
}

TEST(Io, DensityCsvLayout) {
    std::ostringstream os;
    const std::vector<std::string> comments{"version 1.0.0"};
    write_density_csv(os, density(TwoLevelAmplitudes::from_weight(0.5), 2), comments);
    std::istringstream in(os.str());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) lines.push_back(line);
    ASSERT_EQ(lines.size(), 5u);
    EXPECT_EQ(lines[0], "# version 1.0.0");
    EXPECT_EQ(lines[1], "n,r,log_rho,rho,cumulative");
    EXPECT_EQ(lines[3].substr(0, 6), "1,0.5,");
    EXPECT_NEAR(std::stod(lines[4].substr(lines[4].rfind(',') + 1)), 1.0, 1e-15);
}

TEST(Io, NormDensityCsv) {
    std::ostringstream os;
    write_norm_density_csv(os, NormDensity{{-1, 4}, {1.0, 3.0}, 4.0});
    EXPECT_EQ(os.str(), "q_label,mass,fraction\n-1,1,0.25\n4,3,0.75\n");
}

TEST(Io, ReadOffJson) {
    NormDensity rho{{0, 1}, {0.5, 0.5}, 1.0};
    const auto j = to_json(read_off(rho, 1e-12));
    EXPECT_EQ(j["kind"], "Indeterminate");
    EXPECT_EQ(j["support"].size(), 2u);
    EXPECT_FALSE(j.contains("value"));
    NormDensity peak{{7}, {1.0}, 1.0};
    EXPECT_EQ(to_json(read_off(peak, 0.0))["value"], 7);
}

TEST(Io, Fnv1aKnownValues) {
    EXPECT_EQ(fnv1a64(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a64("a"), "af63dc4c8601ec8c");
}

TEST(Io, RecordTableWithTrials) {
    const auto t = record_table(record_distribution(TwoLevelAmplitudes::from_weight(0.5), 2, 1000));
    ASSERT_EQ(t.columns.back(), "expected_count");
    EXPECT_DOUBLE_EQ(t.rows[1].back().get<double>(), 500.0);
    std::ostringstream os;
    write_csv(os, t);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "n,r,log_R,R,cumulative,expected_count");
}

TEST(Io, TableCellsAndJson) {
    Table t{{"a", "b", "c"}, {}};
    t.add({1, 0.1, "x"});
    EXPECT_THROW(t.add({1}), Error);
    std::ostringstream os;
    write_csv(os, t);
    EXPECT_EQ(os.str(), "a,b,c\n1,0.10000000000000001,x\n");
    EXPECT_EQ(to_json(t).dump(), R"({"columns":["a","b","c"],"rows":[[1,0.1,"x"]]})");
}
