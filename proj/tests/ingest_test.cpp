#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <tuple>

using namespace tpm;

TEST(Ingest, HeaderOnlyFileIsEmpty) {
    std::istringstream in("device_id,timestamp,lat,lng\n");
    const auto r = load_csv(in);
    EXPECT_TRUE(r.records.empty());
    EXPECT_EQ(r.rejects, 0u);
}

TEST(Ingest, OutOfRangeLatitudeIsRejected) {
    std::istringstream in("device_id,timestamp,lat,lng\n"
                          "a,100,30.1,114.1\n"
                          "a,160,30.2,114.2\n"
                          "b,100,999,114.3\n"
                          "b,200,30.4,114.4\n");
    const auto r = load_csv(in);
    EXPECT_EQ(r.records.size(), 3u);
    EXPECT_EQ(r.rejects, 1u);
}

TEST(Ingest, MalformedRowsAreCountedNotFatal) {
    std::istringstream in("device_id,timestamp,lat,lng\n"
                          "a,abc,30.1,114.1\n"
                          "a,100,30.1\n"
                          ",100,30.1,114.1\n"
                          "a,-5,30.1,114.1\n"
                          "a,100,30.1,181\n"
                          "a,100,30.1,114.1\n");
    const auto r = load_csv(in);
    EXPECT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.rejects, 5u);
}

TEST(Ingest, MissingFileIsFatal) {
    EXPECT_THROW(load_csv(std::string("/nonexistent/gps.csv")), IoError);
}

TEST(Ingest, UnknownColumnNameIsAnError) {
    std::istringstream in("id,t,y,x\n");
    EXPECT_THROW(load_csv(in), InputError);
}

TEST(Ingest, ShuffledRowsArePreservedVerbatim) {
    // 10-row fixture, two devices, extra columns, non-canonical order.
    const std::vector<std::tuple<std::string, Timestamp, double, double>> rows = {
        {"b", 500, 30.5, 114.5}, {"a", 300, 30.3, 114.3}, {"a", 100, 30.1, 114.1}, {"b", 100, 31.1, 115.1},
        {"a", 200, 30.2, 114.2}, {"b", 300, 31.3, 115.3}, {"a", 500, 30.5, 114.5}, {"b", 200, 31.2, 115.2},
        {"a", 400, 30.4, 114.4}, {"b", 400, 31.4, 115.4}};
    std::ostringstream text;
    text << "speed;lon;device;when;latitude\n";
    for (const auto& [id, t, lat, lng] : rows) text << "7.5;" << lng << ';' << id << ';' << t << ';' << lat << '\n';

    std::istringstream in(text.str());
    CsvLayout layout{std::string("device"), std::string("when"), std::string("latitude"), std::string("lon"), ';',
                     true};
    const auto r = load_csv(in, layout);
    ASSERT_EQ(r.records.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(r.records[i].device_id, std::get<0>(rows[i]));
        EXPECT_EQ(r.records[i].timestamp, std::get<1>(rows[i]));
        EXPECT_DOUBLE_EQ(r.records[i].coord.lat, std::get<2>(rows[i]));
        EXPECT_DOUBLE_EQ(r.records[i].coord.lng, std::get<3>(rows[i]));
    }
}

TEST(Ingest, ColumnsByIndexWithoutHeader) {
    std::istringstream in("x,a,1577836800,30.5,114.3\n");
    CsvLayout layout{std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{4}, ',', false};
    const auto r = load_csv(in, layout);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].device_id, "a");
    EXPECT_EQ(r.records[0].timestamp, 1577836800);

    std::istringstream in2("a,1,2,3\n");
    EXPECT_THROW(load_csv(in2, CsvLayout{std::string("id"), std::size_t{1}, std::size_t{2}, std::size_t{3}, ',', false}),
                 InputError);
}

TEST(Ingest, QuotedFieldsMayContainDelimiter) {
    std::istringstream in("device_id,timestamp,lat,lng\n\"bike, 7\",10,1,2\n");
    const auto r = load_csv(in);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].device_id, "bike, 7");
}

TEST(Ingest, ParsesIso8601Timestamps) {
    EXPECT_EQ(parse_timestamp("1577836800"), 1577836800);
    EXPECT_EQ(parse_timestamp("2020-01-01T00:00:00Z"), 1577836800);
    EXPECT_EQ(parse_timestamp("2020-01-01 08:15:30"), 1577836800 + 8 * 3600 + 15 * 60 + 30);
    EXPECT_EQ(parse_timestamp("2020-01-01T08:00:00+08:00"), 1577836800);
    EXPECT_EQ(parse_timestamp("2020-01-01T08:00:00.750+0800"), 1577836800);
    EXPECT_EQ(parse_timestamp("2020-03-01T00:00:00Z"), 1583020800); // across Feb 29
    EXPECT_FALSE(parse_timestamp("2020-02-30T00:00:00Z"));
    EXPECT_FALSE(parse_timestamp("2020-01-01T25:00:00"));
    EXPECT_FALSE(parse_timestamp("yesterday"));
    EXPECT_FALSE(parse_timestamp("2020-01-01T00:00:00Q"));
}

TEST(Ingest, LongitudeMinus180IsNormalized) {
    std::istringstream in("device_id,timestamp,lat,lng\na,1,0,-180\n");
    const auto r = load_csv(in);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].coord.lng, 180.0);
}

TEST(GroupByDevice, EmptyInput) { EXPECT_TRUE(group_by_device({}).empty()); }

TEST(GroupByDevice, SortsEachDevice) {
    const std::vector<GpsRecord> recs = {
        {"b", 30, {0, 0}}, {"a", 20, {0, 1}}, {"b", 10, {0, 2}}, {"a", 5, {0, 3}}, {"b", 20, {0, 4}}};
    const auto logs = group_by_device(recs);
    ASSERT_EQ(logs.size(), 2u);
    EXPECT_EQ(logs[0].device_id, "a");
    EXPECT_EQ(logs[1].device_id, "b");
    // hand sorted
    ASSERT_EQ(logs[0].records.size(), 2u);
    EXPECT_EQ(logs[0].records[0].timestamp, 5);
    EXPECT_EQ(logs[0].records[1].timestamp, 20);
    ASSERT_EQ(logs[1].records.size(), 3u);
    EXPECT_EQ(logs[1].records[0].coord.lng, 2);
    EXPECT_EQ(logs[1].records[1].coord.lng, 4);
    EXPECT_EQ(logs[1].records[2].coord.lng, 0);
}

TEST(GroupByDevice, DuplicateTimestampsKeepInputOrder) {
    const std::vector<GpsRecord> recs = {{"a", 10, {0, 1}}, {"a", 5, {0, 9}}, {"a", 10, {0, 2}}};
    const auto logs = group_by_device(recs);
    ASSERT_EQ(logs[0].records.size(), 3u);
    EXPECT_EQ(logs[0].records[1].coord.lng, 1);
    EXPECT_EQ(logs[0].records[2].coord.lng, 2);
}

TEST(GroupByDevice, PreservesMultisetAndSortsEveryLog) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> dev(0, 6), t(0, 50);
    for (int round = 0; round < 50; ++round) {
        std::vector<GpsRecord> recs;
        for (int i = 0; i < 200; ++i)
            recs.push_back({"d" + std::to_string(dev(rng)), t(rng), {double(i) / 10, double(round)}});
        const auto logs = group_by_device(recs);
        std::vector<GpsRecord> flat;
        for (const auto& log : logs) {
            EXPECT_TRUE(is_sorted_log(log));
            flat.insert(flat.end(), log.records.begin(), log.records.end());
        }
        auto key = [](const GpsRecord& r) { return std::tie(r.device_id, r.timestamp, r.coord.lat, r.coord.lng); };
        auto less = [&](const GpsRecord& a, const GpsRecord& b) { return key(a) < key(b); };
        std::sort(flat.begin(), flat.end(), less);
        std::sort(recs.begin(), recs.end(), less);
        EXPECT_EQ(flat, recs);
    }
}

TEST(Ingest, CanonicalWriterReadsBack) {
    const std::vector<GpsRecord> recs = {{"x", 7, {30.12345678, 114.87654321}}, {"y,z", 9, {-1.5, 179.25}}};
    std::stringstream io;
    write_records_csv(io, recs);
    const auto r = load_csv(io);
    ASSERT_EQ(r.records.size(), 2u);
    EXPECT_EQ(r.records[1].device_id, "y,z");
    EXPECT_NEAR(r.records[0].coord.lat, 30.12345678, 1e-9);
}
