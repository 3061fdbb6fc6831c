#include <doctest.h>

#include "msnow/metrics.hpp"

using namespace msnow;

namespace {

constexpr std::int64_t kFrame = 328 * 7;  // chips on air, preamble included

// Sensor 1 sends two packets; the first gets through.
EventLog two_packets() {
    EventLog log;
    log.add(0, 1, 1, EventKind::ready, 1);
    log.add(0, 1, 1, EventKind::tx_start, 1);
    log.add(kFrame, 1, 1, EventKind::tx_end, 1);
    log.add(kFrame, kBaseStation, 1, EventKind::decode_ok, 1);
    log.add(3000, 1, 1, EventKind::ready, 2);
    log.add(3000, 1, 1, EventKind::tx_start, 2);
    log.add(3000 + kFrame, 1, 1, EventKind::tx_end, 2);
    log.add(3000 + kFrame, kBaseStation, 1, EventKind::decode_fail, 2);
    log.finalize();
    return log;
}

}  // namespace

TEST_CASE("cdr") {
    const auto r = compute_cdr(two_packets());
    CHECK(r.transmitted == 2);
    CHECK(r.delivered == 1);
    CHECK(*r.average == doctest::Approx(50.0));
    CHECK_FALSE(compute_cdr(EventLog{}).average.has_value());
}

TEST_CASE("throughput over busy time") {
    const auto t = compute_throughput(two_packets(), MetricsContext{});
    // 224 bits over two airtimes of 5.6 ms
    CHECK(t.effective_bps == doctest::Approx(20000.0));
    CHECK(t.offered_bps == doctest::Approx(40000.0));
}

TEST_CASE("latency charges lost packets to the delivered ones") {
    CHECK(*compute_latency(two_packets(), MetricsContext{}) == doctest::Approx(11.2e-3));
}

TEST_CASE("energy per delivered packet") {
    // two 5.6 ms sends at 17.5 mA, 704 idle chips at 0.5 mA, all at 3 V
    const double expect = 2 * 17.5e-3 * 3.0 * 5.6e-3 + 0.5e-3 * 3.0 * 704 / 400e3;
    CHECK(*compute_energy(two_packets(), MetricsContext{}) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("end to end through the base station") {
    EventLog log;
    log.add(0, 1, 1, EventKind::ready, 7);
    log.add(100, 1, 1, EventKind::tx_start, 7);
    log.add(100 + kFrame, 1, 1, EventKind::tx_end, 7);
    log.add(100 + kFrame, kBaseStation, 1, EventKind::decode_ok, 7);
    log.add(4188, kBaseStation, 2, EventKind::tx_start, 7);
    log.add(4188 + kFrame, kBaseStation, 2, EventKind::tx_end, 7);
    log.add(4188 + kFrame, 6, 2, EventKind::rx_ok, 7);
    log.finalize();
    const auto e = e2e_latencies(log);
    REQUIRE(e.size() == 1);
    CHECK(e[0] == doctest::Approx((4188.0 + kFrame) / 400e3));
    CHECK(compute_cdr(log, Hop::downlink).delivered == 1);
    CHECK(compute_cdr(log, Hop::uplink).delivered == 1);
}

TEST_CASE("bitrate arithmetic") {
    CHECK(shannon_bitrate_ratio(200e3, 3.0) == doctest::Approx(400e3));
    CHECK(spread_bitrate_ratio(200e3, 3.0, 7) / 1e3 == doctest::Approx(57.142857).epsilon(1e-7));
    CHECK_THROWS(spread_bitrate_ratio(200e3, 3.0, 0));
}

TEST_CASE("scalability") {
    ScalabilityInput in;
    CHECK(scalability_estimate(in) == 80537118);
    in.paired = true;
    CHECK(scalability_estimate(in) == 40268559);
    in.subcarriers_per_channel = 0;
    CHECK_THROWS(scalability_estimate(in));
}

TEST_CASE("report formats") {
    MetricsReport r;
    r.scenario = "uplink";
    fill_metrics(r, two_packets(), MetricsContext{});
    const auto j = r.to_json();
    CHECK(j.find("\"throughput_bps\": 20000") != std::string::npos);
    const auto header = MetricsReport::csv_header();
    const auto cols = std::count(header.begin(), header.end(), ',');
    const auto row = r.to_csv_row();
    CHECK(std::count(row.begin(), row.end(), ',') == cols);
}

TEST_CASE("event csv") {
    const auto csv = two_packets().to_csv();
    CHECK(csv.rfind("time_s,node,subcarrier,event,packet_id\n", 0) == 0);
    CHECK(csv.find("0.005740000,0,1,decode_ok,1") != std::string::npos);
}
