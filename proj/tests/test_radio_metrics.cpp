#include <doctest.h>

#include <cmath>
#include <vector>

#include "ioeq/radio_metrics.hpp"
#include "ioeq/rng.hpp"

using namespace ioeq;

namespace {

// Independent linear-domain evaluation used as the oracle for the dB-side
// implementations.
double mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

}  // namespace

TEST_SUITE("radio_metrics") {

TEST_CASE("noise floor at 20 MHz and 1 MHz") {
  CHECK(std::abs(noise_power_dbm(20e6) - (-100.9897)) < 1e-4);
  CHECK(std::abs(noise_power_dbm(1e6) - (-114.0)) < 1e-9);
}

TEST_CASE("rsrp from rssi over resource blocks") {
  CHECK(std::abs(rsrp_from_rssi(-70.0, 100) - (-100.7918)) < 1e-4);
  CHECK(std::abs(rsrp_from_rssi(0.0, 100) - (-30.7918)) < 1e-4);
  for (double x : {-70.0, -50.5, 0.0}) {
    CHECK(std::abs(rsrp_from_rssi(x, 1) - (x - 10.7918)) < 1e-4);
  }
}

TEST_CASE("rsrq linear-domain mode matches the milliwatt-ratio oracle") {
  const double got = rsrq(-70.0, -90.79, 100);
  const double oracle = 10.0 * std::log10(100.0 * mw(-90.79) / mw(-70.0));
  CHECK(std::abs(got - oracle) < 1e-12);
  CHECK(std::abs(got - (-0.79)) < 0.01);
}

TEST_CASE("rsrq literal-db mode reproduces the unconverted ratio") {
  const double got = rsrq(-70.0, -100.79, 100, RsrqMode::kLiteralDb);
  CHECK(std::abs(got - 100.0 * (-70.0 / -100.79)) < 1e-12);
  CHECK(std::abs(got - 69.45) < 0.01);
}

TEST_CASE("sinr without interference is the dBm difference") {
  CHECK(std::abs(sinr(-90.0, -100.9897, {}) - 10.9897) < 1e-3);
}

TEST_CASE("sinr with one interferer at noise power, linear oracle") {
  const double noise_dbm = -100.9897;
  const double got = sinr(-90.0, noise_dbm, {mw(noise_dbm)});
  const double oracle = 10.0 * std::log10(mw(-90.0) / (mw(noise_dbm) + mw(noise_dbm)));
  CHECK(std::abs(got - oracle) < 1e-12);
  CHECK(std::abs(got - 7.979) < 1e-3);
}

TEST_CASE("cqi affine map anchor points") {
  CHECK(cqi_raw_from_sinr(0.0) == 4.6176);  // intercept, exact
  CHECK(std::abs(cqi_raw_from_sinr(10.0) - 9.8406) < 1e-4);
  CHECK(quantize_cqi(cqi_raw_from_sinr(10.0)) == 10);
  CHECK(std::abs(cqi_raw_from_sinr(40.0) - 25.5096) < 1e-4);
  CHECK(quantize_cqi(cqi_raw_from_sinr(40.0)) == 15);
}

TEST_CASE("cqi quantization clamps and rounds half away from zero") {
  CHECK(quantize_cqi(-3.0) == 0);
  CHECK(quantize_cqi(0.4) == 0);
  CHECK(quantize_cqi(6.5) == 7);
  CHECK(quantize_cqi(7.5) == 8);
  CHECK(quantize_cqi(7.49) == 7);
  CHECK(quantize_cqi(15.2) == 15);
  CHECK(quantize_cqi(99.0) == 15);
}

TEST_CASE("full chain at rssi -70, 100 RBs, 20 MHz") {
  LinkBudget link;
  link.rssi_dbm = -70.0;
  link.num_rbs = 100;
  link.bandwidth_hz = 20e6;
  const LinkMetrics m = quality_model(link);
  CHECK(std::abs(m.rsrp_dbm - (-100.7918)) < 1e-4);
  CHECK(std::abs(m.sinr_db - 0.198) < 1e-3);
  CHECK(std::abs(m.cqi_raw - 4.721) < 1e-3);
  CHECK(m.cqi == 5);
}

TEST_CASE("explicit noise overrides the bandwidth-derived floor") {
  LinkBudget link;
  link.rssi_dbm = -60.0;
  link.num_rbs = 100;
  link.noise_dbm = -90.0;
  const LinkMetrics m = quality_model(link);
  CHECK(std::abs(m.sinr_db - (m.rsrp_dbm - (-90.0))) < 1e-9);
}

TEST_CASE("property: zero-interference sinr identity over randomized budgets") {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    LinkBudget link;
    link.rssi_dbm = rng.uniform(-120.0, -40.0);
    link.num_rbs = 1 + static_cast<int>(rng.uniform_index(200));
    link.bandwidth_hz = rng.uniform(1e6, 100e6);
    const LinkMetrics m = quality_model(link);
    const double noise = noise_power_dbm(link.bandwidth_hz);
    CHECK(std::abs(m.sinr_db - (m.rsrp_dbm - noise)) <= 1e-9);
    CHECK(m.cqi >= 0);
    CHECK(m.cqi <= 15);
    CHECK(m.rsrp_dbm < link.rssi_dbm);  // 12*J > 1 always
  }
}

TEST_CASE("property: cqi raw map is strictly increasing in sinr") {
  double prev = cqi_raw_from_sinr(-30.0);
  for (double s = -29.0; s <= 40.0; s += 1.0) {
    const double cur = cqi_raw_from_sinr(s);
    CHECK(cur > prev);
    prev = cur;
  }
}

}  // TEST_SUITE
