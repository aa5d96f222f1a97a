#include "ioeq/radio_metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace ioeq {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) {
  if (!(mw > 0.0)) {
    throw std::domain_error("mw_to_dbm: power must be positive");
  }
  return 10.0 * std::log10(mw);
}

double noise_power_dbm(double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) {
    throw std::domain_error("noise_power_dbm: bandwidth must be positive");
  }
  return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

double rsrp_from_rssi(double rssi_dbm, int num_rbs) {
  if (num_rbs < 1) {
    throw std::domain_error("rsrp_from_rssi: num_rbs must be >= 1");
  }
  return rssi_dbm - 10.0 * std::log10(12.0 * num_rbs);
}

double rsrq(double rssi_dbm, double rsrp_dbm, int num_rbs, RsrqMode mode) {
  if (num_rbs < 1) {
    throw std::domain_error("rsrq: num_rbs must be >= 1");
  }
  if (mode == RsrqMode::kLiteralDb) {
    if (rsrp_dbm == 0.0) {
      throw std::domain_error("rsrq: literal-db mode divides by rsrp_dbm == 0");
    }
    return num_rbs * (rssi_dbm / rsrp_dbm);
  }
  const double rssi_mw = dbm_to_mw(rssi_dbm);
  const double rsrp_mw = dbm_to_mw(rsrp_dbm);
  if (!(rssi_mw > 0.0)) {
    throw std::domain_error("rsrq: RSSI power must be positive");
  }
  return 10.0 * std::log10(num_rbs * (rsrp_mw / rssi_mw));
}

double sinr(double rsrp_dbm, double noise_dbm,
            const std::vector<double>& interference_mw) {
  if (!std::isfinite(noise_dbm)) {
    throw std::domain_error("sinr: noise power must be finite");
  }
  double denom_mw = dbm_to_mw(noise_dbm);
  for (double i_mw : interference_mw) {
    if (i_mw < 0.0) {
      throw std::domain_error("sinr: interference power must be >= 0");
    }
    denom_mw += i_mw;
  }
  if (!(denom_mw > 0.0)) {
    throw std::domain_error("sinr: noise-plus-interference underflowed to zero");
  }
  if (interference_mw.empty()) {
    // dB-domain identity; avoids the mW round trip entirely
    return rsrp_dbm - noise_dbm;
  }
  return 10.0 * std::log10(dbm_to_mw(rsrp_dbm) / denom_mw);
}

double cqi_raw_from_sinr(double sinr_db) {
  if (!std::isfinite(sinr_db)) {
    throw std::domain_error("cqi_raw_from_sinr: SINR must be finite");
  }
  return 0.5223 * sinr_db + 4.6176;
}

int quantize_cqi(double cqi_raw) {
  // std::round ties away from zero, which is the documented rule
  const double r = std::round(cqi_raw);
  if (r < 0.0) return 0;
  if (r > 15.0) return 15;
  return static_cast<int>(r);
}

CqiResult cqi_from_sinr(double sinr_db) {
  const double raw = cqi_raw_from_sinr(sinr_db);
  return CqiResult{raw, quantize_cqi(raw)};
}

LinkMetrics quality_model(const LinkBudget& link) {
  if (!(link.bandwidth_hz > 0.0)) {
    throw std::domain_error("quality_model: bandwidth must be positive");
  }
  const double noise =
      link.noise_dbm ? *link.noise_dbm : noise_power_dbm(link.bandwidth_hz);

  LinkMetrics m;
  m.rsrp_dbm = rsrp_from_rssi(link.rssi_dbm, link.num_rbs);
  m.rsrq_db = rsrq(link.rssi_dbm, m.rsrp_dbm, link.num_rbs);
  m.sinr_db = sinr(m.rsrp_dbm, noise, link.interference_mw);
  const CqiResult c = cqi_from_sinr(m.sinr_db);
  m.cqi_raw = c.cqi_raw;
  m.cqi = c.cqi;
  return m;
}

}  // namespace ioeq
