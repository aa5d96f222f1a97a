#pragma once

#include <optional>
#include <vector>

namespace ioeq {

// Inputs of the link-quality chain for one user/gNB pair.
struct LinkBudget {
  double rssi_dbm = 0.0;
  int num_rbs = 100;                      // physical resource blocks J
  double bandwidth_hz = 20e6;             // channel bandwidth W
  std::vector<double> interference_mw{};  // per-interferer received power, mW
  std::optional<double> noise_dbm{};      // measured noise; derived from W when absent
};

// Outputs of the chain. cqi_raw is the unquantized affine map of SINR;
// cqi is the 4-bit index actually reported.
struct LinkMetrics {
  double rsrp_dbm = 0.0;
  double rsrq_db = 0.0;
  double sinr_db = 0.0;
  double cqi_raw = 0.0;
  int cqi = 0;
};

enum class RsrqMode {
  kLinearDomain,  // convert dBm to mW, 10*log10(J * rsrp_mw / rssi_mw)
  kLiteralDb,     // J * (rssi_dbm / rsrp_dbm), no unit conversion
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);

// Thermal noise floor for bandwidth W: -174 + 10*log10(W).
double noise_power_dbm(double bandwidth_hz);

// RSRP from wideband RSSI over J resource blocks of 12 subcarriers each:
// rssi_dbm - 10*log10(12*J).
double rsrp_from_rssi(double rssi_dbm, int num_rbs);

// RSRQ. The default linear-domain mode is the 3GPP-convention ratio
// N*RSRP/RSSI evaluated in milliwatts; kLiteralDb reproduces the dB-valued
// ratio J*rssi/rsrp as typeset, for auditing only.
double rsrq(double rssi_dbm, double rsrp_dbm, int num_rbs,
            RsrqMode mode = RsrqMode::kLinearDomain);

// SINR in dB: 10*log10(rsrp_mw / (noise_mw + sum(interference_mw))).
double sinr(double rsrp_dbm, double noise_dbm,
            const std::vector<double>& interference_mw);

// CQI affine map of SINR: raw = 0.5223*sinr + 4.6176, quantized to [0, 15]
// with ties rounded half away from zero.
double cqi_raw_from_sinr(double sinr_db);
int quantize_cqi(double cqi_raw);

struct CqiResult {
  double cqi_raw;
  int cqi;
};
CqiResult cqi_from_sinr(double sinr_db);

// Full composed quality model: RSSI -> RSRP -> SINR -> CQI with RSRQ
// alongside. Exactly the composition of the individual operations.
LinkMetrics quality_model(const LinkBudget& link);

}  // namespace ioeq
