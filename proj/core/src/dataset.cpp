#include "ioeq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "ioeq/csv.hpp"
#include "ioeq/kv.hpp"
#include "ioeq/radio_metrics.hpp"
#include "ioeq/rng.hpp"
#include "ioeq/stats.hpp"

namespace ioeq {

const std::vector<std::string>& canonical_columns() {
  static const std::vector<std::string> cols = {
      "timestamp", "cell_id", "speed_kmh", "rssi_dbm", "rsrp_dbm", "rsrq_db",
      "sinr_db",   "cqi",     "dl_mbps",   "ul_mbps",  "pos_x",    "pos_y"};
  return cols;
}

int canonical_field_index(const std::string& name) {
  const auto& cols = canonical_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == name) return static_cast<int>(i);
  }
  return -1;
}

double record_field(const SessionRecord& rec, const std::string& name) {
  if (name == "timestamp") return rec.timestamp;
  if (name == "cell_id") return static_cast<double>(rec.cell_id);
  if (name == "speed_kmh") return rec.speed_kmh;
  if (name == "rssi_dbm") return rec.rssi_dbm;
  if (name == "rsrp_dbm") return rec.rsrp_dbm;
  if (name == "rsrq_db") return rec.rsrq_db;
  if (name == "sinr_db") return rec.sinr_db;
  if (name == "cqi") return static_cast<double>(rec.cqi);
  if (name == "dl_mbps") return rec.dl_mbps;
  if (name == "ul_mbps") return rec.ul_mbps;
  if (name == "pos_x") return rec.pos_x.value_or(0.0);
  if (name == "pos_y") return rec.pos_y.value_or(0.0);
  throw std::out_of_range("unknown canonical field: " + name);
}

namespace {

void set_record_field(SessionRecord& rec, const std::string& name, double v) {
  if (name == "timestamp") rec.timestamp = v;
  else if (name == "cell_id") rec.cell_id = static_cast<int>(std::llround(v));
  else if (name == "speed_kmh") rec.speed_kmh = v;
  else if (name == "rssi_dbm") rec.rssi_dbm = v;
  else if (name == "rsrp_dbm") rec.rsrp_dbm = v;
  else if (name == "rsrq_db") rec.rsrq_db = v;
  else if (name == "sinr_db") rec.sinr_db = v;
  else if (name == "cqi") rec.cqi = static_cast<int>(std::llround(v));
  else if (name == "dl_mbps") rec.dl_mbps = v;
  else if (name == "ul_mbps") rec.ul_mbps = v;
  else if (name == "pos_x") rec.pos_x = v;
  else if (name == "pos_y") rec.pos_y = v;
  else throw std::out_of_range("unknown canonical field: " + name);
}

bool is_optional_field(const std::string& name) {
  return name == "pos_x" || name == "pos_y";
}

}  // namespace

// --- ColumnMapping -----------------------------------------------------------

ColumnMapping ColumnMapping::identity() {
  ColumnMapping m;
  for (const auto& c : canonical_columns()) {
    m.entries.push_back({c, c, 1.0});
  }
  return m;
}

ColumnMapping ColumnMapping::parse_text(const std::string& text) {
  const KvFile kv = KvFile::parse_text(text);
  ColumnMapping m;
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("sentinel", 0) == 0) {
      m.sentinels.push_back(value);
      continue;
    }
    Entry e;
    e.source = key;
    const auto colon = value.find(':');
    if (colon == std::string::npos) {
      e.canonical = value;
    } else {
      e.canonical = value.substr(0, colon);
      e.scale = parse_double(value.substr(colon + 1));
    }
    if (canonical_field_index(e.canonical) < 0) {
      throw std::runtime_error("mapping targets unknown canonical field: " +
                               e.canonical);
    }
    m.entries.push_back(std::move(e));
  }
  std::set<std::string> seen;
  for (const auto& e : m.entries) {
    if (!seen.insert(e.canonical).second) {
      throw std::runtime_error("canonical field mapped twice: " + e.canonical);
    }
  }
  for (const auto& c : canonical_columns()) {
    if (!is_optional_field(c) && !seen.count(c)) {
      throw std::runtime_error("required canonical field not mapped: " + c);
    }
  }
  return m;
}

ColumnMapping ColumnMapping::parse_file(const std::string& path) {
  const KvFile kv = KvFile::parse_file(path);
  return parse_text(kv.serialize());
}

// --- ingestion ---------------------------------------------------------------

Dataset ingest_csv(const std::string& path, const ColumnMapping& mapping,
                   IngestStats* stats) {
  const CsvTable table = read_csv(path);

  struct Resolved {
    int src_col;
    std::string canonical;
    double scale;
    int field_idx;
  };
  std::vector<Resolved> resolved;
  for (const auto& e : mapping.entries) {
    const int col = table.column(e.source);
    if (col < 0) {
      throw std::runtime_error("mapping references absent column: " + e.source);
    }
    resolved.push_back({col, e.canonical, e.scale, canonical_field_index(e.canonical)});
  }

  auto is_sentinel = [&mapping](const std::string& v) {
    if (v.empty()) return true;
    return std::find(mapping.sentinels.begin(), mapping.sentinels.end(), v) !=
           mapping.sentinels.end();
  };

  Dataset ds;
  ds.feature_names = canonical_columns();
  IngestStats st;
  st.rows_read = static_cast<int>(table.rows.size());

  for (const auto& row : table.rows) {
    SessionRecord rec;
    bool drop = false;
    bool flagged = false;
    for (const auto& r : resolved) {
      if (r.src_col >= static_cast<int>(row.size())) {
        drop = true;
        break;
      }
      const std::string& raw = row[static_cast<std::size_t>(r.src_col)];
      if (is_sentinel(raw)) {
        if (!is_optional_field(r.canonical)) {
          rec.missing_mask |= 1u << static_cast<unsigned>(r.field_idx);
          flagged = true;
        }
        continue;
      }
      double v;
      try {
        v = parse_double(raw) * r.scale;
      } catch (const std::exception&) {
        drop = true;
        break;
      }
      set_record_field(rec, r.canonical, v);
    }
    if (drop) {
      ++st.rows_dropped;
      continue;
    }
    if (flagged) ++st.rows_flagged;
    ++st.rows_kept;
    ds.records.push_back(std::move(rec));
  }

  if (ds.records.empty()) {
    throw std::runtime_error("ingest: no rows survived validation in " + path);
  }
  if (stats) *stats = st;
  return ds;
}

void save_dataset_csv(const std::string& path, const Dataset& ds) {
  CsvTable t;
  t.header = canonical_columns();
  t.rows.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    std::vector<std::string> row;
    row.reserve(t.header.size());
    for (const auto& col : t.header) {
      const int fi = canonical_field_index(col);
      if (rec.missing_mask & (1u << static_cast<unsigned>(fi))) {
        row.emplace_back();
        continue;
      }
      if (col == "pos_x") {
        row.push_back(rec.pos_x ? format_double(*rec.pos_x) : "");
      } else if (col == "pos_y") {
        row.push_back(rec.pos_y ? format_double(*rec.pos_y) : "");
      } else if (col == "cell_id") {
        row.push_back(std::to_string(rec.cell_id));
      } else if (col == "cqi") {
        row.push_back(std::to_string(rec.cqi));
      } else {
        row.push_back(format_double(record_field(rec, col)));
      }
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

Dataset load_dataset_csv(const std::string& path) {
  return ingest_csv(path, ColumnMapping::identity());
}

void save_sites_csv(const std::string& path, const std::vector<GnbSite>& sites) {
  CsvTable t;
  t.header = {"cell_id", "pos_x", "pos_y", "tx_power_dbm", "coverage_radius_m"};
  for (const auto& s : sites) {
    t.rows.push_back({std::to_string(s.cell_id), format_double(s.pos_x),
                      format_double(s.pos_y), format_double(s.tx_power_dbm),
                      format_double(s.coverage_radius_m)});
  }
  write_csv(path, t);
}

std::vector<GnbSite> load_sites_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const int c_id = t.column("cell_id");
  const int c_x = t.column("pos_x");
  const int c_y = t.column("pos_y");
  const int c_tx = t.column("tx_power_dbm");
  const int c_r = t.column("coverage_radius_m");
  if (c_id < 0 || c_x < 0 || c_y < 0 || c_tx < 0 || c_r < 0) {
    throw std::runtime_error("sites file missing required columns: " + path);
  }
  std::vector<GnbSite> sites;
  for (const auto& row : t.rows) {
    GnbSite s;
    s.cell_id = static_cast<int>(parse_int(row[static_cast<std::size_t>(c_id)]));
    s.pos_x = parse_double(row[static_cast<std::size_t>(c_x)]);
    s.pos_y = parse_double(row[static_cast<std::size_t>(c_y)]);
    s.tx_power_dbm = parse_double(row[static_cast<std::size_t>(c_tx)]);
    s.coverage_radius_m = parse_double(row[static_cast<std::size_t>(c_r)]);
    sites.push_back(s);
  }
  return sites;
}

// --- validation ----------------------------------------------------------------

ValidationReport validate(const Dataset& ds) {
  ValidationReport report;
  auto field_present = [](const SessionRecord& r, const char* name) {
    const int fi = canonical_field_index(name);
    return (r.missing_mask & (1u << static_cast<unsigned>(fi))) == 0;
  };

  std::set<int> known_cells;
  for (const auto& s : ds.topology) known_cells.insert(s.cell_id);

  std::map<std::pair<int, double>, int> first_seen;  // (cell, timestamp) -> row
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    const int row = static_cast<int>(i);
    if (field_present(r, "speed_kmh") && r.speed_kmh < 0.0) {
      report.violations.push_back({row, "speed_kmh", "negative speed"});
    }
    if (field_present(r, "dl_mbps") && r.dl_mbps < 0.0) {
      report.violations.push_back({row, "dl_mbps", "negative downlink rate"});
    }
    if (field_present(r, "ul_mbps") && r.ul_mbps < 0.0) {
      report.violations.push_back({row, "ul_mbps", "negative uplink rate"});
    }
    if (field_present(r, "cqi") && (r.cqi < 0 || r.cqi > 15)) {
      report.violations.push_back({row, "cqi", "CQI outside [0, 15]"});
    }
    if (!ds.topology.empty() && field_present(r, "cell_id") &&
        !known_cells.count(r.cell_id)) {
      report.violations.push_back(
          {row, "cell_id", "cell id not declared in topology"});
    }
    if (field_present(r, "timestamp") && field_present(r, "cell_id")) {
      auto key = std::make_pair(r.cell_id, r.timestamp);
      auto [it, inserted] = first_seen.emplace(key, row);
      if (!inserted) {
        report.violations.push_back(
            {row, "timestamp",
             "duplicate timestamp for cell (first at row " +
                 std::to_string(it->second) + ")"});
      }
    }
  }
  return report;
}

// --- split ----------------------------------------------------------------------

void train_test_split(Dataset& ds, int n_train, int n_test, std::uint64_t seed) {
  const int n = static_cast<int>(ds.records.size());
  if (n_train < 0 || n_test < 0) {
    throw std::invalid_argument("train_test_split: negative partition size");
  }
  if (n_train + n_test > n) {
    throw std::invalid_argument(
        "train_test_split: requested " + std::to_string(n_train + n_test) +
        " rows from a dataset of " + std::to_string(n));
  }
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;

  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }

  DatasetSplit split;
  split.train.assign(idx.begin(), idx.begin() + n_train);
  split.test.assign(idx.begin() + n_train, idx.begin() + n_train + n_test);
  ds.split = std::move(split);
}

// --- synthetic generation ---------------------------------------------------------

std::vector<GnbSite> place_sites_grid(int count, double spacing_m,
                                      double tx_power_dbm,
                                      double coverage_radius_m) {
  if (count < 1) {
    throw std::invalid_argument("place_sites_grid: count must be >= 1");
  }
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
  const int rows = (count + cols - 1) / cols;
  std::vector<GnbSite> sites;
  sites.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int r = i / cols;
    const int c = i % cols;
    GnbSite s;
    s.cell_id = i + 1;
    s.pos_x = (c - (cols - 1) / 2.0) * spacing_m;
    s.pos_y = (r - (rows - 1) / 2.0) * spacing_m;
    s.tx_power_dbm = tx_power_dbm;
    s.coverage_radius_m = coverage_radius_m;
    sites.push_back(s);
  }
  return sites;
}

double path_loss_db(double distance_m, const ScenarioConfig& cfg) {
  const double d = std::max(distance_m, cfg.ref_distance_m);
  return cfg.path_loss_ref_db +
         10.0 * cfg.path_loss_exp * std::log10(d / cfg.ref_distance_m);
}

double site_rsrp_dbm(const GnbSite& site, double x, double y,
                     const ScenarioConfig& cfg) {
  const double dx = x - site.pos_x;
  const double dy = y - site.pos_y;
  const double d = std::sqrt(dx * dx + dy * dy);
  const double tx_per_re =
      site.tx_power_dbm - 10.0 * std::log10(12.0 * cfg.num_rbs);
  return tx_per_re - path_loss_db(d, cfg);
}

double rate_curve_mbps(double cap_mbps, int cqi, const ScenarioConfig& cfg) {
  const double z = cfg.rate_curve_gain * (cqi - cfg.rate_curve_center);
  return cap_mbps / (1.0 + std::exp(-z));
}

namespace {

void check_scenario(const ScenarioConfig& cfg) {
  if (cfg.sites.empty()) throw std::invalid_argument("scenario: no gNB sites");
  if (cfg.sessions < 1) throw std::invalid_argument("scenario: sessions must be >= 1");
  if (cfg.max_speed_kmh < 0) throw std::invalid_argument("scenario: negative max speed");
  if (!(cfg.dl_cap_mbps > 0) || !(cfg.ul_cap_mbps > 0)) {
    throw std::invalid_argument("scenario: rate caps must be positive");
  }
  if (!(cfg.bandwidth_hz > 0)) throw std::invalid_argument("scenario: bandwidth must be positive");
  if (cfg.num_rbs < 1) throw std::invalid_argument("scenario: num_rbs must be >= 1");
  if (!(cfg.ref_distance_m > 0)) throw std::invalid_argument("scenario: ref distance must be positive");
  if (cfg.shadowing_sigma_db < 0) throw std::invalid_argument("scenario: negative shadowing sigma");
  if (cfg.rate_noise_sigma < 0) throw std::invalid_argument("scenario: negative rate noise sigma");
  for (const auto& s : cfg.sites) {
    if (!(s.coverage_radius_m > 0)) {
      throw std::invalid_argument("scenario: coverage radius must be positive");
    }
  }
}

}  // namespace

Dataset synth_generate(const ScenarioConfig& cfg) {
  check_scenario(cfg);

  double min_x = cfg.sites[0].pos_x, max_x = cfg.sites[0].pos_x;
  double min_y = cfg.sites[0].pos_y, max_y = cfg.sites[0].pos_y;
  double mean_radius = 0.0;
  for (const auto& s : cfg.sites) {
    min_x = std::min(min_x, s.pos_x);
    max_x = std::max(max_x, s.pos_x);
    min_y = std::min(min_y, s.pos_y);
    max_y = std::max(max_y, s.pos_y);
    mean_radius += s.coverage_radius_m;
  }
  mean_radius /= static_cast<double>(cfg.sites.size());
  const double margin = 0.5 * mean_radius;  // users roam slightly past the grid
  min_x -= margin; max_x += margin;
  min_y -= margin; max_y += margin;

  const double noise_dbm = noise_power_dbm(cfg.bandwidth_hz);
  const double noise_mw = dbm_to_mw(noise_dbm);
  const double re_to_wideband_db = 10.0 * std::log10(12.0 * cfg.num_rbs);

  Dataset ds;
  ds.feature_names = canonical_columns();
  ds.topology = cfg.sites;
  ds.records.reserve(static_cast<std::size_t>(cfg.sessions));

  const std::size_t n_sites = cfg.sites.size();
  std::vector<double> per_re_dbm(n_sites);

  for (int i = 0; i < cfg.sessions; ++i) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const double x = rng.uniform(min_x, max_x);
    const double y = rng.uniform(min_y, max_y);
    const double speed = rng.uniform(0.0, cfg.max_speed_kmh);

    int serving = 0;
    for (std::size_t b = 0; b < n_sites; ++b) {
      const double shadow =
          cfg.shadowing_sigma_db > 0 ? rng.normal(0.0, cfg.shadowing_sigma_db) : 0.0;
      per_re_dbm[b] = site_rsrp_dbm(cfg.sites[b], x, y, cfg) - shadow;
      if (per_re_dbm[b] > per_re_dbm[static_cast<std::size_t>(serving)]) {
        serving = static_cast<int>(b);
      }
    }

    // wideband RSSI: every site's full-band received power
    double rssi_dbm;
    if (n_sites == 1) {
      rssi_dbm = per_re_dbm[0] + re_to_wideband_db;
    } else {
      double total_mw = 0.0;
      for (std::size_t b = 0; b < n_sites; ++b) {
        total_mw += dbm_to_mw(per_re_dbm[b] + re_to_wideband_db);
      }
      rssi_dbm = mw_to_dbm(total_mw);
    }

    std::vector<double> interference_mw;
    interference_mw.reserve(n_sites - 1);
    for (std::size_t b = 0; b < n_sites; ++b) {
      if (static_cast<int>(b) != serving) {
        interference_mw.push_back(dbm_to_mw(per_re_dbm[b]));
      }
    }

    SessionRecord rec;
    rec.timestamp = cfg.start_timestamp + i;
    rec.cell_id = cfg.sites[static_cast<std::size_t>(serving)].cell_id;
    rec.speed_kmh = speed;
    rec.rssi_dbm = rssi_dbm;
    rec.rsrp_dbm = per_re_dbm[static_cast<std::size_t>(serving)];
    rec.rsrq_db = rsrq(rec.rssi_dbm, rec.rsrp_dbm, cfg.num_rbs);
    rec.sinr_db = sinr(rec.rsrp_dbm, noise_dbm, interference_mw);
    rec.cqi = quantize_cqi(cqi_raw_from_sinr(rec.sinr_db));

    const double dl_noise = std::exp(cfg.rate_noise_sigma * rng.normal());
    const double ul_noise = std::exp(cfg.rate_noise_sigma * rng.normal());
    rec.dl_mbps = std::min(cfg.dl_cap_mbps,
                           rate_curve_mbps(cfg.dl_cap_mbps, rec.cqi, cfg) * dl_noise);
    rec.ul_mbps = std::min(cfg.ul_cap_mbps,
                           rate_curve_mbps(cfg.ul_cap_mbps, rec.cqi, cfg) * ul_noise);
    rec.pos_x = x;
    rec.pos_y = y;
    ds.records.push_back(std::move(rec));

    (void)noise_mw;
  }
  return ds;
}

ScenarioConfig ScenarioConfig::from_kv_text(const std::string& text) {
  const KvFile kv = KvFile::parse_text(text);
  ScenarioConfig cfg;
  cfg.sessions = static_cast<int>(kv.get_int_or("sessions", cfg.sessions));
  cfg.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", static_cast<long long>(cfg.seed)));
  cfg.max_speed_kmh = kv.get_double_or("max_speed_kmh", cfg.max_speed_kmh);
  cfg.dl_cap_mbps = kv.get_double_or("dl_cap_mbps", cfg.dl_cap_mbps);
  cfg.ul_cap_mbps = kv.get_double_or("ul_cap_mbps", cfg.ul_cap_mbps);
  cfg.bandwidth_hz = kv.get_double_or("bandwidth_hz", cfg.bandwidth_hz);
  cfg.num_rbs = static_cast<int>(kv.get_int_or("num_rbs", cfg.num_rbs));
  cfg.path_loss_exp = kv.get_double_or("path_loss_exp", cfg.path_loss_exp);
  cfg.path_loss_ref_db = kv.get_double_or("path_loss_ref_db", cfg.path_loss_ref_db);
  cfg.ref_distance_m = kv.get_double_or("ref_distance_m", cfg.ref_distance_m);
  cfg.shadowing_sigma_db = kv.get_double_or("shadowing_sigma_db", cfg.shadowing_sigma_db);
  cfg.rate_curve_gain = kv.get_double_or("rate_curve_gain", cfg.rate_curve_gain);
  cfg.rate_curve_center = kv.get_double_or("rate_curve_center", cfg.rate_curve_center);
  cfg.rate_noise_sigma = kv.get_double_or("rate_noise_sigma", cfg.rate_noise_sigma);
  cfg.start_timestamp = kv.get_double_or("start_timestamp", cfg.start_timestamp);

  const double tx = kv.get_double_or("gnb_tx_power_dbm", 49.0);
  const double radius = kv.get_double_or("gnb_coverage_radius_m", 600.0);

  // explicit `gnbN = x y` entries override grid placement
  std::vector<GnbSite> explicit_sites;
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("gnb", 0) == 0 && key.size() > 3 &&
        std::isdigit(static_cast<unsigned char>(key[3]))) {
      GnbSite s;
      s.cell_id = static_cast<int>(parse_int(key.substr(3)));
      const auto space = value.find(' ');
      if (space == std::string::npos) {
        throw std::runtime_error("site entry needs `x y`: " + key);
      }
      s.pos_x = parse_double(value.substr(0, space));
      std::string rest = value.substr(space + 1);
      const auto b = rest.find_first_not_of(' ');
      s.pos_y = parse_double(rest.substr(b == std::string::npos ? 0 : b));
      s.tx_power_dbm = tx;
      s.coverage_radius_m = radius;
      explicit_sites.push_back(s);
    }
  }
  if (!explicit_sites.empty()) {
    cfg.sites = std::move(explicit_sites);
  } else {
    const int count = static_cast<int>(kv.get_int_or("gnb_count", 8));
    const double spacing = kv.get_double_or("gnb_spacing_m", 500.0);
    cfg.sites = place_sites_grid(count, spacing, tx, radius);
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::from_kv_file(const std::string& path) {
  const KvFile kv = KvFile::parse_file(path);
  return from_kv_text(kv.serialize());
}

// --- summary statistics -------------------------------------------------------

std::vector<FieldStats> summary_stats(const Dataset& ds) {
  if (ds.records.empty()) {
    throw std::invalid_argument("summary_stats: empty dataset");
  }
  std::vector<FieldStats> out;
  for (const auto& col : canonical_columns()) {
    const int fi = canonical_field_index(col);
    std::vector<double> values;
    values.reserve(ds.records.size());
    for (const auto& r : ds.records) {
      if (r.missing_mask & (1u << static_cast<unsigned>(fi))) continue;
      if ((col == "pos_x" && !r.pos_x) || (col == "pos_y" && !r.pos_y)) continue;
      values.push_back(record_field(r, col));
    }
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    FieldStats fs;
    fs.field = col;
    fs.min = values.front();
    fs.max = values.back();
    fs.p25 = nearest_rank(values, 25.0);
    fs.p50 = nearest_rank(values, 50.0);
    fs.p75 = nearest_rank(values, 75.0);
    fs.mean = mean_of(values);
    out.push_back(fs);
  }
  return out;
}

void save_stats_csv(const std::string& path, const std::vector<FieldStats>& stats) {
  CsvTable t;
  t.header = {"field", "min", "p25", "p50", "p75", "max", "mean"};
  for (const auto& s : stats) {
    t.rows.push_back({s.field, format_double(s.min), format_double(s.p25),
                      format_double(s.p50), format_double(s.p75),
                      format_double(s.max), format_double(s.mean)});
  }
  write_csv(path, t);
}

// --- model feature extraction ----------------------------------------------------

const std::vector<std::string>& model_feature_candidates() {
  static const std::vector<std::string> names = {
      "speed_kmh", "rssi_dbm", "rsrp_dbm", "rsrq_db", "sinr_db",
      "cell_id",   "cqi",      "dl_mbps",  "ul_mbps"};
  return names;
}

FeatureMatrix build_features(const Dataset& ds, const std::vector<int>& rows,
                             const std::string& target, bool include_cell_id) {
  const auto& candidates = model_feature_candidates();
  if (std::find(candidates.begin(), candidates.end(), target) == candidates.end()) {
    throw std::invalid_argument("build_features: unknown target " + target);
  }
  FeatureMatrix fm;
  fm.target_name = target;
  for (const auto& name : candidates) {
    if (name == target) continue;
    if (name == "cell_id" && !include_cell_id) continue;
    fm.feature_names.push_back(name);
  }

  std::uint32_t used_mask = 0;
  for (const auto& name : fm.feature_names) {
    used_mask |= 1u << static_cast<unsigned>(canonical_field_index(name));
  }
  used_mask |= 1u << static_cast<unsigned>(canonical_field_index(target));

  for (int row : rows) {
    if (row < 0 || row >= static_cast<int>(ds.records.size())) {
      throw std::out_of_range("build_features: row index out of range");
    }
    const auto& rec = ds.records[static_cast<std::size_t>(row)];
    if (rec.missing_mask & used_mask) {
      ++fm.rows_skipped_missing;
      continue;
    }
    std::vector<double> xrow;
    xrow.reserve(fm.feature_names.size());
    for (const auto& name : fm.feature_names) {
      xrow.push_back(record_field(rec, name));
    }
    fm.x.push_back(std::move(xrow));
    fm.y.push_back(record_field(rec, target));
    fm.row_indices.push_back(row);
  }
  return fm;
}

}  // namespace ioeq
