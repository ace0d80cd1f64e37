#pragma once

// File schemas. CSV files are comma separated with a mandatory header row and
// optional leading "# key=value" metadata lines. Every dimensioned column or
// JSON key carries its unit as a suffix (tau_s, f_q_hz, ...); parsing rejects
// missing units. Values are converted to SI at parse. Canonical files (the
// ones this library writes) use SI suffixes and shortest round-trip number
// formatting, so serialize(parse(x)) is byte-identical for them.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qlab/errors.hpp"
#include "qlab/types.hpp"

namespace qlab::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Number formatting / parsing
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ValidationError(where + ": malformed number '" + std::string(tok) + "'");
  return v;
}

inline long parse_long(std::string_view tok, const std::string& where) {
  long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ValidationError(where + ": malformed integer '" + std::string(tok) + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Units
// ---------------------------------------------------------------------------

// Factor that converts a value in `unit` to its SI base (s, hz, k, 1).
inline std::optional<double> unit_factor(std::string_view unit) {
  if (unit == "s") return 1.0;
  if (unit == "ms") return 1e-3;
  if (unit == "us") return 1e-6;
  if (unit == "ns") return 1e-9;
  if (unit == "hz") return 1.0;
  if (unit == "khz") return 1e3;
  if (unit == "mhz") return 1e6;
  if (unit == "ghz") return 1e9;
  if (unit == "k") return 1.0;
  if (unit == "mk") return 1e-3;
  if (unit == "days") return 1.0;  // elapsed time is kept in days
  if (unit == "1") return 1.0;     // dimensionless
  return std::nullopt;
}

// Split "f_q_ghz" into {"f_q", 1e9}. Throws when the suffix is missing or
// unknown: all dimensioned fields must declare a unit.
inline std::pair<std::string, double> split_unit_suffix(
    const std::string& name, const std::string& where) {
  const auto pos = name.rfind('_');
  if (pos != std::string::npos) {
    const std::string suffix = name.substr(pos + 1);
    if (const auto f = unit_factor(suffix))
      return {name.substr(0, pos), *f};
  }
  throw ValidationError(where + ": field '" + name +
                        "' is missing a unit suffix");
}

// ---------------------------------------------------------------------------
// Raw CSV plumbing
// ---------------------------------------------------------------------------

namespace detail {

struct CsvDocument {
  std::map<std::string, std::string> metadata;  // from "# key=value" lines
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

inline CsvDocument read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  CsvDocument doc;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq != std::string::npos)
        doc.metadata[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (!have_header) {
      doc.header = split_fields(line);
      have_header = true;
    } else {
      doc.rows.push_back(split_fields(line));
    }
  }
  if (!have_header)
    throw ValidationError(path.string() + ": missing mandatory header row");
  return doc;
}

inline void check_field_count(const CsvDocument& doc, std::size_t row,
                              const std::string& where) {
  if (doc.rows[row].size() != doc.header.size())
    throw ValidationError(where + ": row " + std::to_string(row + 1) +
                          " has " + std::to_string(doc.rows[row].size()) +
                          " fields, expected " +
                          std::to_string(doc.header.size()));
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

inline std::string metadata_block(
    const std::map<std::string, std::string>& metadata) {
  std::string s;
  for (const auto& [k, v] : metadata) s += "# " + k + "=" + v + "\n";
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Decay curves: header `tau_s,p1` (+ optional `# shots=` metadata)
// ---------------------------------------------------------------------------

inline DecayCurve read_decay_csv(const std::filesystem::path& path) {
  const auto doc = detail::read_csv(path);
  const std::string where = path.string();
  if (doc.header.size() != 2)
    throw ValidationError(where + ": decay schema expects columns tau_<unit>,p1");
  const auto [tau_name, tau_factor] = split_unit_suffix(doc.header[0], where);
  if (tau_name != "tau")
    throw ValidationError(where + ": expected column 'tau_s', found '" +
                          doc.header[0] + "'");
  if (doc.header[1] != "p1")
    throw ValidationError(where + ": expected column 'p1', found '" +
                          doc.header[1] + "'");
  DecayCurve curve;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    detail::check_field_count(doc, r, where);
    const std::string row_where = where + " row " + std::to_string(r + 1);
    curve.delays_s.push_back(tau_factor * parse_double(doc.rows[r][0], row_where));
    curve.populations.push_back(parse_double(doc.rows[r][1], row_where));
  }
  if (const auto it = doc.metadata.find("shots"); it != doc.metadata.end())
    curve.shots_per_point = parse_long(it->second, where + " metadata shots");
  validate(curve);
  return curve;
}

inline void write_decay_csv(
    const std::filesystem::path& path, const DecayCurve& curve,
    std::map<std::string, std::string> metadata = {}) {
  validate(curve);
  if (curve.shots_per_point > 0)
    metadata["shots"] = std::to_string(curve.shots_per_point);
  std::string s = detail::metadata_block(metadata);
  s += "tau_s,p1\n";
  for (std::size_t i = 0; i < curve.delays_s.size(); ++i)
    s += format_double(curve.delays_s[i]) + "," +
         format_double(curve.populations[i]) + "\n";
  detail::write_text_file(path, s);
}

// ---------------------------------------------------------------------------
// Ramsey curves: CSV `tau_s,p1` plus JSON sidecar `<csv>.json` with
// {detuning_hz, t_max_s, shots}
// ---------------------------------------------------------------------------

inline std::filesystem::path ramsey_sidecar_path(
    const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p += ".json";
  return p;
}

inline RamseyCurve read_ramsey_csv(const std::filesystem::path& path) {
  const auto doc = detail::read_csv(path);
  const std::string where = path.string();
  if (doc.header.size() != 2)
    throw ValidationError(where + ": ramsey schema expects columns tau_<unit>,p1");
  const auto [tau_name, tau_factor] = split_unit_suffix(doc.header[0], where);
  if (tau_name != "tau" || doc.header[1] != "p1")
    throw ValidationError(where + ": expected header 'tau_s,p1'");

  const auto sidecar = ramsey_sidecar_path(path);
  std::ifstream side(sidecar);
  if (!side) throw IoError("cannot open ramsey sidecar " + sidecar.string());
  json meta = json::parse(side, nullptr, true, true);

  RamseyCurve curve;
  bool have_detuning = false, have_tmax = false;
  for (const auto& [key, value] : meta.items()) {
    if (key == "shots") {
      curve.shots_per_point = value.get<long>();
      continue;
    }
    const auto [base, factor] = split_unit_suffix(key, sidecar.string());
    if (base == "detuning") {
      curve.set_detuning_hz = factor * value.get<double>();
      have_detuning = true;
    } else if (base == "t_max") {
      curve.t_max_s = factor * value.get<double>();
      have_tmax = true;
    } else {
      throw ValidationError(sidecar.string() + ": unexpected field '" + key + "'");
    }
  }
  if (!have_detuning)
    throw ValidationError(sidecar.string() + ": missing field 'detuning_hz'");
  if (!have_tmax)
    throw ValidationError(sidecar.string() + ": missing field 't_max_s'");

  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    detail::check_field_count(doc, r, where);
    const std::string row_where = where + " row " + std::to_string(r + 1);
    curve.delays_s.push_back(tau_factor * parse_double(doc.rows[r][0], row_where));
    curve.populations.push_back(parse_double(doc.rows[r][1], row_where));
  }
  validate(curve);
  return curve;
}

inline void write_ramsey_csv(
    const std::filesystem::path& path, const RamseyCurve& curve,
    std::map<std::string, std::string> metadata = {}) {
  validate(curve);
  std::string s = detail::metadata_block(metadata);
  s += "tau_s,p1\n";
  for (std::size_t i = 0; i < curve.delays_s.size(); ++i)
    s += format_double(curve.delays_s[i]) + "," +
         format_double(curve.populations[i]) + "\n";
  detail::write_text_file(path, s);

  json side;
  side["detuning_hz"] = curve.set_detuning_hz;
  side["t_max_s"] = curve.t_max_s;
  side["shots"] = curve.shots_per_point;
  detail::write_text_file(ramsey_sidecar_path(path), side.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// IQ shot sets: header `i,q,prepared_state`
// ---------------------------------------------------------------------------

inline IqShotSet read_iq_csv(const std::filesystem::path& path) {
  const auto doc = detail::read_csv(path);
  const std::string where = path.string();
  const std::vector<std::string> expected = {"i", "q", "prepared_state"};
  if (doc.header != expected)
    throw ValidationError(where + ": expected header 'i,q,prepared_state'");
  IqShotSet set;
  long n0 = 0, n1 = 0;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    detail::check_field_count(doc, r, where);
    const std::string row_where = where + " row " + std::to_string(r + 1);
    IqShot shot;
    shot.i = parse_double(doc.rows[r][0], row_where);
    shot.q = parse_double(doc.rows[r][1], row_where);
    shot.prepared_state =
        static_cast<int>(parse_long(doc.rows[r][2], row_where));
    (shot.prepared_state == 0 ? n0 : n1)++;
    set.shots.push_back(shot);
  }
  set.n_per_state = (n0 == n1) ? n0 : 0;
  validate(set);
  return set;
}

inline void write_iq_csv(const std::filesystem::path& path, const IqShotSet& set,
                         std::map<std::string, std::string> metadata = {}) {
  validate(set);
  std::string s = detail::metadata_block(metadata);
  s += "i,q,prepared_state\n";
  for (const auto& shot : set.shots)
    s += format_double(shot.i) + "," + format_double(shot.q) + "," +
         std::to_string(shot.prepared_state) + "\n";
  detail::write_text_file(path, s);
}

// ---------------------------------------------------------------------------
// Parameter traces: `# parameter_kind=`, `# unit=`, header `t_s,value`
// ---------------------------------------------------------------------------

inline TimeTrace read_trace_csv(const std::filesystem::path& path) {
  const auto doc = detail::read_csv(path);
  const std::string where = path.string();
  if (doc.header.size() != 2)
    throw ValidationError(where + ": trace schema expects columns t_<unit>,value");
  const auto [t_name, t_factor] = split_unit_suffix(doc.header[0], where);
  if (t_name != "t" || doc.header[1] != "value")
    throw ValidationError(where + ": expected header 't_s,value'");

  TimeTrace trace;
  const auto kind_it = doc.metadata.find("parameter_kind");
  if (kind_it == doc.metadata.end())
    throw ValidationError(where + ": missing '# parameter_kind=' metadata");
  trace.kind = parameter_kind_from_string(kind_it->second);

  const auto unit_it = doc.metadata.find("unit");
  if (unit_it == doc.metadata.end())
    throw ValidationError(where + ": missing '# unit=' metadata");
  const auto factor = unit_factor(unit_it->second);
  if (!factor)
    throw ValidationError(where + ": unknown unit '" + unit_it->second + "'");
  // store SI: the canonical unit of the declared family
  const std::string& u = unit_it->second;
  trace.unit = (u == "ms" || u == "us" || u == "ns") ? "s"
               : (u == "khz" || u == "mhz" || u == "ghz") ? "hz"
               : (u == "mk") ? "k"
                             : u;

  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    detail::check_field_count(doc, r, where);
    const std::string row_where = where + " row " + std::to_string(r + 1);
    trace.timestamps.push_back(t_factor * parse_double(doc.rows[r][0], row_where));
    trace.values.push_back(*factor * parse_double(doc.rows[r][1], row_where));
  }
  validate(trace);
  return trace;
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const TimeTrace& trace,
                            std::map<std::string, std::string> metadata = {}) {
  validate(trace);
  metadata["parameter_kind"] = to_string(trace.kind);
  metadata["unit"] = trace.unit;
  std::string s = detail::metadata_block(metadata);
  s += "t_s,value\n";
  for (std::size_t i = 0; i < trace.timestamps.size(); ++i)
    s += format_double(trace.timestamps[i]) + "," +
         format_double(trace.values[i]) + "\n";
  detail::write_text_file(path, s);
}

// ---------------------------------------------------------------------------
// Cooldown series: JSON array of {index, elapsed_days, f_q_hz, f_r_hz,
// mean_t1_s}; the three measurement fields may be null.
// ---------------------------------------------------------------------------

inline std::vector<CooldownRecord> read_cooldown_json(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const json doc = json::parse(in, nullptr, true, true);
  const std::string where = path.string();
  if (!doc.is_array())
    throw ValidationError(where + ": cooldown schema expects a JSON array");
  std::vector<CooldownRecord> out;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    const json& obj = doc[k];
    const std::string entry = where + " entry " + std::to_string(k + 1);
    if (!obj.is_object()) throw ValidationError(entry + ": expected an object");
    CooldownRecord rec;
    bool have_index = false, have_days = false;
    for (const auto& [key, value] : obj.items()) {
      if (key == "index") {
        rec.cooldown_index = value.get<int>();
        have_index = true;
        continue;
      }
      const auto [base, factor] = split_unit_suffix(key, entry);
      if (base == "elapsed") {
        rec.elapsed_days = value.get<double>();
        have_days = true;
      } else if (base == "f_q") {
        if (!value.is_null()) rec.f_q_hz = factor * value.get<double>();
      } else if (base == "f_r") {
        if (!value.is_null()) rec.f_r_hz = factor * value.get<double>();
      } else if (base == "mean_t1") {
        if (!value.is_null()) rec.mean_t1_s = factor * value.get<double>();
      } else {
        throw ValidationError(entry + ": unexpected field '" + key + "'");
      }
    }
    if (!have_index) throw ValidationError(entry + ": missing field 'index'");
    if (!have_days)
      throw ValidationError(entry + ": missing field 'elapsed_days'");
    out.push_back(rec);
  }
  validate(out);
  return out;
}

inline void write_cooldown_json(const std::filesystem::path& path,
                                const std::vector<CooldownRecord>& series) {
  validate(series);
  json arr = json::array();
  for (const auto& rec : series) {
    json obj;
    obj["index"] = rec.cooldown_index;
    obj["elapsed_days"] = rec.elapsed_days;
    obj["f_q_hz"] = rec.f_q_hz ? json(*rec.f_q_hz) : json(nullptr);
    obj["f_r_hz"] = rec.f_r_hz ? json(*rec.f_r_hz) : json(nullptr);
    obj["mean_t1_s"] = rec.mean_t1_s ? json(*rec.mean_t1_s) : json(nullptr);
    arr.push_back(obj);
  }
  detail::write_text_file(path, arr.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// validate_dataset: one entry point for schema-checked ingestion
// ---------------------------------------------------------------------------

enum class DatasetKind { decay, ramsey, iq, trace, cooldown };

inline DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "decay") return DatasetKind::decay;
  if (s == "ramsey") return DatasetKind::ramsey;
  if (s == "iq") return DatasetKind::iq;
  if (s == "trace") return DatasetKind::trace;
  if (s == "cooldown") return DatasetKind::cooldown;
  throw ValidationError("unknown dataset kind '" + s + "'");
}

using Dataset = std::variant<DecayCurve, RamseyCurve, IqShotSet, TimeTrace,
                             std::vector<CooldownRecord>>;

inline Dataset validate_dataset(const std::filesystem::path& path,
                                DatasetKind kind) {
  if (!std::filesystem::exists(path))
    throw IoError("no such file: " + path.string());
  switch (kind) {
    case DatasetKind::decay: return read_decay_csv(path);
    case DatasetKind::ramsey: return read_ramsey_csv(path);
    case DatasetKind::iq: return read_iq_csv(path);
    case DatasetKind::trace: return read_trace_csv(path);
    case DatasetKind::cooldown: return read_cooldown_json(path);
  }
  throw ValidationError("unreachable dataset kind");
}

}  // namespace qlab::io
