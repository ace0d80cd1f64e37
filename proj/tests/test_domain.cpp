#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qlab/constants.hpp"
#include "qlab/io.hpp"
#include "qlab/types.hpp"

using namespace qlab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "qlab_domain_tests";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("physical constants are the CODATA exact values") {
  CHECK(PhysicalConstants::h == 6.62607015e-34);
  CHECK(PhysicalConstants::k_b == 1.380649e-23);
  CHECK(PhysicalConstants::e == 1.602176634e-19);
  CHECK(PhysicalConstants::c0 == 299792458.0);
  CHECK_THAT(bcs_gap_j(1.2),
             Catch::Matchers::WithinRel(1.764 * 1.380649e-23 * 1.2, 1e-15));
}

TEST_CASE("qubit design invariants") {
  QubitDesign q{"A", "1", 6.5829e9, 4.332736e9, 225.075e6, bcs_gap_j(1.2)};
  CHECK_NOTHROW(validate(q));
  CHECK_THAT(q.charging_energy_j(),
             Catch::Matchers::WithinRel(PhysicalConstants::h * 225.075e6, 1e-15));
  q.f_r_hz = 4.0e9;  // below f_q
  CHECK_THROWS_AS(validate(q), ValidationError);
}

TEST_CASE("decay csv: descending delays raise the ordering rule") {
  const auto dir = temp_dir();
  const auto path = dir / "bad_order.csv";
  write_file(path, "tau_s,p1\n2e-06,0.9\n1e-06,0.95\n");
  try {
    io::read_decay_csv(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("strictly increasing") != std::string::npos);
  }
}

TEST_CASE("decay csv: out-of-range population names the row") {
  const auto dir = temp_dir();
  const auto path = dir / "bad_range.csv";
  write_file(path, "tau_s,p1\n0,0.5\n1e-06,1.3\n");
  try {
    io::read_decay_csv(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("[0,1]") != std::string::npos);
  }
}

TEST_CASE("decay csv: missing unit suffix is rejected") {
  const auto dir = temp_dir();
  const auto path = dir / "no_unit.csv";
  write_file(path, "tau,p1\n0,0.5\n1e-06,0.4\n");
  try {
    io::read_decay_csv(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("unit") != std::string::npos);
  }
}

TEST_CASE("decay csv: microsecond delays are converted to SI") {
  const auto dir = temp_dir();
  const auto path = dir / "us_units.csv";
  write_file(path, "tau_us,p1\n0,0.9\n10,0.5\n");
  const auto curve = io::read_decay_csv(path);
  CHECK_THAT(curve.delays_s[1], Catch::Matchers::WithinRel(1e-5, 1e-12));
}

TEST_CASE("iq csv: well-formed file parses to declared size") {
  const auto dir = temp_dir();
  const auto path = dir / "iq.csv";
  write_file(path, "i,q,prepared_state\n0.1,0.2,0\n3.0,0.1,1\n0.0,-0.2,0\n2.9,0.3,1\n");
  const auto set = io::read_iq_csv(path);
  CHECK(set.shots.size() == 4);
  CHECK(set.n_per_state == 2);
}

TEST_CASE("iq csv: single prepared state violates the both-states rule") {
  const auto dir = temp_dir();
  const auto path = dir / "iq_one_state.csv";
  write_file(path, "i,q,prepared_state\n0.1,0.2,0\n0.0,-0.2,0\n");
  CHECK_THROWS_AS(io::read_iq_csv(path), ValidationError);
}

TEST_CASE("canonical round-trip is byte-identical") {
  const auto dir = temp_dir();

  DecayCurve curve;
  curve.delays_s = {0.0, 1.25e-6, 5e-6, 2.5e-5};
  curve.populations = {0.97, 0.9130859375, 0.69921875, 0.1234567890123};
  curve.shots_per_point = 1024;
  const auto decay_path = dir / "canon_decay.csv";
  io::write_decay_csv(decay_path, curve);
  const auto text1 = read_file(decay_path);
  io::write_decay_csv(decay_path, io::read_decay_csv(decay_path));
  CHECK(text1 == read_file(decay_path));

  RamseyCurve ramsey;
  ramsey.delays_s = {0.0, 6.25e-6, 1.25e-5, 1.875e-5, 2.5e-5};
  ramsey.populations = {0.99, 0.75, 0.5, 0.25, 0.01};
  ramsey.set_detuning_hz = 1e4;
  ramsey.t_max_s = 2.5e-5;
  ramsey.shots_per_point = 1024;
  const auto ramsey_path = dir / "canon_ramsey.csv";
  io::write_ramsey_csv(ramsey_path, ramsey);
  const auto rtext1 = read_file(ramsey_path);
  const auto rside1 = read_file(io::ramsey_sidecar_path(ramsey_path));
  io::write_ramsey_csv(ramsey_path, io::read_ramsey_csv(ramsey_path));
  CHECK(rtext1 == read_file(ramsey_path));
  CHECK(rside1 == read_file(io::ramsey_sidecar_path(ramsey_path)));

  TimeTrace trace;
  trace.kind = ParameterKind::t2_star;
  trace.unit = "s";
  trace.timestamps = {0.0, 60.0, 120.0};
  trace.values = {4.43e-5, 4.21e-5, 3.9e-5};
  const auto trace_path = dir / "canon_trace.csv";
  io::write_trace_csv(trace_path, trace);
  const auto ttext1 = read_file(trace_path);
  io::write_trace_csv(trace_path, io::read_trace_csv(trace_path));
  CHECK(ttext1 == read_file(trace_path));

  std::vector<CooldownRecord> records;
  records.push_back({0, 0.0, 4.332736e9, 6.5829e9, 3.2e-5});
  records.push_back({1, 31.5, 4.330001e9, 6.58288e9, 4.1e-5});
  records.push_back({2, 88.0, std::nullopt, 6.58271e9, std::nullopt});
  const auto cd_path = dir / "canon_cooldown.json";
  io::write_cooldown_json(cd_path, records);
  const auto ctext1 = read_file(cd_path);
  io::write_cooldown_json(cd_path, io::read_cooldown_json(cd_path));
  CHECK(ctext1 == read_file(cd_path));
}

TEST_CASE("trace csv requires kind and unit metadata") {
  const auto dir = temp_dir();
  const auto path = dir / "trace_nometa.csv";
  write_file(path, "t_s,value\n0,1e-05\n60,1.2e-05\n");
  CHECK_THROWS_AS(io::read_trace_csv(path), ValidationError);
  write_file(path, "# parameter_kind=T1\nt_s,value\n0,1e-05\n60,1.2e-05\n");
  CHECK_THROWS_AS(io::read_trace_csv(path), ValidationError);
  write_file(path,
             "# parameter_kind=T1\n# unit=us\nt_s,value\n0,10\n60,12\n");
  const auto trace = io::read_trace_csv(path);
  CHECK(trace.unit == "s");
  CHECK_THAT(trace.values[0], Catch::Matchers::WithinRel(1e-5, 1e-12));
}

TEST_CASE("validate_dataset dispatches by kind and checks existence") {
  const auto dir = temp_dir();
  const auto path = dir / "vd_decay.csv";
  write_file(path, "tau_s,p1\n0,0.9\n1e-06,0.7\n");
  const auto ds = io::validate_dataset(path, io::DatasetKind::decay);
  CHECK(std::holds_alternative<DecayCurve>(ds));
  CHECK_THROWS_AS(io::validate_dataset(dir / "missing.csv", io::DatasetKind::decay),
                  IoError);
}

TEST_CASE("cooldown json: unit variants and invariants") {
  const auto dir = temp_dir();
  const auto path = dir / "cooldown_units.json";
  write_file(path,
             "[{\"index\":0,\"elapsed_days\":0,\"f_q_ghz\":4.332736,"
             "\"f_r_ghz\":6.5829,\"mean_t1_us\":32.0}]");
  const auto records = io::read_cooldown_json(path);
  CHECK_THAT(*records[0].f_q_hz, Catch::Matchers::WithinRel(4.332736e9, 1e-12));
  CHECK_THAT(*records[0].mean_t1_s, Catch::Matchers::WithinRel(3.2e-5, 1e-12));

  write_file(path,
             "[{\"index\":0,\"elapsed_days\":10,\"f_q_hz\":4e9,\"f_r_hz\":6e9,"
             "\"mean_t1_s\":1e-5},{\"index\":1,\"elapsed_days\":5,"
             "\"f_q_hz\":4e9,\"f_r_hz\":6e9,\"mean_t1_s\":1e-5}]");
  CHECK_THROWS_AS(io::read_cooldown_json(path), ValidationError);
}

TEST_CASE("time trace invariants") {
  TimeTrace t;
  t.kind = ParameterKind::t1;
  t.unit = "s";
  t.timestamps = {0.0, 1.0, 1.0};
  t.values = {1e-5, 1e-5, 1e-5};
  CHECK_THROWS_AS(validate(t), ValidationError);
  t.timestamps = {0.0, 1.0, 2.0};
  CHECK_NOTHROW(validate(t));
}

TEST_CASE("pure dephasing diagnostic") {
  // 1/T2 = 1/(2 T1) + 1/T_phi
  const double t1 = 50e-6, t_phi = 80e-6;
  const double t2 = 1.0 / (0.5 / t1 + 1.0 / t_phi);
  CHECK_THAT(pure_dephasing_time_s(t1, t2),
             Catch::Matchers::WithinRel(t_phi, 1e-12));
  CHECK_THROWS_AS(pure_dephasing_time_s(50e-6, 100.0001e-6), ValidationError);
}
