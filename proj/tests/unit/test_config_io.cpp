#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lanefree/config.hpp"
#include "lanefree/errors.hpp"
#include "lanefree/trace_io.hpp"

using namespace lanefree;

namespace {

template <class F>
ConfigError config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected ConfigError");
  return ConfigError("unreachable");
}

sim::SimTrace short_run() {
  auto c = sim::default_config();
  c.t_end = 0.5;
  c.record_stride = 25;
  return sim::run_simulation(c);
}

}  // namespace

TEST_CASE("text and JSON configs are interchangeable") {
  const std::string text = R"(# comment line
[road]
a = 7.0        # trailing comment
v_max = 36
[potential]
lambda = 40
[sim]
seed = 7
hold_controls = true
)";
  const std::string json =
      R"({"road": {"a": 7.0, "v_max": 36}, "potential": {"lambda": 40},
          "sim": {"seed": 7, "hold_controls": true}})";
  const auto a = config::parse_config(text).config;
  const auto b = config::parse_config(json).config;
  CHECK(a.params.road.a == 7.0);
  CHECK(a.params.road.v_max == 36.0);
  CHECK(a.params.lambda == 40.0);
  CHECK(a.seed == 7);
  CHECK(a.hold_controls);
  CHECK(config::flatten(a) == config::flatten(b));
}

TEST_CASE("dotted keys and overrides") {
  const std::vector<std::string> overrides = {"sim.n=3", "potential.lambda = 30"};
  const auto c = config::parse_config("controller.mu1 = 0.7\n", overrides).config;
  CHECK(c.params.mu1 == 0.7);
  CHECK(c.n == 3);
  CHECK(c.params.lambda == 30.0);
}

TEST_CASE("L is derived unless given, and a low L warns") {
  const auto derived = config::parse_config("");
  CHECK(derived.config.params.L == doctest::Approx(5.593674631481715).epsilon(1e-13));
  CHECK_FALSE(derived.config.L_explicit);
  CHECK(derived.warnings.empty());
  const auto low = config::parse_config("potential.L = 5.59\n");
  CHECK(low.config.params.L == 5.59);
  CHECK(low.config.L_explicit);
  REQUIRE(low.warnings.size() == 1);
  CHECK(low.warnings[0].find("below") != std::string::npos);
  CHECK(config::parse_config("potential.L = 6\n").warnings.empty());
}

TEST_CASE("config errors carry the line and key") {
  auto e = config_error([] { config::parse_config("[road]\na = 7\nphi = wide\n"); });
  CHECK(e.line() == 3);
  CHECK(e.key() == "road.phi");
  CHECK(std::string(e.what()).find("line 3") != std::string::npos);

  e = config_error([] { config::parse_config("\nroad.width = 3\n"); });
  CHECK(e.line() == 2);
  CHECK(std::string(e.what()).find("unknown") != std::string::npos);

  e = config_error([] { config::parse_config("road.phi = 0.6\n"); });
  CHECK(e.key() == "road.phi");
  CHECK(std::string(e.what()).find("cos(phi)") != std::string::npos);

  e = config_error([] { config::parse_config("sim.n = 2.5\n"); });
  CHECK(e.key() == "sim.n");

  e = config_error([] { config::parse_config("[road\n"); });
  CHECK(e.line() == 1);

  e = config_error([] { config::parse_config("{\"road\": {\"a\": \"wide\"}}"); });
  CHECK(e.key() == "road.a");

  e = config_error([] { config::parse_config("{\"road\": "); });
  CHECK(std::string(e.what()).find("JSON") != std::string::npos);

  const std::vector<std::string> bad = {"sim.n"};
  CHECK_THROWS_AS(config::parse_config("", bad), ConfigError);
  CHECK_THROWS_AS(config::load_config("/nonexistent/lanefree.conf"), ConfigError);
}

TEST_CASE("every schema key round-trips through flatten") {
  auto c = sim::default_config();
  c.seed = 12345678901234ull;
  c.params.lambda = 33.25;
  const auto flat = config::flatten(c);
  CHECK(flat.size() == config::schema_keys().size());
  std::string text;
  for (const auto& [k, v] : flat) text += k + " = " + v + "\n";
  const auto back = config::parse_config(text).config;
  CHECK(config::flatten(back) == flat);
}

TEST_CASE("doubles are written with 17 significant digits") {
  for (double v : {0.1, 1.0 / 3.0, 5.593674631481715, -2.5e-300, 1e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "null");
  CHECK(format_double(std::nan("")) == "null");
}

TEST_CASE("json writer") {
  JsonWriter w;
  w.begin_object();
  w.key("a").value(1);
  w.key("b").begin_array().value(0.5).value(true).null().end_array();
  w.key("c \"q\"").value("x\ny");
  w.end_object();
  const auto j = nlohmann::json::parse(w.str());
  CHECK(j["a"] == 1);
  CHECK(j["b"][0] == 0.5);
  CHECK(j["b"][2].is_null());
  CHECK(j["c \"q\""] == "x\ny");
}

TEST_CASE("trace lines are JSON with header first and summary last") {
  const auto trace = short_run();
  const auto metrics = sim::compute_metrics(trace);
  std::ostringstream out;
  trace_io::write_trace(out, trace, metrics);
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> lines;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  REQUIRE(lines.size() == trace.records.size() + 2);
  CHECK(lines.front()["type"] == "header");
  CHECK(lines.front()["m"] == 98);
  CHECK(lines.front()["H0"].get<double>() == trace.header.limits.H0);
  CHECK(lines.front()["config"]["potential.lambda"] == 25.0);
  CHECK(lines[1]["type"] == "record");
  CHECK(lines.back()["type"] == "summary");
  CHECK(lines.back()["monitor"]["passed"] == true);
}

TEST_CASE("trace round trip preserves values exactly") {
  const auto trace = short_run();
  std::stringstream io;
  trace_io::write_trace(io, trace, sim::compute_metrics(trace));
  const auto loaded = trace_io::read_trace(io);
  CHECK(loaded.t_end == 0.5);
  CHECK(loaded.v_star == 30.0);
  REQUIRE(loaded.records.size() == trace.records.size());
  for (std::size_t k = 0; k < trace.records.size(); ++k) {
    const auto& a = trace.records[k];
    const auto& b = loaded.records[k];
    CHECK(a.t == b.t);
    CHECK(a.energy.H == b.energy.H);
    CHECK(a.energy.d_min == b.energy.d_min);
    for (std::size_t i = 0; i < a.states.size(); ++i) {
      CHECK(a.states[i].x == b.states[i].x);
      CHECK(a.states[i].theta == b.states[i].theta);
      CHECK(a.controls[i].u == b.controls[i].u);
      CHECK(a.controls[i].k == b.controls[i].k);
    }
  }
}

TEST_CASE("malformed traces are rejected") {
  std::istringstream garbage("{\"type\": \"header\"\n");
  CHECK_THROWS_AS(trace_io::read_trace(garbage), std::runtime_error);
  std::istringstream header_only(
      "{\"type\":\"header\",\"config\":{\"sim.t_end\":1,\"road.v_star\":30}}\n");
  CHECK_THROWS_AS(trace_io::read_trace(header_only), std::runtime_error);
  std::istringstream empty("");
  CHECK_THROWS_AS(trace_io::read_trace(empty), std::runtime_error);
}

TEST_CASE("CSV exports") {
  const auto trace = short_run();
  std::stringstream io;
  trace_io::write_trace(io, trace, sim::compute_metrics(trace));
  const auto loaded = trace_io::read_trace(io);
  auto rows = [&](trace_io::ExportKind kind, std::optional<double> at = std::nullopt) {
    std::ostringstream out;
    trace_io::export_csv(out, loaded, kind, at);
    std::vector<std::string> lines;
    std::istringstream in(out.str());
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
  };
  auto columns = [](const std::string& s) { return std::count(s.begin(), s.end(), ',') + 1; };

  const auto dmin = rows(trace_io::ExportKind::dmin);
  CHECK(dmin.front() == "t,d_min");
  CHECK(dmin.size() == loaded.records.size() + 1);
  CHECK(columns(dmin[1]) == 2);
  CHECK(columns(rows(trace_io::ExportKind::speeds).front()) == 11);
  CHECK(columns(rows(trace_io::ExportKind::accelerations).back()) == 11);
  CHECK(columns(rows(trace_io::ExportKind::lateral).front()) == 21);
  CHECK(columns(rows(trace_io::ExportKind::orientation).back()) == 21);
  const auto snap = rows(trace_io::ExportKind::snapshots, 0.0);
  CHECK(snap.front() == "t,vehicle,x,y,theta");
  CHECK(snap.size() == 11);
  CHECK(snap[1].rfind("0,0,", 0) == 0);

  // The speed column is the longitudinal speed v cos(theta).
  const auto speeds = rows(trace_io::ExportKind::speeds);
  const auto& s0 = loaded.records[0].states[0];
  CHECK(speeds[1].find(format_double(s0.v * std::cos(s0.theta))) != std::string::npos);

  CHECK(trace_io::parse_export_kind("dmin") == trace_io::ExportKind::dmin);
  CHECK_THROWS_AS(trace_io::parse_export_kind("velocity"), std::invalid_argument);
}

TEST_CASE("per-vehicle CSV") {
  const auto trace = short_run();
  std::ostringstream out;
  trace_io::write_vehicle_csv(out, trace);
  const auto text = out.str();
  CHECK(text.rfind("t,vehicle,x,y,theta,v,u,F,delta,k\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) ==
        1 + trace.records.size() * 10);
}

TEST_CASE("shipped configs") {
  const std::filesystem::path dir = LANEFREE_CONFIG_DIR;
  const auto defaults = config::flatten(sim::default_config());
  CHECK(config::flatten(config::load_config(dir / "default.conf").config) == defaults);
  CHECK(config::flatten(config::load_config(dir / "default.json").config) == defaults);
  const auto wide = config::load_config(dir / "lambda40.conf").config;
  CHECK(wide.params.lambda == 40.0);
  CHECK(wide.params.L == sim::default_config().params.L);
  CHECK(config::load_config(dir / "dense.conf").config.n == 20);
}
