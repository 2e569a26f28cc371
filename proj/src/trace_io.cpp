#include "lanefree/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "lanefree/config.hpp"
#include "lanefree/kernels/pair_kernel.hpp"

namespace lanefree {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void JsonWriter::separator() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (!first_.empty()) {
    if (!first_.back()) out_ += ',';
    first_.back() = false;
  }
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_ += '{';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  out_ += '}';
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separator();
  out_ += '[';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  out_ += ']';
  first_.pop_back();
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view k) {
  separator();
  out_ += nlohmann::json(std::string(k)).dump();
  out_ += ':';
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separator();
  out_ += format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(long long v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(unsigned long long v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  separator();
  out_ += nlohmann::json(std::string(v)).dump();
  return *this;
}

JsonWriter& JsonWriter::raw(std::string_view json) {
  separator();
  out_ += json;
  return *this;
}

JsonWriter& JsonWriter::null() {
  separator();
  out_ += "null";
  return *this;
}

namespace trace_io {

namespace {

void write_energy(JsonWriter& w, const lyapunov::EnergyReport& e) {
  w.begin_object();
  w.key("H").value(e.H);
  w.key("kinetic_long").value(e.kinetic_long);
  w.key("kinetic_lat").value(e.kinetic_lat);
  w.key("boundary_pot").value(e.boundary_pot);
  w.key("pairwise_pot").value(e.pairwise_pot);
  w.key("orientation_barrier").value(e.orientation_barrier);
  w.key("dissipation_analytic").value(e.dissipation_analytic);
  w.end_object();
}

void write_optional_times(JsonWriter& w, const std::vector<std::optional<double>>& times) {
  w.begin_array();
  for (const auto& t : times) {
    if (t) {
      w.value(*t);
    } else {
      w.null();
    }
  }
  w.end_array();
}

void write_verdict(JsonWriter& w, const lyapunov::MonitorVerdict& v) {
  w.begin_object();
  w.key("passed").value(v.passed());
  w.key("violations").value(v.violations);
  w.key("h_nonincreasing").value(v.h_nonincreasing);
  w.key("worst_step_increase").value(v.worst_step_increase);
  w.key("worst_step_increase_t").value(v.worst_step_increase_t);
  w.key("h_below_initial").value(v.h_below_initial);
  w.key("separation_ok").value(v.separation_ok);
  w.key("lateral_ok").value(v.lateral_ok);
  w.key("speed_ok").value(v.speed_ok);
  w.key("theta_ok").value(v.theta_ok);
  w.key("gain_ok").value(v.gain_ok);
  w.key("F_bound_ok").value(v.F_bound_ok);
  w.key("u_bound_ok").value(v.u_bound_ok);
  w.key("barrier_ok").value(v.barrier_ok);
  w.key("first_failure_t");
  if (v.first_failure_t) {
    w.value(*v.first_failure_t);
  } else {
    w.null();
  }
  w.key("first_failure").value(v.first_failure);
  w.end_object();
}

void write_metrics_body(JsonWriter& w, const sim::SimTrace& trace, const sim::RunMetrics& m) {
  w.key("status").value(sim::status_name(trace.status));
  w.key("diagnostic").value(trace.diagnostic);
  w.key("steps").value(trace.stats.steps);
  w.key("halvings").value(trace.stats.halvings);
  w.key("global_d_min").value(m.global_d_min);
  w.key("global_d_min_t").value(trace.stats.global_d_min_t);
  w.key("converged_d_min").value(m.converged_d_min);
  w.key("max_abs_F").value(m.max_abs_F);
  w.key("max_abs_u").value(m.max_abs_u);
  w.key("tail_max_abs_F").value(m.tail_max_abs_F);
  w.key("tail_max_abs_u").value(m.tail_max_abs_u);
  w.key("max_abs_theta").value(trace.stats.max_abs_theta);
  w.key("max_abs_y").value(trace.stats.max_abs_y);
  w.key("min_v").value(trace.stats.min_v);
  w.key("max_v").value(trace.stats.max_v);
  w.key("max_k_over_R0").value(trace.stats.max_k_over_R0);
  w.key("final_y").begin_array();
  for (double y : m.final_y) w.value(y);
  w.end_array();
  w.key("final_max_abs_theta").value(m.final_max_abs_theta);
  w.key("final_max_speed_error").value(m.final_max_speed_error);
  w.key("speeds_converged").value(m.speeds_converged);
  w.key("thetas_converged").value(m.thetas_converged);
  w.key("inputs_settled").value(m.inputs_settled);
  w.key("speed_convergence_time");
  write_optional_times(w, m.speed_convergence_time);
  w.key("theta_convergence_time");
  write_optional_times(w, m.theta_convergence_time);
  w.key("monitor");
  write_verdict(w, trace.verdict);
}

double number(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nan("");
  return v.get<double>();
}

}  // namespace

std::string header_line(const sim::TraceHeader& header) {
  JsonWriter w;
  w.begin_object();
  w.key("type").value("header");
  w.key("version").value(header.version);
  w.key("config").begin_object();
  for (const auto& [k, v] : config::flatten(header.config)) w.key(k).raw(v);
  w.end_object();
  w.key("L_explicit").value(header.config.L_explicit);
  w.key("m").value(header.m);
  const auto& lim = header.limits;
  w.key("H0").value(lim.H0);
  w.key("R_H0").value(lim.R0);
  w.key("F_bound").value(lim.F_bound);
  w.key("u_bound").value(lim.u_bound);
  w.key("omega_H0").value(lim.omega0);
  w.key("kappa_H0").value(lim.kappa0);
  w.key("rho_H0").value(lim.rho0);
  w.end_object();
  return w.str();
}

std::string record_line(const sim::TraceRecord& r) {
  JsonWriter w;
  w.begin_object();
  w.key("type").value("record");
  w.key("t").value(r.t);
  w.key("step").value(r.step);
  w.key("d_min").value(r.energy.d_min);
  w.key("ok").value(r.step_ok);
  w.key("vehicles").begin_array();
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    const auto& s = r.states[i];
    const auto& c = r.controls[i];
    w.begin_array();
    for (double v : {s.x, s.y, s.theta, s.v, c.u, c.F, c.delta, c.k}) w.value(v);
    w.end_array();
  }
  w.end_array();
  w.key("energy");
  write_energy(w, r.energy);
  w.end_object();
  return w.str();
}

std::string summary_line(const sim::SimTrace& trace, const sim::RunMetrics& metrics) {
  JsonWriter w;
  w.begin_object();
  w.key("type").value("summary");
  write_metrics_body(w, trace, metrics);
  w.end_object();
  return w.str();
}

void write_trace(std::ostream& out, const sim::SimTrace& trace, const sim::RunMetrics& metrics) {
  out << header_line(trace.header) << '\n';
  for (const auto& r : trace.records) out << record_line(r) << '\n';
  out << summary_line(trace, metrics) << '\n';
}

std::string metrics_json(const sim::SimTrace& trace, const sim::RunMetrics& metrics) {
  JsonWriter w;
  w.begin_object();
  write_metrics_body(w, trace, metrics);
  w.key("H0").value(trace.header.limits.H0);
  w.key("R_H0").value(trace.header.limits.R0);
  w.key("K_feasible").value(trace.header.limits.F_bound);
  w.key("m").value(trace.header.m);
  w.end_object();
  return nlohmann::json::parse(w.str()).dump(2) + "\n";
}

void write_vehicle_csv(std::ostream& out, const sim::SimTrace& trace) {
  out << "t,vehicle,x,y,theta,v,u,F,delta,k\n";
  for (const auto& r : trace.records) {
    for (std::size_t i = 0; i < r.states.size(); ++i) {
      const auto& s = r.states[i];
      const auto& c = r.controls[i];
      out << format_double(r.t) << ',' << i;
      for (double v : {s.x, s.y, s.theta, s.v, c.u, c.F, c.delta, c.k}) {
        out << ',' << format_double(v);
      }
      out << '\n';
    }
  }
}

LoadedTrace read_trace(std::istream& in) {
  LoadedTrace trace;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        trace.t_end = j.at("config").at("sim.t_end").get<double>();
        trace.v_star = j.at("config").at("road.v_star").get<double>();
        have_header = true;
      } else if (type == "record") {
        sim::TraceRecord r;
        r.t = j.at("t").get<double>();
        r.step = j.at("step").get<std::size_t>();
        r.energy.d_min = number(j, "d_min");
        r.step_ok = j.at("ok").get<bool>();
        for (const auto& v : j.at("vehicles")) {
          if (v.size() != 8) throw std::runtime_error("vehicle entry must have 8 fields");
          r.states.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>(),
                              v[3].get<double>()});
          controller::VehicleControl c;
          c.u = v[4].get<double>();
          c.F = v[5].get<double>();
          c.delta = v[6].get<double>();
          c.k = v[7].get<double>();
          r.controls.push_back(c);
        }
        r.energy.H = j.at("energy").at("H").get<double>();
        trace.records.push_back(std::move(r));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed trace at line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  if (!have_header) throw std::runtime_error("trace has no header line");
  if (trace.records.empty()) throw std::runtime_error("trace has no records");
  return trace;
}

LoadedTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  return read_trace(in);
}

ExportKind parse_export_kind(std::string_view name) {
  if (name == "speeds") return ExportKind::speeds;
  if (name == "accelerations") return ExportKind::accelerations;
  if (name == "lateral") return ExportKind::lateral;
  if (name == "orientation") return ExportKind::orientation;
  if (name == "dmin") return ExportKind::dmin;
  if (name == "snapshots") return ExportKind::snapshots;
  throw std::invalid_argument("unknown export kind '" + std::string(name) + "'");
}

void export_csv(std::ostream& out, const LoadedTrace& trace, ExportKind kind,
                std::optional<double> at) {
  if (trace.records.empty()) throw std::runtime_error("trace has no records");
  const std::size_t n = trace.records.front().states.size();

  if (kind == ExportKind::snapshots) {
    const sim::TraceRecord* pick = &trace.records.back();
    if (at) {
      for (const auto& r : trace.records) {
        if (std::abs(r.t - *at) < std::abs(pick->t - *at)) pick = &r;
      }
    }
    out << "t,vehicle,x,y,theta\n";
    for (std::size_t i = 0; i < pick->states.size(); ++i) {
      const auto& s = pick->states[i];
      out << format_double(pick->t) << ',' << i << ',' << format_double(s.x) << ','
          << format_double(s.y) << ',' << format_double(s.theta) << '\n';
    }
    return;
  }

  out << 't';
  auto columns = [&](const char* prefix) {
    for (std::size_t i = 0; i < n; ++i) out << ',' << prefix << i;
  };
  switch (kind) {
    case ExportKind::speeds:
      columns("xdot_");
      break;
    case ExportKind::accelerations:
      columns("F_");
      break;
    case ExportKind::lateral:
      columns("ydot_");
      columns("yddot_");
      break;
    case ExportKind::orientation:
      columns("u_");
      columns("theta_");
      break;
    case ExportKind::dmin:
      out << ",d_min";
      break;
    case ExportKind::snapshots:
      break;
  }
  out << '\n';

  for (const auto& r : trace.records) {
    out << format_double(r.t);
    auto each = [&](auto&& f) {
      for (std::size_t i = 0; i < r.states.size(); ++i) out << ',' << format_double(f(i));
    };
    const auto& s = r.states;
    const auto& c = r.controls;
    switch (kind) {
      case ExportKind::speeds:
        each([&](std::size_t i) { return s[i].v * std::cos(s[i].theta); });
        break;
      case ExportKind::accelerations:
        each([&](std::size_t i) { return c[i].F; });
        break;
      case ExportKind::lateral:
        each([&](std::size_t i) { return s[i].v * std::sin(s[i].theta); });
        each([&](std::size_t i) {
          return c[i].F * std::sin(s[i].theta) + s[i].v * std::cos(s[i].theta) * c[i].u;
        });
        break;
      case ExportKind::orientation:
        each([&](std::size_t i) { return c[i].u; });
        each([&](std::size_t i) { return s[i].theta; });
        break;
      case ExportKind::dmin:
        out << ',' << format_double(r.energy.d_min);
        break;
      case ExportKind::snapshots:
        break;
    }
    out << '\n';
  }
}

}  // namespace trace_io
}  // namespace lanefree
