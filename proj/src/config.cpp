#include "lanefree/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lanefree/errors.hpp"
#include "lanefree/geometry.hpp"
#include "lanefree/trace_io.hpp"

namespace lanefree::config {

namespace {

using sim::SimConfig;

enum class Kind { real, integer, unsigned64, boolean };

struct Field {
  std::string_view key;
  Kind kind;
  std::function<void*(SimConfig&)> ref;
};

#define LF_FIELD(key, kind, expr) \
  Field { key, kind, [](SimConfig& c) -> void* { return &(expr); } }

const std::vector<Field>& schema() {
  static const std::vector<Field> fields = {
      LF_FIELD("sim.dt", Kind::real, c.dt),
      LF_FIELD("sim.t_end", Kind::real, c.t_end),
      LF_FIELD("sim.seed", Kind::unsigned64, c.seed),
      LF_FIELD("sim.n", Kind::integer, c.n),
      LF_FIELD("sim.record_stride", Kind::integer, c.record_stride),
      LF_FIELD("sim.m", Kind::integer, c.m),
      LF_FIELD("sim.hold_controls", Kind::boolean, c.hold_controls),
      LF_FIELD("road.a", Kind::real, c.params.road.a),
      LF_FIELD("road.v_max", Kind::real, c.params.road.v_max),
      LF_FIELD("road.v_star", Kind::real, c.params.road.v_star),
      LF_FIELD("road.phi", Kind::real, c.params.road.phi),
      LF_FIELD("vehicle.sigma", Kind::real, c.params.sigma),
      LF_FIELD("metric.p", Kind::real, c.params.p),
      LF_FIELD("potential.q", Kind::real, c.params.q),
      LF_FIELD("potential.c", Kind::real, c.params.c),
      LF_FIELD("potential.lambda", Kind::real, c.params.lambda),
      LF_FIELD("potential.L", Kind::real, c.params.L),
      LF_FIELD("controller.mu1", Kind::real, c.params.mu1),
      LF_FIELD("controller.mu2", Kind::real, c.params.mu2),
      LF_FIELD("controller.A", Kind::real, c.params.A),
      LF_FIELD("controller.eps", Kind::real, c.params.eps),
      LF_FIELD("ic.x_span", Kind::real, c.ic.x_span),
      LF_FIELD("ic.y_max", Kind::real, c.ic.y_max),
      LF_FIELD("ic.separation_margin", Kind::real, c.ic.separation_margin),
      LF_FIELD("ic.lateral_margin", Kind::real, c.ic.lateral_margin),
      LF_FIELD("ic.v_min", Kind::real, c.ic.v_min),
      LF_FIELD("ic.v_max", Kind::real, c.ic.v_max),
      LF_FIELD("ic.theta_min", Kind::real, c.ic.theta_min),
      LF_FIELD("ic.theta_max", Kind::real, c.ic.theta_max),
      LF_FIELD("monitor.v_tol", Kind::real, c.monitor.v_tol),
      LF_FIELD("monitor.theta_tol", Kind::real, c.monitor.theta_tol),
      LF_FIELD("monitor.h_step_tol", Kind::real, c.monitor.h_step_tol),
      LF_FIELD("monitor.h_cum_tol", Kind::real, c.monitor.h_cum_tol),
      LF_FIELD("monitor.fault_at", Kind::real, c.monitor.fault_at),
      LF_FIELD("monitor.fault_dH", Kind::real, c.monitor.fault_dH),
  };
  return fields;
}

#undef LF_FIELD

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected,
                            int line) {
  std::ostringstream msg;
  if (line > 0) msg << "line " << line << ": ";
  msg << "key '" << key << "': expected " << expected << ", got '" << value << "'";
  throw ConfigError(msg.str(), std::string(key), line);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, const char* expected, int line) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value, expected, line);
  return out;
}

struct Parsed {
  SimConfig config = sim::default_config();
  bool has_L = false;
};

void assign(Parsed& parsed, std::string_view key, std::string_view raw, int line) {
  apply_assignment(parsed.config, key, raw, line);
  if (key == "potential.L") parsed.has_L = true;
}

void parse_text(Parsed& parsed, std::string_view text) {
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header", "",
                          line_no);
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value", "", line_no);
    }
    const std::string key = section.empty() ? std::string(trim(line.substr(0, eq)))
                                            : section + "." + std::string(trim(line.substr(0, eq)));
    assign(parsed, key, trim(line.substr(eq + 1)), line_no);
  }
}

void flatten_json(Parsed& parsed, const nlohmann::json& node, const std::string& prefix) {
  for (const auto& [name, value] : node.items()) {
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    if (value.is_object()) {
      flatten_json(parsed, value, key);
    } else if (value.is_boolean()) {
      assign(parsed, key, value.get<bool>() ? "true" : "false", 0);
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      assign(parsed, key, value.dump(), 0);
    } else if (value.is_number_float()) {
      assign(parsed, key, format_double(value.get<double>()), 0);
    } else {
      throw ConfigError("key '" + key + "': unsupported JSON value " + value.dump(), key);
    }
  }
}

}  // namespace

std::vector<std::string> schema_keys() {
  std::vector<std::string> keys;
  for (const auto& f : schema()) keys.emplace_back(f.key);
  return keys;
}

void apply_assignment(SimConfig& config, std::string_view key, std::string_view value, int line) {
  value = trim(value);
  for (const auto& field : schema()) {
    if (field.key != key) continue;
    void* target = field.ref(config);
    switch (field.kind) {
      case Kind::real: {
        const double v = parse_number<double>(key, value, "a real number", line);
        if (!std::isfinite(v)) bad_value(key, value, "a finite real number", line);
        *static_cast<double*>(target) = v;
        break;
      }
      case Kind::integer:
        *static_cast<int*>(target) = parse_number<int>(key, value, "an integer", line);
        break;
      case Kind::unsigned64:
        *static_cast<std::uint64_t*>(target) =
            parse_number<std::uint64_t>(key, value, "an unsigned 64-bit integer", line);
        break;
      case Kind::boolean:
        if (value == "true" || value == "1") {
          *static_cast<bool*>(target) = true;
        } else if (value == "false" || value == "0") {
          *static_cast<bool*>(target) = false;
        } else {
          bad_value(key, value, "true or false", line);
        }
        break;
    }
    return;
  }
  std::ostringstream msg;
  if (line > 0) msg << "line " << line << ": ";
  msg << "unknown config key '" << key << "'";
  throw ConfigError(msg.str(), std::string(key), line);
}

LoadResult parse_config(std::string_view text, std::span<const std::string> overrides) {
  Parsed parsed;
  const auto body = trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(std::string("malformed JSON config: ") + e.what());
    }
    flatten_json(parsed, doc, "");
  } else {
    parse_text(parsed, text);
  }

  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override '" + o + "' is not of the form key=value", o);
    }
    assign(parsed, trim(std::string_view(o).substr(0, eq)), std::string_view(o).substr(eq + 1),
           0);
  }

  LoadResult result;
  auto& config = parsed.config;
  config.params.road.validate();
  auto& p = config.params;
  double derived = 0.0;
  try {
    derived = geometry::safety_distance(p.sigma, p.road.phi, p.p);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what(), "metric.p");
  }
  if (parsed.has_L) {
    config.L_explicit = true;
    if (p.L < derived) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "potential.L = " << p.L << " is below the collision-geometry safety distance "
          << derived << " for sigma = " << p.sigma << ", phi = " << p.road.phi
          << ", p = " << p.p << "; vehicle bodies may overlap";
      result.warnings.push_back(msg.str());
    }
  } else {
    p.L = derived;
  }
  config.validate();
  result.config = config;
  return result;
}

LoadResult load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  if (path.empty()) return parse_config("", overrides);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

std::vector<std::pair<std::string, std::string>> flatten(const SimConfig& config) {
  SimConfig copy = config;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& field : schema()) {
    void* target = field.ref(copy);
    std::string rendered;
    switch (field.kind) {
      case Kind::real:
        rendered = format_double(*static_cast<double*>(target));
        break;
      case Kind::integer:
        rendered = std::to_string(*static_cast<int*>(target));
        break;
      case Kind::unsigned64:
        rendered = std::to_string(*static_cast<std::uint64_t*>(target));
        break;
      case Kind::boolean:
        rendered = *static_cast<bool*>(target) ? "true" : "false";
        break;
    }
    out.emplace_back(std::string(field.key), rendered);
  }
  return out;
}

}  // namespace lanefree::config
