#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace approx::cli {

namespace {

const std::set<std::string> kExperiments = {"bistable-sweep", "drift-demo",  "correction-demo",
                                            "tiling-study",   "lp-bound",    "fit-and-verify"};
const std::set<std::string> kFieldIds = {"double-well", "radial-cycle", "multi-cycle-2",
                                         "ring",        "line",         "iso-cylinder"};

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip
  std::string s(buf, res.ptr);
  // Keep floats visually distinct from ints in TOML.
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
    s += ".0";
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// ----- minimal TOML subset: [section], key = scalar | string | array -------

struct TomlValue {
  enum class Kind { Number, String, Array, Bool } kind = Kind::Number;
  double number = 0.0;
  bool boolean = false;
  std::string text;
  std::vector<double> array;
};

TomlValue parse_value(const std::string& raw, int line_no) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError("empty value at line " + std::to_string(line_no));
  TomlValue out;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("unterminated string at line " + std::to_string(line_no));
    out.kind = TomlValue::Kind::String;
    out.text = v.substr(1, v.size() - 2);
    return out;
  }
  if (v == "true" || v == "false") {
    out.kind = TomlValue::Kind::Bool;
    out.boolean = v == "true";
    return out;
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated array at line " + std::to_string(line_no));
    out.kind = TomlValue::Kind::Array;
    std::string body = v.substr(1, v.size() - 2);
    std::istringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      char* end = nullptr;
      const double num = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0')
        throw ConfigError("bad array element '" + item + "' at line " + std::to_string(line_no));
      out.array.push_back(num);
    }
    return out;
  }
  char* end = nullptr;
  out.number = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw ConfigError("bad value '" + v + "' at line " + std::to_string(line_no));
  return out;
}

double expect_number(const TomlValue& v, const std::string& key) {
  if (v.kind != TomlValue::Kind::Number) throw ConfigError("'" + key + "' must be a number");
  return v.number;
}

int expect_int(const TomlValue& v, const std::string& key) {
  const double d = expect_number(v, key);
  if (d != std::floor(d)) throw ConfigError("'" + key + "' must be an integer");
  return static_cast<int>(d);
}

std::string expect_string(const TomlValue& v, const std::string& key) {
  if (v.kind != TomlValue::Kind::String) throw ConfigError("'" + key + "' must be a string");
  return v.text;
}

std::vector<double> expect_array(const TomlValue& v, const std::string& key) {
  if (v.kind != TomlValue::Kind::Array) throw ConfigError("'" + key + "' must be an array");
  return v.array;
}

std::vector<int> expect_int_array(const TomlValue& v, const std::string& key) {
  std::vector<int> out;
  for (double d : expect_array(v, key)) {
    if (d != std::floor(d)) throw ConfigError("'" + key + "' must hold integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

void apply_entry(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                 const TomlValue& value) {
  const std::string where = section.empty() ? key : section + "." + key;
  if (section.empty()) {
    if (key == "experiment") cfg.experiment = expect_string(value, where);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(expect_number(value, where));
    else if (key == "n_samples") cfg.n_samples = expect_int(value, where);
    else if (key == "jobs") cfg.jobs = expect_int(value, where);
    else if (key == "out_dir") cfg.out_dir = expect_string(value, where);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "field") {
    if (key == "id") cfg.field_id = expect_string(value, where);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "field.params") {
    cfg.field_params[key] = expect_number(value, where);
  } else if (section == "perturbation") {
    if (key == "g") cfg.g_id = expect_string(value, where);
    else if (key == "nu") cfg.nu_list = expect_array(value, where);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "metric") {
    if (key == "eps") cfg.eps = expect_number(value, where);
    else if (key == "delta") cfg.delta = expect_number(value, where);
    else if (key == "p") cfg.ps = expect_array(value, where);
    else if (key == "t_max") cfg.t_max = expect_number(value, where);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "drift") {
    if (key == "omega_mismatch") cfg.omega_mismatch = expect_number(value, where);
    else if (key == "revolutions") cfg.revolutions = expect_int(value, where);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "correction") {
    if (key == "target_shifts") cfg.target_shifts = expect_array(value, where);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "tiling") {
    if (key == "k") cfg.tile_counts = expect_int_array(value, where);
    else if (key == "eps_t") cfg.eps_t = expect_number(value, where);
    else if (key == "axial_eps") cfg.axial_eps = expect_number(value, where);
    else if (key == "detune") cfg.detune = expect_number(value, where);
    else if (key == "cylinder_tiles") cfg.cylinder_tiles = expect_int(value, where);
    else throw ConfigError("unknown key '" + where + "'");
  } else if (section == "fit") {
    if (key == "centers") cfg.rbf_centers = expect_int_array(value, where);
    else if (key == "sigma") cfg.rbf_sigma = expect_number(value, where);
    else if (key == "ridge") cfg.rbf_ridge = expect_number(value, where);
    else throw ConfigError("unknown key '" + where + "'");
  } else {
    throw ConfigError("unknown section '[" + section + "]'");
  }
}

}  // namespace

bool known_perturbation(const std::string& id) {
  return id == "neg-cos-2x" || id == "constant-down";
}

void ExperimentConfig::validate() const {
  if (!kExperiments.count(experiment))
    throw ConfigError("unknown experiment '" + experiment + "'");
  if (!kFieldIds.count(field_id)) throw ConfigError("unknown field id '" + field_id + "'");
  if (!known_perturbation(g_id)) throw ConfigError("unknown perturbation '" + g_id + "'");
  if (n_samples <= 0) throw ConfigError("n_samples must be positive");
  if (!(eps > 0.0) || !(delta > 0.0)) throw ConfigError("eps and delta must be positive");
  if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");
  for (double nu : nu_list)
    if (nu < 0.0) throw ConfigError("nu values must be >= 0");
  for (double p : ps)
    if (p < 1.0) throw ConfigError("p values must be >= 1");
  for (int k : tile_counts)
    if (k < 2) throw ConfigError("tile counts must be >= 2");
  if (cylinder_tiles < 2) throw ConfigError("cylinder_tiles must be >= 2");
  if (revolutions < 10) throw ConfigError("revolutions must be >= 10");
}

ExperimentConfig ExperimentConfig::from_toml_text(const std::string& text) {
  ExperimentConfig cfg;  // absent keys keep their defaults
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("bad section at line " + std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    apply_entry(cfg, section, key, parse_value(line.substr(eq + 1), line_no));
  }
  return cfg;
}

std::string ExperimentConfig::to_toml() const {
  std::ostringstream os;
  auto arr = [](const std::vector<double>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i)
      s += (i ? ", " : "") + format_double(xs[i]);
    return s + "]";
  };
  auto iarr = [](const std::vector<int>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + std::to_string(xs[i]);
    return s + "]";
  };
  os << "experiment = \"" << experiment << "\"\n";
  os << "seed = " << seed << "\n";
  os << "n_samples = " << n_samples << "\n";
  os << "jobs = " << jobs << "\n";
  os << "out_dir = \"" << out_dir << "\"\n";
  os << "\n[field]\n";
  os << "id = \"" << field_id << "\"\n";
  if (!field_params.empty()) {
    os << "\n[field.params]\n";
    for (const auto& [k, v] : field_params) os << k << " = " << format_double(v) << "\n";
  }
  os << "\n[perturbation]\n";
  os << "g = \"" << g_id << "\"\n";
  os << "nu = " << arr(nu_list) << "\n";
  os << "\n[metric]\n";
  os << "eps = " << format_double(eps) << "\n";
  os << "delta = " << format_double(delta) << "\n";
  os << "p = " << arr(ps) << "\n";
  os << "t_max = " << format_double(t_max) << "\n";
  os << "\n[drift]\n";
  os << "omega_mismatch = " << format_double(omega_mismatch) << "\n";
  os << "revolutions = " << revolutions << "\n";
  os << "\n[correction]\n";
  os << "target_shifts = " << arr(target_shifts) << "\n";
  os << "\n[tiling]\n";
  os << "k = " << iarr(tile_counts) << "\n";
  os << "eps_t = " << format_double(eps_t) << "\n";
  os << "axial_eps = " << format_double(axial_eps) << "\n";
  os << "detune = " << format_double(detune) << "\n";
  os << "cylinder_tiles = " << cylinder_tiles << "\n";
  os << "\n[fit]\n";
  os << "centers = " << iarr(rbf_centers) << "\n";
  os << "sigma = " << format_double(rbf_sigma) << "\n";
  os << "ridge = " << format_double(rbf_ridge) << "\n";
  return os.str();
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("JSON parse failure: ") + e.what());
  }
  ExperimentConfig cfg;
  auto table_entries = [&cfg](const nlohmann::json& obj, const std::string& section) {
    for (const auto& [key, val] : obj.items()) {
      TomlValue tv;
      if (val.is_string()) {
        tv.kind = TomlValue::Kind::String;
        tv.text = val.get<std::string>();
      } else if (val.is_boolean()) {
        tv.kind = TomlValue::Kind::Bool;
        tv.boolean = val.get<bool>();
      } else if (val.is_array()) {
        tv.kind = TomlValue::Kind::Array;
        for (const auto& item : val) tv.array.push_back(item.get<double>());
      } else if (val.is_number()) {
        tv.kind = TomlValue::Kind::Number;
        tv.number = val.get<double>();
      } else {
        throw ConfigError("unsupported JSON value for '" + section + "." + key + "'");
      }
      apply_entry(cfg, section, key, tv);
    }
  };
  for (const auto& [key, val] : j.items()) {
    if (val.is_object()) {
      if (key == "field") {
        for (const auto& [k2, v2] : val.items()) {
          if (k2 == "params" && v2.is_object())
            table_entries(v2, "field.params");
          else {
            TomlValue tv;
            tv.kind = TomlValue::Kind::String;
            if (!v2.is_string()) throw ConfigError("'field." + k2 + "' must be a string");
            tv.text = v2.get<std::string>();
            apply_entry(cfg, "field", k2, tv);
          }
        }
      } else {
        table_entries(val, key);
      }
    } else {
      TomlValue tv;
      if (val.is_string()) {
        tv.kind = TomlValue::Kind::String;
        tv.text = val.get<std::string>();
      } else if (val.is_number()) {
        tv.kind = TomlValue::Kind::Number;
        tv.number = val.get<double>();
      } else {
        throw ConfigError("unsupported JSON value for '" + key + "'");
      }
      apply_entry(cfg, "", key, tv);
    }
  }
  return cfg;
}

std::string ExperimentConfig::to_json_text() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["n_samples"] = n_samples;
  j["jobs"] = jobs;
  j["out_dir"] = out_dir;
  j["field"]["id"] = field_id;
  if (!field_params.empty())
    for (const auto& [k, v] : field_params) j["field"]["params"][k] = v;
  j["perturbation"]["g"] = g_id;
  j["perturbation"]["nu"] = nu_list;
  j["metric"]["eps"] = eps;
  j["metric"]["delta"] = delta;
  j["metric"]["p"] = ps;
  j["metric"]["t_max"] = t_max;
  j["drift"]["omega_mismatch"] = omega_mismatch;
  j["drift"]["revolutions"] = revolutions;
  j["correction"]["target_shifts"] = target_shifts;
  j["tiling"]["k"] = tile_counts;
  j["tiling"]["eps_t"] = eps_t;
  j["tiling"]["axial_eps"] = axial_eps;
  j["tiling"]["detune"] = detune;
  j["tiling"]["cylinder_tiles"] = cylinder_tiles;
  j["fit"]["centers"] = rbf_centers;
  j["fit"]["sigma"] = rbf_sigma;
  j["fit"]["ridge"] = rbf_ridge;
  return j.dump(2);
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  ExperimentConfig cfg = json ? from_json_text(buf.str()) : from_toml_text(buf.str());
  return cfg;
}

void ExperimentConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << to_toml();
}

}  // namespace approx::cli
