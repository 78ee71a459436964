#include "htsgd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "htsgd/errors.hpp"

namespace htsgd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Removes a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

bool parse_number(const std::string& text, double* out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  std::size_t pos = 0;
  try {
    *out = std::stod(t, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == t.size();
}

ConfigValue parse_value(const std::string& raw, const std::string& where) {
  const std::string text = trim(raw);
  if (text.empty()) throw ConfigError(where + ": empty value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"')
      throw ConfigError(where + ": unterminated string");
    return ConfigValue{text.substr(1, text.size() - 2)};
  }
  if (text == "true") return ConfigValue{true};
  if (text == "false") return ConfigValue{false};
  if (text.front() == '[') {
    if (text.back() != ']') throw ConfigError(where + ": unterminated array");
    const std::string body = text.substr(1, text.size() - 2);
    std::vector<std::string> items;
    std::string current;
    bool in_string = false;
    for (char c : body) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        items.push_back(current);
        current.clear();
      } else {
        current += c;
      }
    }
    if (!trim(current).empty() || !items.empty()) items.push_back(current);
    std::vector<double> nums;
    std::vector<std::string> strs;
    for (const std::string& item : items) {
      const std::string it = trim(item);
      if (it.empty()) throw ConfigError(where + ": empty array element");
      if (it.front() == '"') {
        if (it.size() < 2 || it.back() != '"')
          throw ConfigError(where + ": unterminated string in array");
        strs.push_back(it.substr(1, it.size() - 2));
      } else {
        double v;
        if (!parse_number(it, &v))
          throw ConfigError(where + ": '" + it + "' is not a number");
        nums.push_back(v);
      }
    }
    if (!strs.empty() && !nums.empty())
      throw ConfigError(where + ": arrays must be all numbers or all strings");
    if (!strs.empty()) return ConfigValue{strs};
    return ConfigValue{nums};
  }
  double v;
  if (!parse_number(text, &v))
    throw ConfigError(where + ": '" + text + "' is not a valid value");
  return ConfigValue{v};
}

}  // namespace

ConfigTable ConfigTable::parse_string(const std::string& text,
                                      const std::string& origin) {
  ConfigTable table;
  table.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (body.front() == '[') {
      if (body.back() != ']')
        throw ConfigError(where + ": malformed section header");
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      table.sections_[section];
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty())
      throw ConfigError(where + ": key '" + key + "' outside any [section]");
    if (table.sections_[section].count(key))
      throw ConfigError(where + ": duplicate key '" + section + "." + key + "'");
    table.sections_[section][key] =
        parse_value(body.substr(eq + 1), where + " (" + section + "." + key + ")");
  }
  return table;
}

ConfigTable ConfigTable::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

void ConfigTable::set_override(const std::string& dotted_assignment) {
  const auto eq = dotted_assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + dotted_assignment +
                      "' must look like section.key=value");
  const std::string path = trim(dotted_assignment.substr(0, eq));
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
    throw ConfigError("override key '" + path + "' must be section.key");
  const std::string section = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);
  std::string value = trim(dotted_assignment.substr(eq + 1));
  sections_[section][key] =
      parse_value(value, "override (" + section + "." + key + ")");
}

bool ConfigTable::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const ConfigValue* ConfigTable::find(const std::string& section,
                                     const std::string& key) const {
  const auto sit = sections_.find(section);
  if (sit == sections_.end()) return nullptr;
  const auto kit = sit->second.find(key);
  if (kit == sit->second.end()) return nullptr;
  return &kit->second;
}

namespace {

class SchemaReader {
 public:
  explicit SchemaReader(const ConfigTable& table) : table_(table) {}

  double number(const std::string& s, const std::string& k, double fallback) {
    const ConfigValue* v = mark(s, k);
    if (!v) return fallback;
    return as_number(v, s, k);
  }
  double required_number(const std::string& s, const std::string& k) {
    const ConfigValue* v = mark(s, k);
    if (!v) throw ConfigError(missing(s, k));
    return as_number(v, s, k);
  }
  long integer(const std::string& s, const std::string& k, long fallback) {
    const double v = number(s, k, static_cast<double>(fallback));
    return to_integer(v, s, k);
  }
  long required_integer(const std::string& s, const std::string& k) {
    return to_integer(required_number(s, k), s, k);
  }
  std::string string(const std::string& s, const std::string& k,
                     const std::string& fallback) {
    const ConfigValue* v = mark(s, k);
    if (!v) return fallback;
    return as_string(v, s, k);
  }
  std::string required_string(const std::string& s, const std::string& k) {
    const ConfigValue* v = mark(s, k);
    if (!v) throw ConfigError(missing(s, k));
    return as_string(v, s, k);
  }
  std::vector<double> num_array(const std::string& s, const std::string& k,
                                std::vector<double> fallback) {
    const ConfigValue* v = mark(s, k);
    if (!v) return fallback;
    if (const auto* arr = std::get_if<std::vector<double>>(&v->data))
      return *arr;
    throw ConfigError(type_err(s, k, "an array of numbers"));
  }
  std::vector<std::string> str_array(const std::string& s, const std::string& k,
                                     std::vector<std::string> fallback) {
    const ConfigValue* v = mark(s, k);
    if (!v) return fallback;
    if (const auto* arr = std::get_if<std::vector<std::string>>(&v->data))
      return *arr;
    throw ConfigError(type_err(s, k, "an array of strings"));
  }
  bool has(const std::string& s, const std::string& k) {
    return mark(s, k) != nullptr;
  }

  // Every key the schema never touched is unknown.
  void reject_unknown() const {
    for (const auto& [section, keys] : table_.sections()) {
      for (const auto& [key, value] : keys) {
        if (!consumed_.count(section + "." + key))
          throw ConfigError(table_.origin() + ": unknown config key '" +
                            section + "." + key + "'");
      }
    }
  }

 private:
  const ConfigValue* mark(const std::string& s, const std::string& k) {
    consumed_.insert(s + "." + k);
    return table_.find(s, k);
  }
  static std::string missing(const std::string& s, const std::string& k) {
    return "missing required config key '" + s + "." + k + "'";
  }
  static std::string type_err(const std::string& s, const std::string& k,
                              const std::string& want) {
    return "config key '" + s + "." + k + "' must be " + want;
  }
  double as_number(const ConfigValue* v, const std::string& s,
                   const std::string& k) {
    if (const auto* d = std::get_if<double>(&v->data)) return *d;
    throw ConfigError(type_err(s, k, "a number"));
  }
  std::string as_string(const ConfigValue* v, const std::string& s,
                        const std::string& k) {
    if (const auto* str = std::get_if<std::string>(&v->data)) return *str;
    throw ConfigError(type_err(s, k, "a string"));
  }
  long to_integer(double v, const std::string& s, const std::string& k) {
    if (v != std::floor(v))
      throw ConfigError(type_err(s, k, "an integer"));
    return static_cast<long>(v);
  }

  const ConfigTable& table_;
  std::set<std::string> consumed_;
};

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_table(ConfigTable table) {
  ExperimentConfig cfg;
  SchemaReader reader(table);

  // [problem]
  const std::string pkind = reader.required_string("problem", "kind");
  if (pkind == "quadratic") {
    const auto spectrum = reader.num_array("problem", "spectrum", {});
    if (spectrum.empty())
      throw ConfigError("problem.spectrum is required for quadratic costs");
    const auto x_star = reader.num_array("problem", "x_star", {});
    const long dim =
        reader.integer("problem", "dim", static_cast<long>(spectrum.size()));
    if (dim != static_cast<long>(spectrum.size()))
      throw ConfigError("problem.dim does not match the spectrum length");
    if (reader.has("problem", "scale"))
      throw ConfigError("problem.scale is not valid for quadratic costs");
    cfg.run.problem = Problem::quadratic(
        to_vector(spectrum),
        x_star.empty() ? Vector() : to_vector(x_star));
  } else if (pkind == "smooth-nonconvex") {
    const long dim = reader.required_integer("problem", "dim");
    const double scale = reader.number("problem", "scale", 1.0);
    if (reader.has("problem", "spectrum") || reader.has("problem", "x_star"))
      throw ConfigError(
          "problem.spectrum / problem.x_star are not valid for "
          "smooth-nonconvex costs");
    cfg.run.problem = Problem::smooth_nonconvex(static_cast<int>(dim), scale);
  } else {
    throw ConfigError("problem.kind must be 'quadratic' or 'smooth-nonconvex'");
  }
  const int dim = cfg.run.problem.dim();

  // [noise]
  const std::string nkind = reader.required_string("noise", "kind");
  if (nkind == "gaussian") {
    cfg.run.noise = NoiseModel::gaussian(reader.number("noise", "sigma", 1.0), dim);
  } else if (nkind == "alpha-stable") {
    cfg.run.noise = NoiseModel::alpha_stable(
        reader.required_number("noise", "alpha"),
        reader.number("noise", "scale", 1.0), dim);
  } else if (nkind == "power-law") {
    cfg.run.noise =
        NoiseModel::power_law(reader.required_number("noise", "kappa"), dim);
  } else {
    throw ConfigError(
        "noise.kind must be 'gaussian', 'alpha-stable' or 'power-law'");
  }

  // [nonlinearity]
  const std::string lkind = reader.required_string("nonlinearity", "kind");
  if (lkind == "sign") {
    cfg.run.nonlinearity = Nonlinearity::sign();
  } else if (lkind == "component-clip") {
    cfg.run.nonlinearity =
        Nonlinearity::component_clip(reader.required_number("nonlinearity", "m"));
  } else if (lkind == "quantize") {
    const auto thresholds = reader.num_array("nonlinearity", "thresholds", {});
    const auto values = reader.num_array("nonlinearity", "values", {});
    if (!thresholds.empty() || !values.empty()) {
      cfg.run.nonlinearity = Nonlinearity::quantize(thresholds, values);
    } else {
      cfg.run.nonlinearity =
          Nonlinearity::default_quantizer(reader.number("nonlinearity", "r", 1.0));
    }
  } else if (lkind == "joint-clip") {
    cfg.run.nonlinearity =
        Nonlinearity::joint_clip(reader.required_number("nonlinearity", "M"));
  } else if (lkind == "normalize") {
    cfg.run.nonlinearity = Nonlinearity::normalize();
  } else if (lkind == "identity") {
    cfg.run.nonlinearity = Nonlinearity::identity_baseline();
  } else {
    throw ConfigError("nonlinearity.kind must be one of sign, component-clip, "
                      "quantize, joint-clip, normalize, identity");
  }

  // [schedule]
  cfg.run.schedule = StepSchedule(reader.required_number("schedule", "a"),
                                  reader.required_number("schedule", "delta"));

  // [run]
  cfg.run.horizon = reader.required_integer("run", "horizon");
  cfg.run.seed = static_cast<std::uint64_t>(reader.integer("run", "seed", 1));
  const auto x_init = reader.num_array("run", "x_init", {});
  if (!x_init.empty()) {
    reader.number("run", "x_init_norm", 0.0);
    cfg.run.x_init = to_vector(x_init);
  } else {
    const double norm = reader.number("run", "x_init_norm", 1.0);
    cfg.run.x_init = Vector::Ones(dim);
    cfg.run.x_init *= norm / cfg.run.x_init.norm();
  }
  const auto cps = reader.num_array("run", "checkpoints", {});
  cfg.run.checkpoints.clear();
  for (double c : cps) {
    if (c != std::floor(c))
      throw ConfigError("run.checkpoints must be integers");
    cfg.run.checkpoints.push_back(static_cast<long>(c));
  }

  // [ensemble]
  cfg.ensemble.base = cfg.run;
  cfg.ensemble.n_trajectories =
      static_cast<int>(reader.integer("ensemble", "n_trajectories", 2));
  cfg.ensemble.base_seed =
      static_cast<std::uint64_t>(reader.integer("ensemble", "base_seed", 1));
  cfg.ensemble.metrics = reader.str_array("ensemble", "metrics", kAllMetrics);
  cfg.ensemble.thetas = reader.num_array("ensemble", "thetas", {});
  const auto window = reader.num_array("ensemble", "slope_window", {});
  if (!window.empty()) {
    if (window.size() != 2 || !(window[0] < window[1]))
      throw ConfigError("ensemble.slope_window must be [t_min, t_max]");
    cfg.ensemble.slope_t_min = window[0];
    cfg.ensemble.slope_t_max = window[1];
  }
  cfg.ensemble.threads =
      static_cast<int>(reader.integer("ensemble", "threads", 0));

  // [verify]
  cfg.verify.n = reader.integer("verify", "n", cfg.verify.n);
  cfg.verify.radii = reader.num_array("verify", "radii", cfg.verify.radii);
  cfg.verify.directions =
      static_cast<int>(reader.integer("verify", "directions", cfg.verify.directions));
  cfg.verify.seed =
      static_cast<std::uint64_t>(reader.integer("verify", "seed", 7));

  // [audit]
  cfg.audit.n = reader.integer("audit", "n", cfg.audit.n);
  cfg.audit.phi_samples =
      reader.integer("audit", "phi_samples", cfg.audit.phi_samples);
  cfg.audit.x_scales = reader.num_array("audit", "x_scales", cfg.audit.x_scales);
  cfg.audit.seed = static_cast<std::uint64_t>(reader.integer("audit", "seed", 9));

  reader.reject_unknown();
  cfg.run.validate();
  cfg.raw = std::move(table);
  return cfg;
}

namespace {

void emit_kv(std::ostringstream& out, const std::string& key, double v) {
  out << key << " = " << format_double(v) << "\n";
}

void emit_kv(std::ostringstream& out, const std::string& key, const std::string& v) {
  out << key << " = \"" << v << "\"\n";
}

void emit_kv(std::ostringstream& out, const std::string& key,
             const Vector& v) {
  out << key << " = [";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out << ", ";
    out << format_double(v[i]);
  }
  out << "]\n";
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "[problem]\n";
  const Problem& p = run.problem;
  if (p.kind() == ProblemKind::kQuadratic) {
    emit_kv(out, "kind", std::string("quadratic"));
    emit_kv(out, "dim", static_cast<double>(p.dim()));
    emit_kv(out, "spectrum", p.spectrum());
    emit_kv(out, "x_star", p.optimum_point());
  } else {
    emit_kv(out, "kind", std::string("smooth-nonconvex"));
    emit_kv(out, "dim", static_cast<double>(p.dim()));
    emit_kv(out, "scale", p.scale());
  }
  out << "[noise]\n";
  switch (run.noise.kind()) {
    case NoiseKind::kGaussian:
      emit_kv(out, "kind", std::string("gaussian"));
      emit_kv(out, "sigma", run.noise.sigma());
      break;
    case NoiseKind::kAlphaStable:
      emit_kv(out, "kind", std::string("alpha-stable"));
      emit_kv(out, "alpha", run.noise.alpha());
      emit_kv(out, "scale", run.noise.scale());
      break;
    case NoiseKind::kPowerLaw:
      emit_kv(out, "kind", std::string("power-law"));
      emit_kv(out, "kappa", run.noise.kappa());
      break;
  }
  out << "[nonlinearity]\n";
  const Nonlinearity& nl = run.nonlinearity;
  switch (nl.kind()) {
    case NonlinearityKind::kSign:
      emit_kv(out, "kind", std::string("sign"));
      break;
    case NonlinearityKind::kComponentClip:
      emit_kv(out, "kind", std::string("component-clip"));
      emit_kv(out, "m", nl.clip_m());
      break;
    case NonlinearityKind::kQuantize: {
      emit_kv(out, "kind", std::string("quantize"));
      emit_kv(out, "thresholds", to_vector(nl.thresholds()));
      emit_kv(out, "values", to_vector(nl.values()));
      break;
    }
    case NonlinearityKind::kJointClip:
      emit_kv(out, "kind", std::string("joint-clip"));
      emit_kv(out, "M", nl.clip_radius());
      break;
    case NonlinearityKind::kNormalize:
      emit_kv(out, "kind", std::string("normalize"));
      break;
    case NonlinearityKind::kIdentity:
      emit_kv(out, "kind", std::string("identity"));
      break;
  }
  out << "[schedule]\n";
  emit_kv(out, "a", run.schedule.a);
  emit_kv(out, "delta", run.schedule.delta);
  out << "[run]\n";
  emit_kv(out, "horizon", static_cast<double>(run.horizon));
  emit_kv(out, "seed", static_cast<double>(run.seed));
  emit_kv(out, "x_init", run.x_init);
  if (!run.checkpoints.empty()) {
    Vector cps(static_cast<Eigen::Index>(run.checkpoints.size()));
    for (std::size_t i = 0; i < run.checkpoints.size(); ++i)
      cps[static_cast<Eigen::Index>(i)] = static_cast<double>(run.checkpoints[i]);
    emit_kv(out, "checkpoints", cps);
  }
  out << "[ensemble]\n";
  emit_kv(out, "n_trajectories", static_cast<double>(ensemble.n_trajectories));
  emit_kv(out, "base_seed", static_cast<double>(ensemble.base_seed));
  out << "metrics = [";
  for (std::size_t i = 0; i < ensemble.metrics.size(); ++i) {
    if (i) out << ", ";
    out << '"' << ensemble.metrics[i] << '"';
  }
  out << "]\n";
  emit_kv(out, "thetas", to_vector(ensemble.thetas));
  if (ensemble.slope_t_max > 0.0) {
    emit_kv(out, "slope_window",
            to_vector({ensemble.slope_t_min, ensemble.slope_t_max}));
  }
  out << "[verify]\n";
  emit_kv(out, "n", static_cast<double>(verify.n));
  emit_kv(out, "radii", to_vector(verify.radii));
  emit_kv(out, "directions", static_cast<double>(verify.directions));
  emit_kv(out, "seed", static_cast<double>(verify.seed));
  out << "[audit]\n";
  emit_kv(out, "n", static_cast<double>(audit.n));
  emit_kv(out, "phi_samples", static_cast<double>(audit.phi_samples));
  emit_kv(out, "x_scales", to_vector(audit.x_scales));
  emit_kv(out, "seed", static_cast<double>(audit.seed));
  return out.str();
}

std::string ExperimentConfig::config_hash() const {
  return fnv1a64_hex(canonical());
}

}  // namespace htsgd
