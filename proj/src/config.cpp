#include "vma/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vma/diagnostics.hpp"
#include "vma/errors.hpp"
#include "vma/transport.hpp"

namespace vma {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(int line, const std::string& key, const std::string& message) {
  throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + message);
}

double parse_double(const std::string& text, int line, const std::string& key) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last || text.empty())
    fail(line, key, "malformed number '" + text + "'");
  return value;
}

template <typename Int>
Int parse_int(const std::string& text, int line, const std::string& key) {
  Int value = 0;
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(text.data(), last, value);
  if (res.ec != std::errc{} || res.ptr != last || text.empty())
    fail(line, key, "malformed integer '" + text + "'");
  return value;
}

bool parse_bool(const std::string& text, int line, const std::string& key) {
  if (text == "true") return true;
  if (text == "false") return false;
  fail(line, key, "expected true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& text, int line, const std::string& key) {
  std::string body = text;
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') fail(line, key, "unterminated list");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(trim(item), line, key));
  if (out.empty()) fail(line, key, "empty list");
  return out;
}

std::string unquote(const std::string& text) {
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"')
    return text.substr(1, text.size() - 2);
  return text;
}

template <typename E>
struct Names {
  std::vector<std::pair<E, std::string_view>> items;

  std::string_view name(E e) const {
    for (const auto& [v, n] : items)
      if (v == e) return n;
    return "?";
  }
  E value(const std::string& text, int line, const std::string& key) const {
    for (const auto& [v, n] : items)
      if (n == text) return v;
    std::string valid;
    for (const auto& [v, n] : items) valid += (valid.empty() ? "" : ", ") + std::string(n);
    fail(line, key, "unknown value '" + text + "' (valid: " + valid + ")");
  }
};

const Names<ExperimentKind> kExperiments{{{ExperimentKind::Energy, "energy"},
                                         {ExperimentKind::Support, "support"},
                                         {ExperimentKind::EulerConvergence, "euler_convergence"},
                                         {ExperimentKind::EpComparison, "ep_comparison"},
                                         {ExperimentKind::SingleRun, "single_run"}}};
const Names<GeometryKind> kGeometries{{{GeometryKind::Torus, "torus"}, {GeometryKind::ConvexBox, "box"}}};
const Names<HRule> kHRules{{{HRule::Relative, "relative"}, {HRule::Absolute, "absolute"}}};
const Names<SolverKind> kSolvers{{{SolverKind::Auction, "auction"}, {SolverKind::Exact, "exact"}}};
const Names<FlowChoice> kFlows{{{FlowChoice::TaylorGreen, "taylor_green"},
                                {FlowChoice::Shear, "shear"},
                                {FlowChoice::Zero, "zero"}}};

struct Field {
  std::string key;
  std::function<void(ExperimentSpec&, const std::string&, int)> set;
  std::function<std::string(const ExperimentSpec&)> get;
};

std::string list_text(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s + "]";
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"experiment", [](ExperimentSpec& s, const std::string& v, int l) {
         s.experiment = kExperiments.value(v, l, "experiment");
       },
       [](const ExperimentSpec& s) { return std::string(kExperiments.name(s.experiment)); }},
      {"geometry", [](ExperimentSpec& s, const std::string& v, int l) {
         s.geometry = kGeometries.value(v, l, "geometry");
       },
       [](const ExperimentSpec& s) { return std::string(kGeometries.name(s.geometry)); }},
      {"dimension", [](ExperimentSpec& s, const std::string& v, int l) {
         s.dimension = parse_int<int>(v, l, "dimension");
       },
       [](const ExperimentSpec& s) { return std::to_string(s.dimension); }},
      {"box_extent", [](ExperimentSpec& s, const std::string& v, int l) {
         s.box_extent = parse_double(v, l, "box_extent");
       },
       [](const ExperimentSpec& s) { return format_double(s.box_extent); }},
      {"grid_edge", [](ExperimentSpec& s, const std::string& v, int l) {
         s.grid_edge = parse_int<int>(v, l, "grid_edge");
       },
       [](const ExperimentSpec& s) { return std::to_string(s.grid_edge); }},
      {"epsilon", [](ExperimentSpec& s, const std::string& v, int l) {
         s.epsilon = parse_list(v, l, "epsilon");
       },
       [](const ExperimentSpec& s) { return list_text(s.epsilon); }},
      {"h_rule", [](ExperimentSpec& s, const std::string& v, int l) {
         s.h_rule = kHRules.value(v, l, "h_rule");
       },
       [](const ExperimentSpec& s) { return std::string(kHRules.name(s.h_rule)); }},
      {"h", [](ExperimentSpec& s, const std::string& v, int l) { s.h = parse_double(v, l, "h"); },
       [](const ExperimentSpec& s) { return format_double(s.h); }},
      {"t_end", [](ExperimentSpec& s, const std::string& v, int l) {
         s.t_end = parse_double(v, l, "t_end");
       },
       [](const ExperimentSpec& s) { return format_double(s.t_end); }},
      {"solver", [](ExperimentSpec& s, const std::string& v, int l) {
         s.solver = kSolvers.value(v, l, "solver");
       },
       [](const ExperimentSpec& s) { return std::string(kSolvers.name(s.solver)); }},
      {"record_every", [](ExperimentSpec& s, const std::string& v, int l) {
         s.record_every = parse_int<int>(v, l, "record_every");
       },
       [](const ExperimentSpec& s) { return std::to_string(s.record_every); }},
      {"flow", [](ExperimentSpec& s, const std::string& v, int l) {
         s.flow = kFlows.value(v, l, "flow");
       },
       [](const ExperimentSpec& s) { return std::string(kFlows.name(s.flow)); }},
      {"flow_amplitude", [](ExperimentSpec& s, const std::string& v, int l) {
         s.flow_amplitude = parse_double(v, l, "flow_amplitude");
       },
       [](const ExperimentSpec& s) { return format_double(s.flow_amplitude); }},
      {"ep_resolution", [](ExperimentSpec& s, const std::string& v, int l) {
         s.ep_resolution = parse_int<int>(v, l, "ep_resolution");
       },
       [](const ExperimentSpec& s) { return std::to_string(s.ep_resolution); }},
      {"ep_amplitude", [](ExperimentSpec& s, const std::string& v, int l) {
         s.ep_amplitude = parse_double(v, l, "ep_amplitude");
       },
       [](const ExperimentSpec& s) { return format_double(s.ep_amplitude); }},
      {"density_bins", [](ExperimentSpec& s, const std::string& v, int l) {
         s.density_bins = parse_int<int>(v, l, "density_bins");
       },
       [](const ExperimentSpec& s) { return std::to_string(s.density_bins); }},
      {"output_dir", [](ExperimentSpec& s, const std::string& v, int) { s.output_dir = unquote(v); },
       [](const ExperimentSpec& s) { return s.output_dir; }},
      {"seed", [](ExperimentSpec& s, const std::string& v, int l) {
         s.seed = parse_int<std::uint64_t>(v, l, "seed");
       },
       [](const ExperimentSpec& s) { return std::to_string(s.seed); }},
      {"exact_cap", [](ExperimentSpec& s, const std::string& v, int l) {
         s.exact_cap = parse_int<std::size_t>(v, l, "exact_cap");
       },
       [](const ExperimentSpec& s) { return std::to_string(s.exact_cap); }},
      {"record_runtime", [](ExperimentSpec& s, const std::string& v, int l) {
         s.record_runtime = parse_bool(v, l, "record_runtime");
       },
       [](const ExperimentSpec& s) { return std::string(s.record_runtime ? "true" : "false"); }},
      {"h_refinement", [](ExperimentSpec& s, const std::string& v, int l) {
         s.h_refinement = parse_bool(v, l, "h_refinement");
       },
       [](const ExperimentSpec& s) { return std::string(s.h_refinement ? "true" : "false"); }},
  };
  return table;
}

[[noreturn]] void invalid(const std::string& field, const std::string& message) {
  throw ConfigError(field + ": " + message);
}

}  // namespace

std::size_t ExperimentSpec::particles() const {
  std::size_t n = 1;
  for (int k = 0; k < dimension; ++k) n *= static_cast<std::size_t>(grid_edge);
  return n;
}

Geometry ExperimentSpec::make_geometry() const {
  if (geometry == GeometryKind::Torus) return Geometry::torus(dimension);
  Vec extent{0.0, 0.0, 0.0};
  for (int k = 0; k < dimension; ++k) extent[k] = box_extent;
  return Geometry::box(dimension, extent);
}

std::string_view to_string(ExperimentKind kind) { return kExperiments.name(kind); }

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

ExperimentSpec defaults_for(ExperimentKind kind) {
  ExperimentSpec s;
  s.experiment = kind;
  switch (kind) {
    case ExperimentKind::Energy:
    case ExperimentKind::SingleRun:
      s.h_refinement = kind == ExperimentKind::Energy;
      break;
    case ExperimentKind::Support:
      s.geometry = GeometryKind::ConvexBox;
      s.h_refinement = false;
      break;
    case ExperimentKind::EulerConvergence:
      s.grid_edge = 32;
      s.epsilon = {0.2, 0.1, 0.05};
      s.h_refinement = false;
      break;
    case ExperimentKind::EpComparison:
      s.dimension = 1;
      s.grid_edge = 1024;
      s.epsilon = {0.2, 0.1, 0.05};
      s.flow = FlowChoice::Zero;
      s.flow_amplitude = 0.0;
      s.h_refinement = false;
      break;
  }
  return s;
}

ExperimentSpec parse_config(std::istream& in) {
  struct Entry {
    std::string value;
    int line;
  };
  std::map<std::string, Entry> entries;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const auto& table = fields();
    const bool known = std::any_of(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (!known) {
      std::string valid;
      for (const auto& f : table) valid += (valid.empty() ? "" : ", ") + f.key;
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "' (valid keys: " + valid + ")");
    }
    if (entries.count(key)) fail(line, key, "duplicate key");
    if (value.empty()) fail(line, key, "missing value");
    entries[key] = {value, line};
  }

  ExperimentKind kind = ExperimentKind::Energy;
  if (auto it = entries.find("experiment"); it != entries.end())
    kind = kExperiments.value(it->second.value, it->second.line, "experiment");
  ExperimentSpec spec = defaults_for(kind);
  for (const auto& f : fields()) {
    const auto it = entries.find(f.key);
    if (it != entries.end()) f.set(spec, it->second.value, it->second.line);
  }
  validate(spec);
  return spec;
}

ExperimentSpec parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

void validate(const ExperimentSpec& s) {
  if (s.dimension < 1 || s.dimension > kMaxDim) invalid("dimension", "must be 1, 2 or 3");
  if (s.grid_edge < 1) invalid("grid_edge", "must be positive");
  std::size_t n = 1;
  for (int k = 0; k < s.dimension; ++k) {
    n *= static_cast<std::size_t>(s.grid_edge);
    if (n > kMaxDenseSize) invalid("grid_edge", "grid_edge^dimension must not exceed 4096");
  }
  if (s.geometry == GeometryKind::ConvexBox && (!(s.box_extent > 0.0) || !std::isfinite(s.box_extent)))
    invalid("box_extent", "must be positive");
  if (s.epsilon.empty()) invalid("epsilon", "needs at least one value");
  for (double e : s.epsilon)
    if (!(e > 0.0) || !std::isfinite(e)) invalid("epsilon", "values must be positive");
  const bool convergence =
      s.experiment == ExperimentKind::EulerConvergence || s.experiment == ExperimentKind::EpComparison;
  if (convergence) {
    if (s.epsilon.size() < 3) invalid("epsilon", "convergence experiments need at least three values");
    for (std::size_t i = 1; i < s.epsilon.size(); ++i)
      if (!(s.epsilon[i] < s.epsilon[i - 1])) invalid("epsilon", "must be strictly decreasing");
  }
  if (!(s.h > 0.0) || !std::isfinite(s.h)) invalid("h", "must be positive");
  if (!(s.t_end > 0.0) || !std::isfinite(s.t_end)) invalid("t_end", "must be positive");
  for (double e : s.epsilon)
    if (s.step_for(e) > s.t_end) invalid("h", "step exceeds t_end");
  if (s.record_every < 1) invalid("record_every", "must be at least 1");
  if (s.density_bins < 0) invalid("density_bins", "must not be negative");
  if (s.exact_cap < 1) invalid("exact_cap", "must be positive");
  if (s.solver == SolverKind::Exact && s.particles() > s.exact_cap)
    invalid("solver", "exact solver requested above exact_cap");
  if (!std::isfinite(s.flow_amplitude)) invalid("flow_amplitude", "must be finite");
  if (s.flow != FlowChoice::Zero && s.dimension != 2)
    invalid("flow", "taylor_green and shear are two-dimensional");
  if (s.output_dir.empty()) invalid("output_dir", "must not be empty");

  switch (s.experiment) {
    case ExperimentKind::Support:
      if (s.geometry != GeometryKind::ConvexBox) invalid("geometry", "support experiment needs box");
      break;
    case ExperimentKind::EulerConvergence:
      if (s.flow == FlowChoice::Zero) invalid("flow", "euler_convergence needs a nonzero flow");
      break;
    case ExperimentKind::EpComparison:
      if (s.geometry != GeometryKind::Torus) invalid("geometry", "ep_comparison needs the torus");
      if (s.dimension > 2) invalid("dimension", "ep_comparison supports dimension 1 or 2");
      if (s.ep_resolution < 4 || s.ep_resolution > kMaxEpResolution)
        invalid("ep_resolution", "must lie in [4, 256]");
      if (!std::isfinite(s.ep_amplitude)) invalid("ep_amplitude", "must be finite");
      for (double e : s.epsilon)
        if (!(1.0 - e * e * std::abs(s.ep_amplitude) > 0.0))
          invalid("ep_amplitude", "initial density must stay positive");
      break;
    default:
      break;
  }
}

std::string echo(const ExperimentSpec& spec) {
  std::string out;
  for (const auto& f : fields()) out += f.key + " = " + f.get(spec) + "\n";
  return out;
}

}  // namespace vma
