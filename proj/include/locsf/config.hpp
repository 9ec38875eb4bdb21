#pragma once

// Sectioned key = value configuration. Unknown sections and keys are errors.

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "locsf/fock_oracle.hpp"

namespace locsf {

using ConfigSchema = std::map<std::string, std::set<std::string>>;

class Config {
 public:
  Config() = default;

  static Config parse(std::istream& is) {
    Config c;
    try {
      boost::property_tree::ini_parser::read_ini(is, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      fail(ErrorKind::config, std::string("config parse error: ") + e.what());
    }
    for (const auto& [sec, body] : c.tree_) {
      if (body.empty() && !body.data().empty()) fail(ErrorKind::config, "key '" + sec + "' outside any section");
    }
    return c;
  }

  static Config parse_string(const std::string& s) {
    std::istringstream is(s);
    return parse(is);
  }

  static Config load(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::config, "cannot read config '" + path + "'");
    return parse(is);
  }

  void check(const ConfigSchema& schema) const {
    for (const auto& [sec, body] : tree_) {
      const auto it = schema.find(sec);
      if (it == schema.end()) fail(ErrorKind::config, "unknown config section [" + sec + "]");
      for (const auto& [key, v] : body)
        if (!it->second.count(key)) fail(ErrorKind::config, "unknown key '" + key + "' in [" + sec + "]");
    }
  }

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = tree_.get_child_optional(sec);
    return s && s->find(key) != s->not_found();
  }

  bool has_section(const std::string& sec) const { return tree_.get_child_optional(sec).has_value(); }

  std::string str(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) fail(ErrorKind::config, "missing key '" + key + "' in [" + sec + "]");
    return tree_.get_child(sec).find(key)->second.data();
  }

  std::string str(const std::string& sec, const std::string& key, const std::string& def) const {
    return has(sec, key) ? str(sec, key) : def;
  }

  double num(const std::string& sec, const std::string& key) const { return to_double(str(sec, key), sec, key); }
  double num(const std::string& sec, const std::string& key, double def) const {
    return has(sec, key) ? num(sec, key) : def;
  }

  long long integer(const std::string& sec, const std::string& key) const {
    const std::string s = str(sec, key);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(ErrorKind::config, "[" + sec + "] " + key + " = '" + s + "' is not an integer");
    }
  }
  long long integer(const std::string& sec, const std::string& key, long long def) const {
    return has(sec, key) ? integer(sec, key) : def;
  }

  std::size_t count(const std::string& sec, const std::string& key, std::size_t def) const {
    const long long v = integer(sec, key, static_cast<long long>(def));
    if (v < 0) fail(ErrorKind::config, "[" + sec + "] " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
  }

  std::uint64_t seed(const std::string& sec, const std::string& key, std::uint64_t def) const {
    if (!has(sec, key)) return def;
    const std::string s = str(sec, key);
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used, 0);
      if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(ErrorKind::config, "[" + sec + "] " + key + " = '" + s + "' is not a 64-bit seed");
    }
  }

  /// Whitespace- or comma-separated numbers.
  std::vector<double> list(const std::string& sec, const std::string& key) const {
    std::string s = str(sec, key);
    for (auto& c : s)
      if (c == ',') c = ' ';
    std::istringstream is(s);
    std::vector<double> out;
    std::string tok;
    while (is >> tok) out.push_back(to_double(tok, sec, key));
    return out;
  }
  std::vector<double> list(const std::string& sec, const std::string& key, std::vector<double> def) const {
    return has(sec, key) ? list(sec, key) : def;
  }

  void set(const std::string& sec, const std::string& key, const std::string& value) {
    tree_.put(boost::property_tree::ptree::path_type(sec + "\x1f" + key, '\x1f'), value);
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [sec, body] : tree_)
      for (const auto& [key, v] : body) j[sec][key] = v.data();
    return j;
  }

  std::string to_ini() const {
    std::ostringstream os;
    boost::property_tree::ini_parser::write_ini(os, tree_);
    return os.str();
  }

 private:
  static double to_double(const std::string& s, const std::string& sec, const std::string& key) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(ErrorKind::config, "[" + sec + "] " + key + " = '" + s + "' is not a number");
    }
  }

  boost::property_tree::ptree tree_;
};

inline const std::set<std::string> kDomainKeys{"dim", "lengths", "sites", "boundary", "origin"};
inline const std::set<std::string> kFieldKeys{"family", "params", "direction_j", "exclusion_radius", "samples"};

/// [domain] dim, lengths, sites, boundary (periodic | open), origin (default -L/2).
inline Domain domain_from_config(const Config& c) {
  const int dim = static_cast<int>(c.integer("domain", "dim", 1));
  if (dim != 1 && dim != 2) fail(ErrorKind::config, "[domain] dim must be 1 or 2");
  const auto L = c.list("domain", "lengths");
  const auto M = c.list("domain", "sites");
  if (L.size() != std::size_t(dim) || M.size() != std::size_t(dim))
    fail(ErrorKind::config, "[domain] lengths and sites need one entry per axis");
  std::array<double, 2> lengths{L[0], dim > 1 ? L[1] : 1.0};
  std::array<std::size_t, 2> sites{0, 1};
  for (int a = 0; a < dim; ++a) {
    if (M[a] < 2 || M[a] != std::floor(M[a])) fail(ErrorKind::config, "[domain] sites must be integers >= 2");
    sites[a] = static_cast<std::size_t>(M[a]);
  }
  const Boundary b = [&] {
    try {
      return boundary_from_string(c.str("domain", "boundary", "periodic"));
    } catch (const Error& e) {
      fail(ErrorKind::config, e.what());
    }
  }();
  try {
    if (c.has("domain", "origin")) {
      const auto o = c.list("domain", "origin");
      if (o.size() != std::size_t(dim)) fail(ErrorKind::config, "[domain] origin needs one entry per axis");
      return Domain(dim, lengths, sites, b, Point{o[0], dim > 1 ? o[1] : 0.0});
    }
    return Domain(dim, lengths, sites, b);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    fail(ErrorKind::config, std::string("[domain] ") + e.what());
  }
}

/// [field] family, params, direction_j (1-based), exclusion_radius; tabulated takes
/// `samples`, dim numbers per site in site order.
inline VelocityField field_from_config(const Config& c, const Domain& dom) {
  try {
    const auto family = field_family_from_string(c.str("field", "family"));
    const int dir = static_cast<int>(c.integer("field", "direction_j", 1)) - 1;
    if (dir < 0 || dir >= dom.dim()) fail(ErrorKind::config, "[field] direction_j out of range");
    if (family == FieldFamily::tabulated) {
      const auto s = c.list("field", "samples");
      if (s.size() != dom.site_count() * std::size_t(dom.dim()))
        fail(ErrorKind::config, "[field] samples need dim values per grid site");
      std::vector<Point> pts(dom.site_count());
      for (std::size_t q = 0; q < pts.size(); ++q)
        pts[q] = {s[q * dom.dim()], dom.dim() > 1 ? s[q * dom.dim() + 1] : 0.0};
      return VelocityField::tabulated(dom, std::move(pts), dir);
    }
    return VelocityField::from_params(family, dom.dim(), c.list("field", "params"), dir,
                                      c.num("field", "exclusion_radius", 0.0));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::config) throw;
    fail(ErrorKind::config, std::string("[field] ") + e.what());
  }
}

}  // namespace locsf
