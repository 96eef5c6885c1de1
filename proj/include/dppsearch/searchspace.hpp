#ifndef DPPSEARCH_SEARCHSPACE_HPP
#define DPPSEARCH_SEARCHSPACE_HPP

// Hyperparameter search spaces: dimension trees, uniform sampling, and the
// fixed-layout [0,1] feature encoding consumed by the similarity kernel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dppsearch/errors.hpp"
#include "dppsearch/rng.hpp"

namespace dppsearch {

enum class DimensionKind { continuous, integer, categorical, ordinal, boolean };
enum class Scale { linear, log };

/// A hyperparameter value. continuous -> double, integer -> int64,
/// boolean -> bool, categorical/ordinal -> category label.
using Value = std::variant<double, std::int64_t, bool, std::string>;

using FeatureVector = Eigen::VectorXd;

struct ConditionalChild;

struct DimensionSpec {
  std::string name;
  DimensionKind kind = DimensionKind::continuous;
  double lo = 0.0;
  double hi = 1.0;
  Scale scale = Scale::linear;
  std::vector<std::string> categories;
  std::vector<ConditionalChild> children;

  bool is_numeric() const {
    return kind == DimensionKind::continuous || kind == DimensionKind::integer;
  }
};

struct ConditionalChild {
  Value when;
  DimensionSpec dimension;
};

inline std::string_view to_string(DimensionKind k) {
  switch (k) {
    case DimensionKind::continuous: return "continuous";
    case DimensionKind::integer: return "integer";
    case DimensionKind::categorical: return "categorical";
    case DimensionKind::ordinal: return "ordinal";
    case DimensionKind::boolean: return "boolean";
  }
  return "?";
}

inline std::string value_to_string(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) return x;
        else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        else return nlohmann::json(x).dump();
      },
      v);
}

/// One assignment of values to the active dimensions of a space. A dimension
/// is active iff it has a value.
struct Configuration {
  std::map<std::string, Value> values;

  bool is_active(const std::string& name) const { return values.count(name) > 0; }

  std::set<std::string> active() const {
    std::set<std::string> out;
    for (const auto& [name, _] : values) out.insert(name);
    return out;
  }

  bool operator==(const Configuration&) const = default;
};

/// Pre-order flattening of the dimension tree; the basis for the feature layout.
struct FlatDimension {
  DimensionSpec spec;  // children cleared; see child_indices
  std::optional<std::size_t> parent;
  std::optional<Value> trigger;
  std::vector<std::size_t> child_indices;
  std::size_t offset = 0;
  std::size_t width = 0;
};

class SearchSpace {
 public:
  explicit SearchSpace(std::vector<DimensionSpec> roots) : roots_(std::move(roots)) {
    if (roots_.empty())
      throw SpaceError(SpaceError::Kind::semantic, "space has no dimensions");
    std::set<std::string> names;
    for (const auto& r : roots_) flatten(r, std::nullopt, std::nullopt, names);
  }

  const std::vector<DimensionSpec>& roots() const { return roots_; }
  const std::vector<FlatDimension>& dimensions() const { return dims_; }
  std::size_t feature_width() const { return width_; }

  /// True when every dimension is a root-level continuous/integer dimension,
  /// i.e. the space is an axis-aligned box that maps onto [0,1]^d.
  bool is_hypercube() const {
    return std::all_of(dims_.begin(), dims_.end(), [](const FlatDimension& d) {
      return !d.parent && d.child_indices.empty() && d.spec.is_numeric();
    });
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < dims_.size(); ++i)
      if (dims_[i].spec.name == name) return i;
    throw InvalidArgument("unknown dimension '" + name + "'");
  }

 private:
  void flatten(const DimensionSpec& spec, std::optional<std::size_t> parent,
               std::optional<Value> trigger, std::set<std::string>& names) {
    validate_dimension(spec);
    if (!names.insert(spec.name).second)
      throw SpaceError(SpaceError::Kind::semantic,
                       "duplicate dimension name '" + spec.name + "'");
    FlatDimension flat;
    flat.spec = spec;
    flat.spec.children.clear();
    flat.parent = parent;
    flat.trigger = std::move(trigger);
    flat.offset = width_;
    flat.width = spec.is_numeric() || spec.kind == DimensionKind::boolean
                     ? 1
                     : spec.categories.size();
    width_ += flat.width;
    const std::size_t self = dims_.size();
    dims_.push_back(std::move(flat));
    if (parent) dims_[*parent].child_indices.push_back(self);
    for (const auto& child : spec.children) {
      check_trigger(spec, child.when);
      flatten(child.dimension, self, child.when, names);
    }
  }

  static void validate_dimension(const DimensionSpec& d) {
    auto fail = [&](const std::string& msg) {
      throw SpaceError(SpaceError::Kind::semantic, "dimension '" + d.name + "': " + msg);
    };
    if (d.name.empty()) throw SpaceError(SpaceError::Kind::semantic, "dimension with empty name");
    switch (d.kind) {
      case DimensionKind::continuous:
        if (!std::isfinite(d.lo) || !std::isfinite(d.hi)) fail("bounds must be finite");
        if (!(d.lo < d.hi)) fail("bounds inverted or empty (need min < max)");
        break;
      case DimensionKind::integer:
        if (d.lo != std::floor(d.lo) || d.hi != std::floor(d.hi))
          fail("integer bounds must be whole numbers");
        if (!(d.lo <= d.hi)) fail("bounds inverted (need min <= max)");
        break;
      case DimensionKind::categorical:
      case DimensionKind::ordinal: {
        if (d.categories.size() < 2) fail("needs at least 2 categories");
        std::set<std::string> seen(d.categories.begin(), d.categories.end());
        if (seen.size() != d.categories.size()) fail("duplicate category labels");
        break;
      }
      case DimensionKind::boolean:
        break;
    }
    if (d.scale == Scale::log) {
      if (!d.is_numeric()) fail("log scale applies to numeric dimensions only");
      if (!(d.lo > 0.0)) fail("log scale requires a positive lower bound");
    }
  }

  static void check_trigger(const DimensionSpec& parent, const Value& when) {
    auto fail = [&] {
      throw SpaceError(SpaceError::Kind::semantic,
                       "dimension '" + parent.name + "': child trigger " +
                           value_to_string(when) + " is not a value of the parent");
    };
    switch (parent.kind) {
      case DimensionKind::continuous:
        throw SpaceError(SpaceError::Kind::semantic,
                         "dimension '" + parent.name +
                             "': continuous dimensions cannot have conditional children");
      case DimensionKind::integer: {
        const auto* v = std::get_if<std::int64_t>(&when);
        if (!v || *v < parent.lo || *v > parent.hi) fail();
        break;
      }
      case DimensionKind::boolean:
        if (!std::holds_alternative<bool>(when)) fail();
        break;
      case DimensionKind::categorical:
      case DimensionKind::ordinal: {
        const auto* v = std::get_if<std::string>(&when);
        if (!v || std::find(parent.categories.begin(), parent.categories.end(), *v) ==
                      parent.categories.end())
          fail();
        break;
      }
    }
  }

  std::vector<DimensionSpec> roots_;
  std::vector<FlatDimension> dims_;
  std::size_t width_ = 0;
};

/// [0,1]^d with linear continuous dimensions named x0..x{d-1}.
inline SearchSpace hypercube_space(std::size_t d) {
  std::vector<DimensionSpec> roots;
  for (std::size_t i = 0; i < d; ++i) {
    DimensionSpec s;
    s.name = "x" + std::to_string(i);
    roots.push_back(std::move(s));
  }
  return SearchSpace(std::move(roots));
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline DimensionKind parse_kind(const std::string& s, const std::string& dim) {
  if (s == "continuous") return DimensionKind::continuous;
  if (s == "integer") return DimensionKind::integer;
  if (s == "categorical") return DimensionKind::categorical;
  if (s == "ordinal") return DimensionKind::ordinal;
  if (s == "boolean") return DimensionKind::boolean;
  throw SpaceError(SpaceError::Kind::semantic,
                   "dimension '" + dim + "': unknown kind '" + s + "'");
}

inline DimensionSpec parse_dimension(const nlohmann::json& j, int depth) {
  using Kind = SpaceError::Kind;
  if (depth > 256) throw SpaceError(Kind::semantic, "dimension tree nested too deeply");
  if (!j.is_object()) throw SpaceError(Kind::semantic, "dimension entry must be an object");
  static const std::set<std::string> allowed = {"name", "kind", "bounds",
                                                "categories", "scale", "children"};
  const std::string label = j.contains("name") && j["name"].is_string()
                                ? j["name"].get<std::string>()
                                : std::string("<unnamed>");
  auto fail = [&](const std::string& msg) {
    throw SpaceError(Kind::semantic, "dimension '" + label + "': " + msg);
  };
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail("unknown key '" + key + "'");
  if (!j.contains("name") || !j["name"].is_string()) fail("missing string 'name'");
  if (!j.contains("kind") || !j["kind"].is_string()) fail("missing string 'kind'");

  DimensionSpec d;
  d.name = j["name"].get<std::string>();
  d.kind = parse_kind(j["kind"].get<std::string>(), d.name);

  if (d.is_numeric()) {
    if (!j.contains("bounds")) fail("missing 'bounds'");
    const auto& b = j["bounds"];
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
      fail("'bounds' must be [min, max]");
    d.lo = b[0].get<double>();
    d.hi = b[1].get<double>();
    if (j.contains("categories")) fail("'categories' not allowed for numeric kinds");
  } else {
    if (j.contains("bounds")) fail("'bounds' not allowed for this kind");
    if (j.contains("scale")) fail("'scale' not allowed for this kind");
  }
  if (d.kind == DimensionKind::categorical || d.kind == DimensionKind::ordinal) {
    if (!j.contains("categories") || !j["categories"].is_array())
      fail("missing 'categories' list");
    for (const auto& c : j["categories"]) {
      if (!c.is_string()) fail("category labels must be strings");
      d.categories.push_back(c.get<std::string>());
    }
  } else if (j.contains("categories")) {
    fail("'categories' not allowed for this kind");
  }
  if (j.contains("scale")) {
    const auto& s = j["scale"];
    if (s == "linear") d.scale = Scale::linear;
    else if (s == "log") d.scale = Scale::log;
    else fail("'scale' must be \"linear\" or \"log\"");
  }
  if (j.contains("children")) {
    if (!j["children"].is_array()) fail("'children' must be a list");
    for (const auto& c : j["children"]) {
      if (!c.is_object() || !c.contains("when") || !c.contains("dimension") ||
          c.size() != 2)
        fail("each child must be {\"when\": value, \"dimension\": {...}}");
      const auto& w = c["when"];
      Value when;
      if (w.is_boolean()) when = w.get<bool>();
      else if (w.is_number_integer()) when = w.get<std::int64_t>();
      else if (w.is_string()) when = w.get<std::string>();
      else fail("child trigger must be a boolean, integer or string");
      d.children.push_back({std::move(when), parse_dimension(c["dimension"], depth + 1)});
    }
  }
  return d;
}

}  // namespace detail

/// Parses a JSON space document:
///   {"version": 1, "dimensions": [{"name", "kind", "bounds" | "categories",
///    "scale"?, "children"?: [{"when": v, "dimension": {...}}]}]}
/// Throws SpaceError (syntax errors carry the byte offset).
inline SearchSpace parse_space(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SpaceError(SpaceError::Kind::syntax,
                     "at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  using Kind = SpaceError::Kind;
  if (!doc.is_object()) throw SpaceError(Kind::semantic, "document must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (key != "version" && key != "dimensions")
      throw SpaceError(Kind::semantic, "unknown top-level key '" + key + "'");
  if (doc.contains("version") &&
      (!doc["version"].is_number_integer() || doc["version"].get<int>() != 1))
    throw SpaceError(Kind::semantic, "unsupported schema version (expected 1)");
  if (!doc.contains("dimensions") || !doc["dimensions"].is_array())
    throw SpaceError(Kind::semantic, "missing 'dimensions' list");
  std::vector<DimensionSpec> roots;
  for (const auto& d : doc["dimensions"]) roots.push_back(detail::parse_dimension(d, 0));
  return SearchSpace(std::move(roots));
}

// ---------------------------------------------------------------------------
// Sampling and encoding

/// Maps a rescaled coordinate t in [0,1] back to a dimension value (inverse of
/// the feature rescaling). Integers are rounded to the nearest admissible value.
inline Value decode_numeric(const DimensionSpec& d, double t) {
  double h;
  if (d.scale == Scale::log) {
    const double a = std::log(d.lo), b = std::log(d.hi);
    h = std::exp(a + t * (b - a));
  } else {
    h = d.lo + t * (d.hi - d.lo);
  }
  h = std::clamp(h, d.lo, d.hi);
  if (d.kind == DimensionKind::integer) return static_cast<std::int64_t>(std::llround(h));
  return h;
}

inline double rescale(const DimensionSpec& d, double h) {
  if (d.hi == d.lo) return 0.0;
  double t = d.scale == Scale::log
                 ? (std::log(h) - std::log(d.lo)) / (std::log(d.hi) - std::log(d.lo))
                 : (h - d.lo) / (d.hi - d.lo);
  return std::clamp(t, 0.0, 1.0);
}

namespace detail {

inline Value sample_value(const DimensionSpec& d, Rng& rng) {
  switch (d.kind) {
    case DimensionKind::continuous:
      if (d.scale == Scale::log)
        return std::exp(rng.uniform(std::log(d.lo), std::log(d.hi)));
      return rng.uniform(d.lo, d.hi);
    case DimensionKind::integer: {
      const auto lo = static_cast<std::int64_t>(d.lo);
      const auto n = static_cast<std::uint64_t>(static_cast<std::int64_t>(d.hi) - lo + 1);
      return lo + static_cast<std::int64_t>(rng.index(n));
    }
    case DimensionKind::boolean:
      return rng.index(2) == 1;
    case DimensionKind::categorical:
    case DimensionKind::ordinal:
      return d.categories[rng.index(d.categories.size())];
  }
  return 0.0;
}

inline void sample_subtree(const SearchSpace& space, std::size_t i, Rng& rng,
                           Configuration& out) {
  const auto& dim = space.dimensions()[i];
  Value v = sample_value(dim.spec, rng);
  for (std::size_t c : dim.child_indices)
    if (*space.dimensions()[c].trigger == v) sample_subtree(space, c, rng, out);
  out.values.emplace(dim.spec.name, std::move(v));
}

inline bool value_in_domain(const DimensionSpec& d, const Value& v) {
  switch (d.kind) {
    case DimensionKind::continuous: {
      const auto* x = std::get_if<double>(&v);
      return x && *x >= d.lo && *x <= d.hi;
    }
    case DimensionKind::integer: {
      const auto* x = std::get_if<std::int64_t>(&v);
      return x && *x >= d.lo && *x <= d.hi;
    }
    case DimensionKind::boolean:
      return std::holds_alternative<bool>(v);
    case DimensionKind::categorical:
    case DimensionKind::ordinal: {
      const auto* x = std::get_if<std::string>(&v);
      return x && std::find(d.categories.begin(), d.categories.end(), *x) != d.categories.end();
    }
  }
  return false;
}

}  // namespace detail

/// Root-to-leaf uniform draw; children are sampled only when triggered.
inline Configuration sample_uniform(const SearchSpace& space, Rng& rng) {
  Configuration c;
  const auto& dims = space.dimensions();
  for (std::size_t i = 0; i < dims.size(); ++i)
    if (!dims[i].parent) detail::sample_subtree(space, i, rng, c);
  return c;
}

/// Throws InvalidArgument unless `config` satisfies the activity and domain
/// rules of `space`.
inline void validate(const SearchSpace& space, const Configuration& config) {
  const auto& dims = space.dimensions();
  std::size_t seen = 0;
  for (const auto& dim : dims) {
    bool should_be_active = true;
    if (dim.parent) {
      const auto& parent = dims[*dim.parent];
      auto it = config.values.find(parent.spec.name);
      should_be_active = it != config.values.end() && it->second == *dim.trigger;
    }
    auto it = config.values.find(dim.spec.name);
    const bool is_active = it != config.values.end();
    if (is_active != should_be_active)
      throw InvalidArgument("dimension '" + dim.spec.name + "' should be " +
                            (should_be_active ? "active" : "inactive"));
    if (is_active) {
      ++seen;
      if (!detail::value_in_domain(dim.spec, it->second))
        throw InvalidArgument("dimension '" + dim.spec.name + "': value " +
                              value_to_string(it->second) + " outside its domain");
    }
  }
  if (seen != config.values.size())
    throw InvalidArgument("configuration names a dimension not in the space");
}

/// Feature encoding: numeric -> one rescaled entry (log domain for log scale),
/// boolean -> one 0/1 entry, categorical -> one-hot, ordinal -> unary.
/// Segments of inactive dimensions stay zero.
inline FeatureVector encode(const SearchSpace& space, const Configuration& config) {
  validate(space, config);
  FeatureVector phi = FeatureVector::Zero(static_cast<Eigen::Index>(space.feature_width()));
  for (const auto& dim : space.dimensions()) {
    auto it = config.values.find(dim.spec.name);
    if (it == config.values.end()) continue;
    const auto off = static_cast<Eigen::Index>(dim.offset);
    const auto& v = it->second;
    switch (dim.spec.kind) {
      case DimensionKind::continuous:
        phi[off] = rescale(dim.spec, std::get<double>(v));
        break;
      case DimensionKind::integer:
        phi[off] = rescale(dim.spec, static_cast<double>(std::get<std::int64_t>(v)));
        break;
      case DimensionKind::boolean:
        phi[off] = std::get<bool>(v) ? 1.0 : 0.0;
        break;
      case DimensionKind::categorical:
      case DimensionKind::ordinal: {
        const auto& cats = dim.spec.categories;
        const auto level = static_cast<Eigen::Index>(
            std::find(cats.begin(), cats.end(), std::get<std::string>(v)) - cats.begin());
        if (dim.spec.kind == DimensionKind::categorical) phi[off + level] = 1.0;
        else phi.segment(off, level + 1).setOnes();
        break;
      }
    }
  }
  return phi;
}

/// Per-item quality score. Constant in the open-loop setting.
inline double quality(const Configuration&) { return 1.0; }

/// Configuration as a JSON object in feature-layout order, inactive dims omitted.
inline nlohmann::ordered_json to_json(const SearchSpace& space, const Configuration& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& dim : space.dimensions()) {
    auto it = c.values.find(dim.spec.name);
    if (it == c.values.end()) continue;
    std::visit([&](const auto& x) { j[dim.spec.name] = x; }, it->second);
  }
  return j;
}

/// Coordinates of a hypercube-space configuration in [0,1]^d.
inline std::vector<double> unit_coordinates(const SearchSpace& space, const Configuration& c) {
  const FeatureVector phi = encode(space, c);
  return {phi.data(), phi.data() + phi.size()};
}

}  // namespace dppsearch

#endif  // DPPSEARCH_SEARCHSPACE_HPP
