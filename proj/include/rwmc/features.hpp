#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rwmc/attributes.hpp"
#include "rwmc/error.hpp"
#include "rwmc/graph.hpp"

namespace rwmc {

enum class FeatureKind { Degree, DegreeIndicator, LocalClustering, AttributeIndicator, NumericAttribute };

struct FeatureComponent {
  FeatureKind kind = FeatureKind::Degree;
  std::size_t k = 0;      // DegreeIndicator threshold
  std::string attribute;  // AttributeIndicator / NumericAttribute
  std::string level;      // AttributeIndicator

  static FeatureComponent degree() { return {FeatureKind::Degree, 0, {}, {}}; }
  static FeatureComponent degree_indicator(std::size_t k) { return {FeatureKind::DegreeIndicator, k, {}, {}}; }
  static FeatureComponent clustering() { return {FeatureKind::LocalClustering, 0, {}, {}}; }
  static FeatureComponent attribute_indicator(std::string attr, std::string level) {
    return {FeatureKind::AttributeIndicator, 0, std::move(attr), std::move(level)};
  }
  static FeatureComponent numeric(std::string attr) { return {FeatureKind::NumericAttribute, 0, std::move(attr), {}}; }

  /// Short name used in reports; also the token accepted by parse_feature_spec.
  std::string name() const {
    switch (kind) {
      case FeatureKind::Degree: return "degree";
      case FeatureKind::DegreeIndicator: return "deg=" + std::to_string(k);
      case FeatureKind::LocalClustering: return "cc";
      case FeatureKind::AttributeIndicator: return "attr:" + attribute + "=" + level;
      case FeatureKind::NumericAttribute: return "num:" + attribute;
    }
    return {};
  }

  friend bool operator==(const FeatureComponent&, const FeatureComponent&) = default;
};

/// Ordered list of feature components; p = size().
struct FeatureSpec {
  std::vector<FeatureComponent> components;

  std::size_t size() const noexcept { return components.size(); }
  bool degree_first() const { return !components.empty() && components.front().kind == FeatureKind::Degree; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : components) out.push_back(c.name());
    return out;
  }

  /// Checks p >= 1 and that every attribute reference resolves.
  void validate(const AttributeTable* attrs) const {
    if (components.empty()) throw InvalidArgument("feature spec must have at least one component");
    for (const auto& c : components) {
      if (c.kind == FeatureKind::AttributeIndicator) {
        const auto* col = attrs ? attrs->categorical(c.attribute) : nullptr;
        if (!col) throw InvalidArgument("unknown categorical attribute '" + c.attribute + "'");
        if (!col->level_index(c.level))
          throw InvalidArgument("attribute '" + c.attribute + "' has no level '" + c.level + "'");
      } else if (c.kind == FeatureKind::NumericAttribute) {
        if (!attrs || !attrs->numeric(c.attribute))
          throw InvalidArgument("unknown numeric attribute '" + c.attribute + "'");
      }
    }
  }
};

/// Parses a comma-separated list of tokens:
///   degree | deg=<k> | cc | attr:<name>=<level> | num:<name>
inline FeatureSpec parse_feature_spec(std::string_view text) {
  FeatureSpec spec;
  for (auto tok : detail::split(text, ',')) {
    if (tok.empty()) continue;
    if (tok == "degree") {
      spec.components.push_back(FeatureComponent::degree());
    } else if (tok == "cc") {
      spec.components.push_back(FeatureComponent::clustering());
    } else if (tok.starts_with("deg=")) {
      auto v = detail::parse_label(tok.substr(4));
      if (!v || *v < 0) throw InvalidArgument("bad degree indicator '" + std::string(tok) + "'");
      spec.components.push_back(FeatureComponent::degree_indicator(static_cast<std::size_t>(*v)));
    } else if (tok.starts_with("attr:")) {
      auto rest = tok.substr(5);
      auto eq = rest.find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw InvalidArgument("bad attribute indicator '" + std::string(tok) + "'");
      spec.components.push_back(
          FeatureComponent::attribute_indicator(std::string(rest.substr(0, eq)), std::string(rest.substr(eq + 1))));
    } else if (tok.starts_with("num:") && tok.size() > 4) {
      spec.components.push_back(FeatureComponent::numeric(std::string(tok.substr(4))));
    } else {
      throw InvalidArgument("unknown feature '" + std::string(tok) + "'");
    }
  }
  if (spec.components.empty()) throw InvalidArgument("feature spec must have at least one component");
  return spec;
}

namespace detail {

inline double component_value(const FeatureComponent& c, const NodeStats& s, const AttributeTable* attrs, NodeId v) {
  switch (c.kind) {
    case FeatureKind::Degree: return static_cast<double>(s.degree);
    case FeatureKind::DegreeIndicator: return s.degree == c.k ? 1.0 : 0.0;
    case FeatureKind::LocalClustering: return s.clustering;
    case FeatureKind::AttributeIndicator: {
      const auto* col = attrs ? attrs->categorical(c.attribute) : nullptr;
      if (!col) throw InvalidArgument("unknown categorical attribute '" + c.attribute + "'");
      auto lvl = col->level_index(c.level);
      if (!lvl) throw InvalidArgument("attribute '" + c.attribute + "' has no level '" + c.level + "'");
      return col->level_of.at(v) == *lvl ? 1.0 : 0.0;
    }
    case FeatureKind::NumericAttribute: {
      const auto* col = attrs ? attrs->numeric(c.attribute) : nullptr;
      if (!col) throw InvalidArgument("unknown numeric attribute '" + c.attribute + "'");
      return col->values.at(v);
    }
  }
  return 0.0;
}

}  // namespace detail

/// h(v): degree, degree indicators, clustering, attribute indicators and
/// raw numeric attributes, in spec order.
inline std::vector<double> evaluate_h(const FeatureSpec& spec, const NodeStats& stats, const AttributeTable* attrs,
                                      NodeId v) {
  std::vector<double> out;
  out.reserve(spec.size());
  for (const auto& c : spec.components) out.push_back(detail::component_value(c, stats, attrs, v));
  return out;
}

/// h*(v): 1/d_v in the leading (degree) slot, every other component of h
/// divided by d_v.
inline std::vector<double> evaluate_h_star(const FeatureSpec& spec, const NodeStats& stats,
                                           const AttributeTable* attrs, NodeId v) {
  if (!spec.degree_first()) throw InvalidArgument("h* requires degree as the first feature");
  if (stats.degree == 0) throw InvalidArgument("h* undefined at an isolated node");
  auto out = evaluate_h(spec, stats, attrs, v);
  const double d = static_cast<double>(stats.degree);
  out[0] = 1.0;
  for (auto& x : out) x /= d;
  return out;
}

/// Precomputes h (or h*) for every node so walks can copy rows instead of
/// re-evaluating features at each step.
class FeatureTable {
 public:
  enum class Form { Plain, Star };

  FeatureTable(const Graph& g, const FeatureSpec& spec, const AttributeTable* attrs, Form form)
      : p_(spec.size()), form_(form) {
    spec.validate(attrs);
    if (form == Form::Star && !spec.degree_first())
      throw InvalidArgument("the random-walk ratio estimator needs degree as the first feature");
    values_.reserve(g.num_nodes() * p_);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      auto s = node_stats(g, v);
      auto row = form == Form::Star ? evaluate_h_star(spec, s, attrs, v) : evaluate_h(spec, s, attrs, v);
      values_.insert(values_.end(), row.begin(), row.end());
    }
  }

  std::size_t dimension() const noexcept { return p_; }
  Form form() const noexcept { return form_; }

  std::span<const double> operator()(NodeId v) const { return {values_.data() + std::size_t{v} * p_, p_}; }

 private:
  std::size_t p_;
  Form form_;
  std::vector<double> values_;
};

}  // namespace rwmc
