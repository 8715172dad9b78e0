#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rwmc/error.hpp"
#include "rwmc/graph.hpp"

namespace rwmc {

inline constexpr std::string_view kNotReported = "Not Reported";

enum class AttributeKind { Categorical, Numeric };

/// Declaration of one attribute column. An empty level list on a
/// categorical attribute means "accept every value seen, in order".
struct AttributeDecl {
  std::string name;
  AttributeKind kind = AttributeKind::Categorical;
  std::vector<std::string> levels;
  std::optional<double> numeric_default;
};

struct CategoricalColumn {
  std::string name;
  std::vector<std::string> levels;
  std::vector<std::uint32_t> level_of;  // indexed by dense node id

  std::optional<std::uint32_t> level_index(std::string_view level) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i] == level) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }

  /// Fraction of nodes at each level.
  std::vector<double> proportions() const {
    std::vector<double> out(levels.size(), 0.0);
    for (auto l : level_of) out[l] += 1.0;
    for (auto& x : out) x /= static_cast<double>(level_of.size());
    return out;
  }
};

struct NumericColumn {
  std::string name;
  std::vector<double> values;
};

/// Nodal attributes aligned to a graph's dense ids.
class AttributeTable {
 public:
  AttributeTable() = default;
  explicit AttributeTable(std::size_t n) : n_(n) {}

  std::size_t num_nodes() const noexcept { return n_; }
  std::size_t unknown_labels_skipped = 0;

  void add(CategoricalColumn c) {
    if (c.level_of.size() != n_) throw InvalidArgument("attribute '" + c.name + "' does not cover every node");
    for (auto l : c.level_of)
      if (l >= c.levels.size()) throw InvalidArgument("attribute '" + c.name + "' has a level index out of range");
    categorical_.push_back(std::move(c));
  }

  void add(NumericColumn c) {
    if (c.values.size() != n_) throw InvalidArgument("attribute '" + c.name + "' does not cover every node");
    numeric_.push_back(std::move(c));
  }

  const CategoricalColumn* categorical(std::string_view name) const {
    for (const auto& c : categorical_)
      if (c.name == name) return &c;
    return nullptr;
  }

  const NumericColumn* numeric(std::string_view name) const {
    for (const auto& c : numeric_)
      if (c.name == name) return &c;
    return nullptr;
  }

  const std::vector<CategoricalColumn>& categorical_columns() const noexcept { return categorical_; }
  const std::vector<NumericColumn>& numeric_columns() const noexcept { return numeric_; }

  /// Re-indexes onto a subgraph given its new-id -> old-id mapping.
  AttributeTable remap(const std::vector<NodeId>& old_ids) const {
    AttributeTable out(old_ids.size());
    for (const auto& c : categorical_) {
      CategoricalColumn r{c.name, c.levels, {}};
      r.level_of.reserve(old_ids.size());
      for (auto v : old_ids) r.level_of.push_back(c.level_of.at(v));
      out.categorical_.push_back(std::move(r));
    }
    for (const auto& c : numeric_) {
      NumericColumn r{c.name, {}};
      r.values.reserve(old_ids.size());
      for (auto v : old_ids) r.values.push_back(c.values.at(v));
      out.numeric_.push_back(std::move(r));
    }
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::vector<CategoricalColumn> categorical_;
  std::vector<NumericColumn> numeric_;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Parses "name:cat", "name:cat:L1|L2|...", "name:num" or "name:num:<default>".
inline AttributeDecl parse_attribute_decl(std::string_view text) {
  auto parts = detail::split(text, ':');
  if (parts.size() < 2 || parts.size() > 3 || parts[0].empty())
    throw InvalidArgument("bad attribute declaration '" + std::string(text) + "'");
  AttributeDecl d;
  d.name = std::string(parts[0]);
  if (parts[1] == "cat") {
    d.kind = AttributeKind::Categorical;
    if (parts.size() == 3)
      for (auto l : detail::split(parts[2], '|'))
        if (!l.empty()) d.levels.emplace_back(l);
  } else if (parts[1] == "num") {
    d.kind = AttributeKind::Numeric;
    if (parts.size() == 3) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), v);
      if (ec != std::errc() || ptr != parts[2].data() + parts[2].size())
        throw InvalidArgument("bad numeric default in '" + std::string(text) + "'");
      d.numeric_default = v;
    }
  } else {
    throw InvalidArgument("attribute kind must be 'cat' or 'num' in '" + std::string(text) + "'");
  }
  return d;
}

/// Reads a delimited attribute file with a header row. `label_column` names
/// the column holding node labels; every declared attribute must appear in
/// the header. Rows for labels absent from the graph are skipped and
/// counted in `unknown_labels_skipped`. Nodes without a row (or with an
/// empty cell) get the "Not Reported" level, or the numeric default.
inline AttributeTable load_attributes(const Graph& g, std::istream& in, const std::vector<AttributeDecl>& schema,
                                      std::string_view label_column = "id", char delim = ',') {
  const std::size_t n = g.num_nodes();
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = detail::trim(line);
    if (body.empty()) continue;
    for (auto f : detail::split(body, delim)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw InvalidArgument("attribute file has no header row");

  auto column_of = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InvalidArgument("attribute file has no column '" + std::string(name) + "'");
  };
  const std::size_t label_col = column_of(label_column);
  std::vector<std::size_t> cols;
  for (const auto& d : schema) cols.push_back(column_of(d.name));

  constexpr std::uint32_t kMissing = UINT32_MAX;
  std::vector<std::vector<std::string>> levels(schema.size());
  std::vector<std::vector<std::uint32_t>> codes(schema.size());
  std::vector<std::vector<std::optional<double>>> nums(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (schema[a].kind == AttributeKind::Categorical) {
      levels[a] = schema[a].levels;
      codes[a].assign(n, kMissing);
    } else {
      nums[a].assign(n, std::nullopt);
    }
  }

  AttributeTable table(n);
  while (std::getline(in, line)) {
    ++lineno;
    auto body = detail::trim(line);
    if (body.empty()) continue;
    auto fields = detail::split(body, delim);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields", lineno);
    auto label = detail::parse_label(fields[label_col]);
    if (!label) throw ParseError("malformed node label '" + std::string(fields[label_col]) + "'", lineno);
    auto v = g.find(*label);
    if (!v) {
      ++table.unknown_labels_skipped;
      continue;
    }
    for (std::size_t a = 0; a < schema.size(); ++a) {
      auto cell = fields[cols[a]];
      if (cell.empty()) continue;
      if (schema[a].kind == AttributeKind::Categorical) {
        auto& lv = levels[a];
        std::uint32_t code = kMissing;
        for (std::size_t i = 0; i < lv.size(); ++i)
          if (lv[i] == cell) code = static_cast<std::uint32_t>(i);
        if (code == kMissing) {
          if (!schema[a].levels.empty())
            throw ParseError("undeclared level '" + std::string(cell) + "' for attribute '" + schema[a].name + "'",
                             lineno);
          code = static_cast<std::uint32_t>(lv.size());
          lv.emplace_back(cell);
        }
        codes[a][*v] = code;
      } else {
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc() || ptr != cell.data() + cell.size())
          throw ParseError("malformed numeric value '" + std::string(cell) + "' for attribute '" + schema[a].name +
                               "'",
                           lineno);
        nums[a][*v] = value;
      }
    }
  }

  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (schema[a].kind == AttributeKind::Categorical) {
      auto& lv = levels[a];
      std::optional<std::uint32_t> nr;
      for (auto& c : codes[a]) {
        if (c != kMissing) continue;
        if (!nr) {
          for (std::size_t i = 0; i < lv.size(); ++i)
            if (lv[i] == kNotReported) nr = static_cast<std::uint32_t>(i);
          if (!nr) {
            nr = static_cast<std::uint32_t>(lv.size());
            lv.emplace_back(kNotReported);
          }
        }
        c = *nr;
      }
      table.add(CategoricalColumn{schema[a].name, std::move(lv), std::move(codes[a])});
    } else {
      NumericColumn col{schema[a].name, std::vector<double>(n)};
      for (std::size_t v = 0; v < n; ++v) {
        if (nums[a][v]) {
          col.values[v] = *nums[a][v];
        } else if (schema[a].numeric_default) {
          col.values[v] = *schema[a].numeric_default;
        } else {
          throw InvalidArgument("numeric attribute '" + schema[a].name + "' missing for node label " +
                                std::to_string(g.label(static_cast<NodeId>(v))) + " and no default declared");
        }
      }
      table.add(std::move(col));
    }
  }
  return table;
}

}  // namespace rwmc
