/*
 * Copyright 2026 The rfxg Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rfxg/ontology.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rfxg/error.hpp"

namespace rfxg {
namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::string strip_line(std::string line) {
  if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
    line.pop_back();
  }
  return line;
}

std::vector<std::size_t> set_union(const std::vector<std::size_t>& a,
                                   const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::optional<std::size_t> Hierarchy::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> Hierarchy::roots() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (parents_[i].empty()) out.push_back(i);
  }
  std::sort(out.begin(), out.end(),
            [&](std::size_t a, std::size_t b) { return names_[a] < names_[b]; });
  return out;
}

Hierarchy parse_hierarchy(std::istream& in) {
  Hierarchy h;
  std::map<std::string, std::size_t> ids;
  std::set<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::pair<std::string, std::size_t>> leaf_decls;
  std::vector<std::size_t> leaf_lines;

  const auto intern = [&](const std::string& name) {
    auto [it, inserted] = ids.emplace(name, h.names_.size());
    if (inserted) h.names_.push_back(name);
    return it->second;
  };

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_line(raw);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() == 3 && fields[0] == "leaf") {
      std::size_t index = 0;
      try {
        std::size_t pos = 0;
        index = std::stoul(fields[2], &pos);
        if (pos != fields[2].size()) throw FormatError("");
      } catch (const std::exception&) {
        throw FormatError(fmt::format("line {}: bad class index '{}'", line_no, fields[2]));
      }
      leaf_decls.emplace_back(fields[1], index);
      leaf_lines.push_back(line_no);
    } else if (fields.size() == 2) {
      if (fields[0].empty() || fields[1].empty()) {
        throw FormatError(fmt::format("line {}: empty node name", line_no));
      }
      const std::size_t parent = intern(fields[0]);
      const std::size_t child = intern(fields[1]);
      if (parent == child) {
        throw HierarchyError(fmt::format("line {}: cycle at '{}'", line_no, fields[0]));
      }
      edges.emplace(parent, child);
    } else {
      throw FormatError(fmt::format("line {}: expected 'parent<TAB>child' or "
                                    "'leaf<TAB>name<TAB>index'", line_no));
    }
  }

  const std::size_t n = h.names_.size();
  h.parents_.assign(n, {});
  h.children_.assign(n, {});
  h.node_class_.assign(n, std::nullopt);
  h.edge_count_ = edges.size();
  for (const auto& [p, c] : edges) {
    h.parents_[c].push_back(p);
    h.children_[p].push_back(c);
  }
  const auto by_name = [&](std::size_t a, std::size_t b) { return h.names_[a] < h.names_[b]; };
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(h.parents_[i].begin(), h.parents_[i].end(), by_name);
    std::sort(h.children_[i].begin(), h.children_[i].end(), by_name);
  }

  std::map<std::size_t, std::size_t> class_to_node;
  for (std::size_t i = 0; i < leaf_decls.size(); ++i) {
    const auto& [name, index] = leaf_decls[i];
    const auto it = ids.find(name);
    if (it == ids.end()) {
      throw HierarchyError(
          fmt::format("line {}: leaf '{}' is not a node of the hierarchy", leaf_lines[i], name));
    }
    if (h.node_class_[it->second] && *h.node_class_[it->second] != index) {
      throw HierarchyError(fmt::format("line {}: leaf '{}' declared twice", leaf_lines[i], name));
    }
    const auto [slot, inserted] = class_to_node.emplace(index, it->second);
    if (!inserted && slot->second != it->second) {
      throw HierarchyError(
          fmt::format("line {}: duplicate class index {}", leaf_lines[i], index));
    }
    h.node_class_[it->second] = index;
  }
  h.class_nodes_.resize(class_to_node.size());
  for (std::size_t expected = 0; const auto& [index, node] : class_to_node) {
    if (index != expected) {
      throw HierarchyError(fmt::format("class index {} missing (indices must cover 0..{})",
                                       expected, class_to_node.size() - 1));
    }
    h.class_nodes_[index] = node;
    ++expected;
  }

  // Depth-first post-order doubles as cycle detection.
  enum class Mark { kNew, kActive, kDone };
  std::vector<Mark> marks(n, Mark::kNew);
  h.leaf_classes_.assign(n, {});
  for (std::size_t start = 0; start < n; ++start) {
    if (marks[start] != Mark::kNew) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    marks[start] = Mark::kActive;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < h.children_[node].size()) {
        const std::size_t child = h.children_[node][next++];
        if (marks[child] == Mark::kActive) {
          throw HierarchyError(fmt::format("cycle through '{}'", h.names_[child]));
        }
        if (marks[child] == Mark::kNew) {
          marks[child] = Mark::kActive;
          stack.emplace_back(child, 0);
        }
        continue;
      }
      std::vector<std::size_t> leaves;
      if (h.node_class_[node]) leaves.push_back(*h.node_class_[node]);
      for (std::size_t child : h.children_[node]) {
        leaves = set_union(leaves, h.leaf_classes_[child]);
      }
      h.leaf_classes_[node] = std::move(leaves);
      marks[node] = Mark::kDone;
      stack.pop_back();
    }
  }
  return h;
}

Hierarchy parse_hierarchy(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_hierarchy(in);
}

GroupTable::GroupTable(std::vector<std::string> class_names,
                       std::vector<SemanticGroup> groups, std::vector<std::size_t> primary)
    : class_names_(std::move(class_names)),
      groups_(std::move(groups)),
      primary_(std::move(primary)) {
  if (primary_.size() != class_names_.size()) {
    throw DimensionError("primary group assignment does not cover every class");
  }
  for (std::size_t c = 0; c < primary_.size(); ++c) {
    if (primary_[c] >= groups_.size()) {
      throw InvalidArgument(fmt::format("class {} assigned to missing group", c));
    }
    const auto& members = groups_[primary_[c]].members;
    if (!std::binary_search(members.begin(), members.end(), c)) {
      throw InvalidArgument(fmt::format("class {} is not a member of its primary group", c));
    }
  }
}

GroupTable build_groups(const Hierarchy& h, std::size_t min_size) {
  if (min_size < 2) throw InvalidArgument("min_size must be at least 2");
  const std::size_t class_count = h.class_count();
  std::vector<std::string> class_names;
  for (std::size_t c = 0; c < class_count; ++c) class_names.push_back(h.class_name(c));

  if (class_count < min_size) {
    SemanticGroup residual;
    const auto roots = h.roots();
    residual.label = roots.size() == 1 ? h.name(roots.front()) : std::string("residual");
    for (std::size_t c = 0; c < class_count; ++c) residual.members.push_back(c);
    residual.residual = true;
    std::vector<SemanticGroup> groups;
    std::vector<std::size_t> primary(class_count, 0);
    if (class_count > 0) groups.push_back(std::move(residual));
    return GroupTable(std::move(class_names), std::move(groups), std::move(primary));
  }

  const auto roots = h.roots();
  const auto first_parent = [&](std::size_t node) -> std::optional<std::size_t> {
    if (h.parents(node).empty()) return std::nullopt;
    return h.parents(node).front();
  };
  const auto siblings_of = [&](std::size_t node) {
    std::vector<std::size_t> out;
    const auto parent = first_parent(node);
    for (std::size_t s : parent ? h.children(*parent) : roots) {
      if (s != node) out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
      const auto la = h.leaf_classes(a).size(), lb = h.leaf_classes(b).size();
      if (la != lb) return la < lb;
      return h.name(a) < h.name(b);
    });
    return out;
  };
  // Nearest node on the primary ancestor chain covering exactly `members`.
  const auto exact_label = [&](std::size_t unit,
                               const std::vector<std::size_t>& members) -> std::optional<std::string> {
    for (std::optional<std::size_t> node = unit; node; node = first_parent(*node)) {
      if (h.leaf_classes(*node) == members) return h.name(*node);
    }
    return std::nullopt;
  };

  std::vector<SemanticGroup> groups;
  std::vector<std::optional<std::size_t>> primary(class_count);
  for (std::size_t c = 0; c < class_count; ++c) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (std::binary_search(groups[g].members.begin(), groups[g].members.end(), c)) {
        primary[c] = g;
        break;
      }
    }
    if (primary[c]) continue;

    const std::size_t node = h.class_node(c);
    std::size_t unit = first_parent(node).value_or(node);
    SemanticGroup group;
    while (true) {
      std::vector<std::size_t> members = h.leaf_classes(unit);
      std::vector<std::string> names{h.name(unit)};
      if (members.size() < min_size) {
        for (std::size_t sibling : siblings_of(unit)) {
          members = set_union(members, h.leaf_classes(sibling));
          names.push_back(h.name(sibling));
          if (members.size() >= min_size) break;
        }
      }
      if (members.size() >= min_size) {
        group.members = std::move(members);
        if (auto label = exact_label(unit, group.members)) {
          group.label = *label;
        } else {
          group.label = fmt::format("{}", fmt::join(names, "+"));
        }
        break;
      }
      const auto parent = first_parent(unit);
      if (!parent) {
        // Unreachable when class_count >= min_size: the roots cover every class.
        throw HierarchyError("could not grow a group to the minimum size");
      }
      unit = *parent;
    }
    primary[c] = groups.size();
    groups.push_back(std::move(group));
  }

  std::vector<std::size_t> assignment;
  for (const auto& g : primary) assignment.push_back(*g);
  return GroupTable(std::move(class_names), std::move(groups), std::move(assignment));
}

std::vector<std::size_t> contrast_group(const GroupTable& table, std::size_t class_a) {
  if (class_a >= table.class_count()) {
    throw InvalidArgument(fmt::format("unknown class {}", class_a));
  }
  std::vector<std::size_t> out;
  for (std::size_t m : table.primary_group(class_a).members) {
    if (m != class_a) out.push_back(m);
  }
  return out;
}

void write_group_table(std::ostream& out, const GroupTable& table) {
  for (std::size_t c = 0; c < table.class_count(); ++c) {
    out << c << '\t' << table.class_name(c) << '\t' << table.primary_group(c).label << '\n';
  }
}

std::string format_group_table(const GroupTable& table) {
  std::ostringstream out;
  write_group_table(out, table);
  return out.str();
}

GroupTable parse_group_table(std::istream& in) {
  std::vector<std::string> names;
  std::vector<SemanticGroup> groups;
  std::vector<std::size_t> primary;
  std::map<std::string, std::size_t> by_label;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw FormatError(fmt::format("group table line {}: expected 3 fields", line_no));
    }
    if (fields[0] != std::to_string(names.size())) {
      throw FormatError(fmt::format("group table line {}: class index out of order", line_no));
    }
    const auto [it, inserted] = by_label.emplace(fields[2], groups.size());
    if (inserted) groups.push_back(SemanticGroup{fields[2], {}, false});
    groups[it->second].members.push_back(names.size());
    primary.push_back(it->second);
    names.push_back(fields[1]);
  }
  return GroupTable(std::move(names), std::move(groups), std::move(primary));
}

}  // namespace rfxg
