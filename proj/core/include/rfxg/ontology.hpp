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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rfxg {

// Directed acyclic class hierarchy. Some nodes are classifier classes and
// carry a class index; indices are dense in [0, class_count()).
class Hierarchy {
 public:
  std::size_t node_count() const { return names_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t class_count() const { return class_nodes_.size(); }

  const std::string& name(std::size_t node) const { return names_[node]; }
  std::optional<std::size_t> find(std::string_view name) const;

  // Sorted by name.
  const std::vector<std::size_t>& parents(std::size_t node) const { return parents_[node]; }
  const std::vector<std::size_t>& children(std::size_t node) const { return children_[node]; }
  std::vector<std::size_t> roots() const;

  std::size_t class_node(std::size_t class_index) const { return class_nodes_[class_index]; }
  std::optional<std::size_t> class_of(std::size_t node) const { return node_class_[node]; }
  const std::string& class_name(std::size_t class_index) const {
    return names_[class_nodes_[class_index]];
  }

  // Sorted class indices of every class node in the subtree rooted at node
  // (the node itself included).
  const std::vector<std::size_t>& leaf_classes(std::size_t node) const {
    return leaf_classes_[node];
  }

 private:
  friend Hierarchy parse_hierarchy(std::istream& in);

  std::vector<std::string> names_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::optional<std::size_t>> node_class_;
  std::vector<std::size_t> class_nodes_;
  std::vector<std::vector<std::size_t>> leaf_classes_;
  std::size_t edge_count_ = 0;
};

// Parses "parent<TAB>child" edges and "leaf<TAB>name<TAB>class-index"
// declarations; '#' starts a comment. Throws HierarchyError on cycles,
// unknown leaf nodes, duplicate or missing class indices, and FormatError on
// malformed lines.
Hierarchy parse_hierarchy(std::istream& in);
Hierarchy parse_hierarchy(std::string_view text);

struct SemanticGroup {
  std::string label;
  std::vector<std::size_t> members;  // sorted class indices
  // Set when the whole class set is smaller than the minimum group size.
  bool residual = false;
  friend bool operator==(const SemanticGroup&, const SemanticGroup&) = default;
};

// Semantic groups plus the single primary group of every class.
class GroupTable {
 public:
  GroupTable() = default;
  GroupTable(std::vector<std::string> class_names, std::vector<SemanticGroup> groups,
             std::vector<std::size_t> primary);

  std::size_t class_count() const { return class_names_.size(); }
  const std::string& class_name(std::size_t c) const { return class_names_.at(c); }
  const std::vector<SemanticGroup>& groups() const { return groups_; }
  std::size_t primary_group_index(std::size_t c) const { return primary_.at(c); }
  const SemanticGroup& primary_group(std::size_t c) const {
    return groups_[primary_.at(c)];
  }

  friend bool operator==(const GroupTable&, const GroupTable&) = default;

 private:
  std::vector<std::string> class_names_;
  std::vector<SemanticGroup> groups_;
  std::vector<std::size_t> primary_;
};

// Builds groups of at least min_size classes. Each class not already covered
// by an earlier group starts from its immediate superordinate; a group that is
// too small absorbs sibling subtrees smallest first (ties by name), then
// ascends to the parent when the siblings run out. The label is the node whose
// leaf set equals the merged members, or the contributing names joined by '+'.
GroupTable build_groups(const Hierarchy& hierarchy, std::size_t min_size = 5);

// Members of the class's primary group, minus the class itself.
std::vector<std::size_t> contrast_group(const GroupTable& table, std::size_t class_a);

// "class-index<TAB>class-name<TAB>group-label" per class, by class index.
void write_group_table(std::ostream& out, const GroupTable& table);
std::string format_group_table(const GroupTable& table);
// Rebuilds a table from write_group_table output. Groups keep only their
// primary members.
GroupTable parse_group_table(std::istream& in);

}  // namespace rfxg
