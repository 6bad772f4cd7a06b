#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gridground {

enum class NodeKind { Detect, And, Shift, Locate, Position, Held };

std::string_view to_string(NodeKind kind);

struct Node {
  NodeKind kind;
  std::string symbol;       // word for Detect, preposition symbol for Shift/Position
  std::vector<int> inputs;  // indices of earlier nodes
  bool operator==(const Node&) const = default;
};

/// A module program. Nodes are stored in execution order; the root is the
/// last node. Position takes {source, referent}; the source is either a
/// Locate subprogram or a Held marker (pronoun "it").
class ProgramGraph {
 public:
  ProgramGraph() = default;
  explicit ProgramGraph(std::vector<Node> nodes);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_.at(static_cast<std::size_t>(i)); }
  int size() const { return static_cast<int>(nodes_.size()); }
  int root() const { return size() - 1; }
  const Node& root_node() const { return nodes_.back(); }

  bool is_locate() const { return !nodes_.empty() && root_node().kind == NodeKind::Locate; }
  bool is_position() const { return !nodes_.empty() && root_node().kind == NodeKind::Position; }

  /// Arity, ordering and connectivity checks. Throws MalformedPhrase.
  void validate() const;

  /// Copy of the subprogram rooted at `node`, renumbered canonically.
  ProgramGraph subgraph(int node) const;

  /// Renumbers nodes in post-order from the root (inputs left to right),
  /// which for parsed programs is word order.
  ProgramGraph canonical() const;

  /// One token per node, space separated, e.g.
  /// "detect:apple detect:mug shift:right-of:1 and:0,2 locate:3".
  std::string serialize() const;
  static ProgramGraph deserialize(std::string_view text);

  /// Nested form for humans: locate(and(detect(apple), shift(right-of, detect(mug)))).
  std::string to_expression() const;

  int count(NodeKind kind) const;

  bool operator==(const ProgramGraph& o) const { return nodes_ == o.nodes_; }

 private:
  std::vector<Node> nodes_;
};

class GraphBuilder {
 public:
  int detect(std::string word);
  int conj(int a, int b);
  int shift(std::string preposition, int input);
  int locate(int input);
  int position(std::string preposition, int source, int referent);
  int held();

  ProgramGraph build() &&;

 private:
  int push(Node n);
  std::vector<Node> nodes_;
};

}  // namespace gridground
