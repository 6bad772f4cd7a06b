#include "gridground/program.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "gridground/errors.hpp"

namespace gridground {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Detect: return "detect";
    case NodeKind::And: return "and";
    case NodeKind::Shift: return "shift";
    case NodeKind::Locate: return "locate";
    case NodeKind::Position: return "position";
    case NodeKind::Held: return "held";
  }
  return "?";
}

namespace {

std::size_t arity(NodeKind kind) {
  switch (kind) {
    case NodeKind::Detect:
    case NodeKind::Held: return 0;
    case NodeKind::Shift:
    case NodeKind::Locate: return 1;
    case NodeKind::And:
    case NodeKind::Position: return 2;
  }
  return 0;
}

bool needs_symbol(NodeKind kind) {
  return kind == NodeKind::Detect || kind == NodeKind::Shift || kind == NodeKind::Position;
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedPhrase, what); }

}  // namespace

ProgramGraph::ProgramGraph(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

void ProgramGraph::validate() const {
  if (nodes_.empty()) malformed("empty program");
  std::vector<int> consumers(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.inputs.size() != arity(n.kind)) malformed("wrong arity for " + std::string(to_string(n.kind)));
    if (needs_symbol(n.kind) == n.symbol.empty()) malformed("bad symbol on " + std::string(to_string(n.kind)));
    for (int in : n.inputs) {
      if (in < 0 || static_cast<std::size_t>(in) >= i) malformed("input does not precede its consumer");
      ++consumers[static_cast<std::size_t>(in)];
    }
    if (n.kind == NodeKind::Position && i + 1 != nodes_.size()) malformed("position must be the root");
  }
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (consumers[i] != 1) malformed("node " + std::to_string(i) + " is not consumed exactly once");
  }
  const Node& r = nodes_.back();
  if (r.kind != NodeKind::Locate && r.kind != NodeKind::Position) malformed("root must be locate or position");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.kind == NodeKind::Locate || n.kind == NodeKind::Held) {
      if (r.kind != NodeKind::Position || r.inputs[0] != static_cast<int>(i)) {
        malformed(std::string(to_string(n.kind)) + " may only appear as a position source");
      }
    }
  }
  if (r.kind == NodeKind::Position) {
    const NodeKind src = nodes_[static_cast<std::size_t>(r.inputs[0])].kind;
    if (src != NodeKind::Locate && src != NodeKind::Held) malformed("position source must be locate or held");
  }
}

ProgramGraph ProgramGraph::subgraph(int node) const {
  GraphBuilder b;
  std::function<int(int)> copy = [&](int i) -> int {
    const Node& n = nodes_.at(static_cast<std::size_t>(i));
    std::vector<int> ins;
    for (int in : n.inputs) ins.push_back(copy(in));
    switch (n.kind) {
      case NodeKind::Detect: return b.detect(n.symbol);
      case NodeKind::And: return b.conj(ins[0], ins[1]);
      case NodeKind::Shift: return b.shift(n.symbol, ins[0]);
      case NodeKind::Locate: return b.locate(ins[0]);
      case NodeKind::Position: return b.position(n.symbol, ins[0], ins[1]);
      case NodeKind::Held: return b.held();
    }
    return -1;
  };
  copy(node);
  return std::move(b).build();
}

ProgramGraph ProgramGraph::canonical() const { return nodes_.empty() ? *this : subgraph(root()); }

std::string ProgramGraph::serialize() const {
  std::string out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (i) out += ' ';
    out += to_string(n.kind);
    if (!n.symbol.empty()) out += ":" + n.symbol;
    if (!n.inputs.empty()) {
      out += ':';
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(n.inputs[k]);
      }
    }
  }
  return out;
}

ProgramGraph ProgramGraph::deserialize(std::string_view text) {
  std::vector<Node> nodes;
  std::istringstream in{std::string(text)};
  std::string tok;
  auto bad = [&]() { throw Error(ErrorCode::FormatError, "bad graph token '" + tok + "'"); };
  while (in >> tok) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t p = tok.find(':'); p != std::string::npos; p = tok.find(':', start)) {
      parts.push_back(tok.substr(start, p - start));
      start = p + 1;
    }
    parts.push_back(tok.substr(start));
    Node n{NodeKind::Detect, {}, {}};
    const std::string& k = parts[0];
    if (k == "detect") n.kind = NodeKind::Detect;
    else if (k == "and") n.kind = NodeKind::And;
    else if (k == "shift") n.kind = NodeKind::Shift;
    else if (k == "locate") n.kind = NodeKind::Locate;
    else if (k == "position") n.kind = NodeKind::Position;
    else if (k == "held") n.kind = NodeKind::Held;
    else bad();
    std::size_t expect = 1 + (needs_symbol(n.kind) ? 1 : 0) + (arity(n.kind) ? 1 : 0);
    if (parts.size() != expect) bad();
    if (needs_symbol(n.kind)) n.symbol = parts[1];
    if (arity(n.kind)) {
      std::string_view list = parts.back();
      while (!list.empty()) {
        auto comma = list.find(',');
        auto item = list.substr(0, comma);
        int v = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size()) bad();
        n.inputs.push_back(v);
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
      }
    }
    nodes.push_back(std::move(n));
  }
  ProgramGraph g(std::move(nodes));
  try {
    g.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::FormatError, e.what());
  }
  return g;
}

std::string ProgramGraph::to_expression() const {
  std::function<std::string(int)> expr = [&](int i) {
    const Node& n = nodes_.at(static_cast<std::size_t>(i));
    std::string s(to_string(n.kind));
    if (n.kind == NodeKind::Held) return s;
    s += '(';
    bool first = true;
    if (!n.symbol.empty()) {
      s += n.symbol;
      first = false;
    }
    for (int in : n.inputs) {
      if (!first) s += ", ";
      s += expr(in);
      first = false;
    }
    return s + ')';
  };
  return nodes_.empty() ? std::string() : expr(root());
}

int ProgramGraph::count(NodeKind kind) const {
  int c = 0;
  for (const auto& n : nodes_) c += n.kind == kind;
  return c;
}

int GraphBuilder::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int GraphBuilder::detect(std::string word) { return push({NodeKind::Detect, std::move(word), {}}); }
int GraphBuilder::conj(int a, int b) { return push({NodeKind::And, {}, {a, b}}); }
int GraphBuilder::shift(std::string prep, int input) { return push({NodeKind::Shift, std::move(prep), {input}}); }
int GraphBuilder::locate(int input) { return push({NodeKind::Locate, {}, {input}}); }
int GraphBuilder::position(std::string prep, int source, int referent) {
  return push({NodeKind::Position, std::move(prep), {source, referent}});
}
int GraphBuilder::held() { return push({NodeKind::Held, {}, {}}); }

ProgramGraph GraphBuilder::build() && { return ProgramGraph(std::move(nodes_)); }

}  // namespace gridground
