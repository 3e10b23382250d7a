#include "hapod/tree_io.hpp"

#include "hapod/error.hpp"

#include <deque>
#include <fstream>
#include <sstream>

namespace hapod::io {

std::string format_tree(const RootedTree& tree) {
  require_valid(tree);
  std::ostringstream out;
  std::deque<NodeId> queue{tree.root()};
  while (!queue.empty()) {
    const NodeId a = queue.front();
    queue.pop_front();
    out << a;
    for (NodeId c : tree.children(a)) {
      out << ' ' << c;
      queue.push_back(c);
    }
    out << '\n';
  }
  return out.str();
}

RootedTree parse_tree(std::string_view text) {
  std::vector<std::pair<NodeId, std::vector<NodeId>>> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    long long id = 0;
    if (!(fields >> id)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw ParameterError("tree line " + std::to_string(line_no) + ": expected a node id");
      }
      continue;
    }
    if (id < 0) throw ParameterError("tree line " + std::to_string(line_no) + ": negative node id");
    std::vector<NodeId> kids;
    long long c = 0;
    while (fields >> c) {
      if (c < 0) throw ParameterError("tree line " + std::to_string(line_no) + ": negative child id");
      kids.push_back(static_cast<NodeId>(c));
    }
    fields.clear();
    std::string rest;
    if (fields >> rest) throw ParameterError("tree line " + std::to_string(line_no) + ": unexpected token '" + rest + "'");
    lines.emplace_back(static_cast<NodeId>(id), std::move(kids));
  }
  if (lines.empty()) throw ParameterError("tree description is empty");

  const std::size_t n = lines.size();
  std::vector<std::vector<NodeId>> children(n);
  std::vector<char> seen(n, 0);
  for (auto& [id, kids] : lines) {
    if (id >= n) throw ParameterError("tree node id " + std::to_string(id) + " is not in 0.." + std::to_string(n - 1));
    if (seen[id]) throw ParameterError("tree node " + std::to_string(id) + " is described twice");
    seen[id] = 1;
    children[id] = std::move(kids);
  }
  RootedTree tree(std::move(children), lines.front().first);
  require_valid(tree);
  return tree;
}

RootedTree read_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open tree file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_tree(buffer.str());
  } catch (const ParameterError& e) {
    throw ParameterError(path.string() + ": " + e.what());
  }
}

void write_tree(const std::filesystem::path& path, const RootedTree& tree) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << format_tree(tree);
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace hapod::io
