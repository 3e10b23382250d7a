#pragma once

// Tree text format: one line per node, "<id> <child-id>*", root first and
// every parent before its children.

#include "hapod/tree.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace hapod::io {

std::string format_tree(const RootedTree& tree);
/// Throws ParameterError on malformed text or an invalid tree.
RootedTree parse_tree(std::string_view text);

RootedTree read_tree(const std::filesystem::path& path);
void write_tree(const std::filesystem::path& path, const RootedTree& tree);

}  // namespace hapod::io
