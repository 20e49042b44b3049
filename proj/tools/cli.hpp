#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace regime_graph::cli {

// args excludes the program name. Exit status: 0 ok, 1 domain error,
// 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// REGIME_GRAPH_THREADS if set to a positive integer, else the hardware count.
unsigned thread_cap();

}  // namespace regime_graph::cli
