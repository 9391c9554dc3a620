// CSV/JSON emission helpers: every output file starts with a comment line
// echoing the seed and effective configuration; numbers use '.' decimals and
// 12 significant digits regardless of locale.

#pragma once

#include <string>
#include <vector>

#include "qje/run_config.hpp"

namespace qje::cli {

std::string fmt(double v);

// "# seed=<seed> config=<json>\n<columns>\n"
std::string csv_header(const RunConfig& cfg, const std::string& columns);

void write_file(const std::string& dir, const std::string& name, const std::string& content);

std::string output_path(const std::string& dir, const std::string& name);

}  // namespace qje::cli
