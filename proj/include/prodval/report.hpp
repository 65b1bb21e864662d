#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prodval/config.hpp"

namespace prodval {

enum class OutputFormat { Csv, Json, Both };

struct ReportBundle {
  int exit_code = 0;  // 0 success, 2 infeasible
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  std::string summary;                                     // one line for the terminal
};

// Fixed 9-decimal formatting; infinities print as "inf" / "-inf".
std::string format_number(double x);

// subcommand: value | solvency | check | adjust
ReportBundle run(const ValuationProblem& problem, const std::string& subcommand, OutputFormat format = OutputFormat::Both);

// FNV-1a of the text, as 16 hex digits.
std::string content_hash(const std::string& text);

}  // namespace prodval
