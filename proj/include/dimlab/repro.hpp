#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dimlab {

// Plain table of formatted cells; numbers use a fixed printf format so that
// equal inputs give byte-identical output.
struct ReportTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string csv() const;
};

std::string fmt_num(double v);
std::string fmt_int(long long v);

struct ReproOptions {
  std::uint64_t seed = 0;
  int threads = 1;
};

std::vector<std::string> repro_names();
// Throws InvalidArgument for an unknown name.
ReportTable run_repro(const std::string& name, const ReproOptions& options = {});

}  // namespace dimlab
