#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace gmix {

// %.17g round-trips doubles exactly; used for all measured values.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Shorter form for identifier columns coming straight from the config
// (sparsity levels, log-lambda grid points).
inline std::string csv_id(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : file_(std::fopen(path.c_str(), "w")) {
    if (!file_) {
      throw std::runtime_error("cannot open for writing: " + path);
    }
    write_row(header);
  }

  ~CsvWriter() {
    if (file_) std::fclose(file_);
  }

  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) std::fputc(',', file_);
      std::fputs(fields[i].c_str(), file_);
    }
    std::fputc('\n', file_);
  }

 private:
  std::FILE* file_;
};

}  // namespace gmix
