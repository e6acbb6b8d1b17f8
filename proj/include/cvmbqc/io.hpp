#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace cvmbqc::io {

// 17 significant digits: round-trip exact for 64-bit doubles.
std::string format_double(double v);

std::uint64_t fnv1a64(const std::string& s);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void write_row(const std::vector<std::string>& cells);
  void write_row(const std::vector<double>& cells);

 private:
  std::ofstream out_;
};

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path);
  void write_line(const std::string& json);

 private:
  std::ofstream out_;
};

// Run manifest: config hash, seed, version, wall time. Written next to the
// data file; carries the only timestamp-dependent content of a run.
void write_manifest(const std::string& path, const std::string& config_canonical,
                    std::uint64_t seed, double wall_seconds);

}  // namespace cvmbqc::io
