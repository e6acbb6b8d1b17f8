#include "cvmbqc/io.hpp"

#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "cvmbqc/common.hpp"

namespace cvmbqc::io {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path) {
  if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
  write_row(header);
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::write_row(const std::vector<double>& cells) {
  std::vector<std::string> s;
  s.reserve(cells.size());
  for (double c : cells) s.push_back(format_double(c));
  write_row(s);
}

JsonlWriter::JsonlWriter(const std::string& path) : out_(path) {
  if (!out_) throw std::runtime_error("JsonlWriter: cannot open " + path);
}

void JsonlWriter::write_line(const std::string& json) { out_ << json << '\n'; }

void write_manifest(const std::string& path, const std::string& config_canonical,
                    std::uint64_t seed, double wall_seconds) {
  nlohmann::json j;
  j["config_hash"] = fnv1a64(config_canonical);
  j["config"] = config_canonical;
  j["seed"] = seed;
  j["version"] = kVersion;
  j["wall_time_s"] = wall_seconds;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_manifest: cannot open " + path);
  out << j.dump(2) << '\n';
}

}  // namespace cvmbqc::io
