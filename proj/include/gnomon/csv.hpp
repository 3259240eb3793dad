#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnomon {

// fixed 17-significant-digit scientific formatting so reruns diff bytewise
inline std::string fmt_e(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

// collects the files a command creates so a failure can sweep them away
class OutputTracker {
 public:
  std::ofstream create(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output file " + p.string());
    files_.push_back(p);
    return f;
  }
  void keep() { files_.clear(); }
  void discard() noexcept {
    std::error_code ec;
    for (const auto& p : files_) std::filesystem::remove(p, ec);
    files_.clear();
  }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::vector<std::filesystem::path> files_;
};

}  // namespace gnomon
