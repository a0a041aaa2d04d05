#pragma once
// Persistence and configuration:
//   - flat sectioned key-value config files ([section] / key = value),
//   - FNV-1a hash of the canonicalized config, stamped into every output,
//   - KPPW snapshot binaries (raw little-endian IEEE754 doubles),
//   - full-precision CSV tables with a documented column header.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kpp/observables.hpp"

namespace kpp {

// --- config ------------------------------------------------------------

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  static Config parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError("config line " + std::to_string(lineno) +
                            ": unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": empty key");
      cfg.kv_[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }
  std::string require_string(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : to_double(key, it->second);
  }
  double require_double(const std::string& key) const {
    return to_double(key, require_string(key));
  }

  long long get_int(const std::string& key, long long fallback) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size())
      throw ConfigError("config key " + key + ": not an integer");
    return v;
  }

  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::string item;
    std::istringstream ss(it->second);
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(to_double(key, item));
    }
    return out;
  }

  // Canonical text: sorted "key = value" lines; the hash is stable under
  // reordering and comments of the source file.
  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : kv_) {
      out += k;
      out += " = ";
      out += v;
      out += '\n';
    }
    return out;
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
  }
  static double to_double(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: " + s);
    }
    if (pos != s.size())
      throw ConfigError("config key " + key + ": trailing junk: " + s);
    return v;
  }

  std::map<std::string, std::string> kv_;
};

inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t config_hash(const Config& cfg) {
  return fnv1a(cfg.canonical());
}

// --- snapshot binaries ---------------------------------------------------

// Layout (little-endian): "KPPW", u32 version, f64 t, f64 z_lo, f64 dz,
// f64 mu, u64 n, n * f64 w.
inline constexpr std::uint32_t kSnapshotVersion = 1;

inline void write_snapshot(std::ostream& out, const Snapshot& s) {
  static_assert(sizeof(double) == 8);
  out.write("KPPW", 4);
  auto put = [&out](const void* p, std::size_t n) {
    out.write(reinterpret_cast<const char*>(p), std::streamsize(n));
  };
  const std::uint32_t ver = kSnapshotVersion;
  put(&ver, 4);
  put(&s.t, 8);
  put(&s.z_lo, 8);
  put(&s.dz, 8);
  put(&s.mu, 8);
  const std::uint64_t n = s.w.size();
  put(&n, 8);
  put(s.w.data(), 8 * s.w.size());
  if (!out) throw std::runtime_error("write_snapshot: stream failure");
}

inline Snapshot read_snapshot(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "KPPW", 4) != 0)
    throw std::runtime_error("read_snapshot: bad magic");
  auto get = [&in](void* p, std::size_t n) {
    in.read(reinterpret_cast<char*>(p), std::streamsize(n));
  };
  std::uint32_t ver = 0;
  get(&ver, 4);
  if (ver != kSnapshotVersion)
    throw std::runtime_error("read_snapshot: unsupported version");
  Snapshot s;
  get(&s.t, 8);
  get(&s.z_lo, 8);
  get(&s.dz, 8);
  get(&s.mu, 8);
  std::uint64_t n = 0;
  get(&n, 8);
  if (!in || n > (1ULL << 32))
    throw std::runtime_error("read_snapshot: corrupt header");
  s.w.resize(n);
  get(s.w.data(), 8 * n);
  if (!in) throw std::runtime_error("read_snapshot: truncated data");
  return s;
}

inline void save_snapshot(const std::string& path, const Snapshot& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  write_snapshot(out, s);
}

inline Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  return read_snapshot(in);
}

// --- CSV tables ------------------------------------------------------------

// Full-precision table: '#'-prefixed header records the config hash and the
// column order, rows are %.17g so a reread is bit-exact.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::uint64_t cfg_hash,
            const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open for write: " + path);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  (unsigned long long)cfg_hash);
    out_ << "# config_hash " << buf << "\n# columns:";
    for (const auto& c : columns) out_ << ' ' << c;
    out_ << '\n';
    ncols_ = columns.size();
  }

  void row(const std::vector<double>& values) {
    if (values.size() != ncols_)
      throw std::invalid_argument("CsvWriter: wrong column count");
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      if (i) out_ << ',';
      out_ << buf;
    }
    out_ << '\n';
  }

  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
  std::size_t ncols_ = 0;
};

}  // namespace kpp
