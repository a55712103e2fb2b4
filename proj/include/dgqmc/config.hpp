#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dgqmc/errors.hpp"
#include "dgqmc/experiment.hpp"
#include "dgqmc/version.hpp"

namespace dgqmc {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw validation_error("config: key '" + key + "' expects a number, got '" + value + "'");
  }
  if (pos != value.size())
    throw validation_error("config: key '" + key + "' has trailing text in '" + value + "'");
  return v;
}

inline long long parse_integer(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &pos);
  } catch (const std::exception&) {
    throw validation_error("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
  if (pos != value.size())
    throw validation_error("config: key '" + key + "' has trailing text in '" + value + "'");
  return v;
}

}  // namespace detail

/// Parses the experiment configuration: "key = value" lines, '#' comments.
/// Documented keys: mode, a0, decay, s, mesh_m, degree, theta, eta, n_list,
/// shifts, seed, vector, out, discretization, error_mode. Unknown keys and
/// constraint violations are rejected with the offending key named.
inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("parse_config: cannot open " + path);

  ExperimentConfig config;
  bool a0_given = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw validation_error("config: line " + std::to_string(line_no) +
                             " is not 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (value.empty())
      throw validation_error("config: key '" + key + "' has an empty value");

    if (key == "mode") {
      if (value == "affine")
        config.mode = FieldMode::affine;
      else if (value == "lognormal")
        config.mode = FieldMode::lognormal;
      else
        throw validation_error("config: mode must be 'affine' or 'lognormal'");
    } else if (key == "a0") {
      config.a0 = detail::parse_double(key, value);
      a0_given = true;
    } else if (key == "decay") {
      config.decay = detail::parse_double(key, value);
    } else if (key == "s") {
      config.s = static_cast<int>(detail::parse_integer(key, value));
    } else if (key == "mesh_m") {
      config.mesh_m = static_cast<int>(detail::parse_integer(key, value));
    } else if (key == "degree") {
      config.degree = static_cast<int>(detail::parse_integer(key, value));
    } else if (key == "theta") {
      config.theta = static_cast<int>(detail::parse_integer(key, value));
    } else if (key == "eta") {
      if (value == "analytic") {
        config.eta_analytic = true;
      } else {
        config.eta_analytic = false;
        config.eta_value = detail::parse_double(key, value);
      }
    } else if (key == "n_list") {
      config.n_list.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        const long long v = detail::parse_integer(key, item);
        if (v < 1) throw validation_error("config: n_list entries must be positive");
        config.n_list.push_back(static_cast<std::uint64_t>(v));
      }
    } else if (key == "shifts") {
      config.shifts = static_cast<int>(detail::parse_integer(key, value));
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(detail::parse_integer(key, value));
    } else if (key == "vector") {
      config.vector_source = value;
    } else if (key == "out") {
      config.out = value;
    } else if (key == "discretization") {
      if (value == "dg")
        config.discretization = Discretization::dg;
      else if (value == "conforming")
        config.discretization = Discretization::conforming;
      else
        throw validation_error("config: discretization must be 'dg' or 'conforming'");
    } else if (key == "error_mode") {
      if (value == "spread")
        config.error_mode = ErrorMode::spread;
      else if (value == "reference")
        config.error_mode = ErrorMode::reference;
      else
        throw validation_error("config: error_mode must be 'spread' or 'reference'");
    } else {
      throw validation_error("config: unknown key '" + key + "'");
    }
  }

  if (!a0_given && config.mode == FieldMode::lognormal) config.a0 = 1.0;
  config.validate();
  return config;
}

/// FNV-1a digest of a file's bytes, for the run manifest.
inline std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("file_digest: cannot open " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

/// Reproducibility stamp emitted before any computation starts.
struct RunManifest {
  std::string command;
  std::string config_echo;
  std::uint64_t seed = 0;
  std::string version = version_string;
  std::string started;
  std::string input_digest = "n/a";
};

inline std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline RunManifest make_manifest(const std::string& command, const ExperimentConfig& config) {
  RunManifest m;
  m.command = command;
  m.config_echo = detail::canonical_echo(config);
  m.seed = config.seed;
  m.started = timestamp_utc();
  if (config.vector_source != "cbc") m.input_digest = file_digest(config.vector_source);
  return m;
}

inline void write_manifest(const RunManifest& m, std::ostream& out) {
  out << "command = " << m.command << "\n"
      << "version = " << m.version << "\n"
      << "seed = " << m.seed << "\n"
      << "started = " << m.started << "\n"
      << "input_digest = " << m.input_digest << "\n"
      << "# resolved configuration\n"
      << m.config_echo;
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("write_manifest: cannot write " + path);
  write_manifest(m, out);
  if (!out) throw io_error("write_manifest: write failed for " + path);
}

}  // namespace dgqmc
