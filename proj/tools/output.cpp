#include "output.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include <openssl/evp.h>

namespace kasner::cli {

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

TrajectoryTable make_table(const ModeTrajectory& traj, const ojson& config) {
  TrajectoryTable table;
  table.coords = traj.coordinate() == Coordinate::PhysicalTime ? "t" : "s";
  table.config = config;
  table.rows.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const cplx v = traj.value(i);
    const cplx d = traj.derivative(i);
    table.rows.push_back({traj.abscissa(i), v.real(), v.imag(), d.real(), d.imag()});
  }
  return table;
}

std::string write_csv(const TrajectoryTable& table) {
  std::string out = "# config: " + table.config.dump() + "\n";
  out += kCsvHeader;
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  return out;
}

std::string write_json(const TrajectoryTable& table) {
  ojson doc;
  doc["schema"] = kModeSchema;
  doc["config"] = table.config;
  doc["coords"] = table.coords;
  doc["columns"] = ojson::array({"t_or_s", "re_value", "im_value", "re_deriv", "im_deriv"});
  ojson rows = ojson::array();
  for (const auto& row : table.rows) rows.push_back(row);
  doc["samples"] = std::move(rows);
  return doc.dump() + "\n";
}

TrajectoryTable read_json(std::string_view text) {
  const ojson doc = ojson::parse(text);
  if (!doc.is_object() || doc.value("schema", "") != kModeSchema) {
    throw std::runtime_error("not a " + std::string(kModeSchema) + " document");
  }
  TrajectoryTable table;
  table.coords = doc.at("coords").get<std::string>();
  table.config = doc.at("config");
  for (const auto& row : doc.at("samples")) {
    if (!row.is_array() || row.size() != 5) throw std::runtime_error("sample rows need 5 columns");
    table.rows.push_back(row.get<std::array<double, 5>>());
  }
  return table;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace kasner::cli
