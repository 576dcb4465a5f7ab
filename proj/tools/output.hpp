#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kasner/modes.hpp"

namespace kasner::cli {

using ojson = nlohmann::ordered_json;

inline constexpr std::string_view kModeSchema = "kasner-mode-v1";
inline constexpr std::string_view kCsvHeader = "t_or_s,re_value,im_value,re_deriv,im_deriv";

/// Shortest decimal string that reads back to the same double.
std::string format_double(double x);

struct TrajectoryTable {
  std::string coords;  // "t" or "s"
  ojson config;
  std::vector<std::array<double, 5>> rows;
};

TrajectoryTable make_table(const ModeTrajectory& traj, const ojson& config);

std::string write_csv(const TrajectoryTable& table);
std::string write_json(const TrajectoryTable& table);

/// Inverse of write_json. Throws std::runtime_error on schema mismatch.
TrajectoryTable read_json(std::string_view text);

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace kasner::cli
