#include "llg/json_io.hpp"

#include <cstdio>
#include <ostream>

namespace llg {

void to_json(nlohmann::json& j, const ModeIndex& m) { j = nlohmann::json::array({m.frequency, m.axis}); }

void from_json(const nlohmann::json& j, ModeIndex& m) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("mode index must be a [frequency, axis] pair");
  }
  m.frequency = j.at(0).get<int>();
  m.axis = j.at(1).get<int>();
}

void to_json(nlohmann::json& j, const ModeState& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i <= m.K(); ++i) rows.push_back({m(i, 1), m(i, 2), m(i, 3)});
  j = {{"K", m.K()}, {"coeffs", rows}};
}

void from_json(const nlohmann::json& j, ModeState& m) {
  const int K = j.at("K").get<int>();
  const auto& rows = j.at("coeffs");
  if (!rows.is_array() || static_cast<int>(rows.size()) != K + 1) {
    throw std::invalid_argument("ModeState JSON: coeffs must have K+1 rows");
  }
  ModeState out(K);
  for (int i = 0; i <= K; ++i) {
    if (rows[i].size() != 3) throw std::invalid_argument("ModeState JSON: each row needs 3 axes");
    for (int a = 1; a <= 3; ++a) out(i, a) = rows[i][a - 1].get<double>();
  }
  m = std::move(out);
}

void to_json(nlohmann::json& j, const ControlSchedule& s) {
  nlohmann::json values = nlohmann::json::array();
  for (int r = 0; r < s.segments(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < s.values().cols(); ++c) row.push_back(s.values()(r, c));
    values.push_back(row);
  }
  j = {{"T", s.T()}, {"segments", s.segments()}, {"modes", s.modes()}, {"values", values}};
}

void from_json(const nlohmann::json& j, ControlSchedule& s) {
  const double T = j.at("T").get<double>();
  const auto modes = j.at("modes").get<std::vector<ModeIndex>>();
  const auto& rows = j.at("values");
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(modes.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != modes.size()) {
      throw std::invalid_argument("schedule JSON: row width does not match mode count");
    }
    for (std::size_t c = 0; c < modes.size(); ++c) {
      v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
  }
  if (j.contains("segments") && j.at("segments").get<int>() != v.rows()) {
    throw std::invalid_argument("schedule JSON: segments does not match number of value rows");
  }
  s = ControlSchedule(modes, T, std::move(v));
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_schedule_csv(std::ostream& os, const ControlSchedule& s) {
  os << "t_start,t_end";
  for (const auto& [k, l] : s.modes()) os << ",v_" << k << "^" << l;
  os << "\r\n";
  const double h = s.segment_length();
  for (int r = 0; r < s.segments(); ++r) {
    os << format_double(r * h) << ',' << format_double((r + 1) * h);
    for (Eigen::Index c = 0; c < s.values().cols(); ++c) os << ',' << format_double(s.values()(r, c));
    os << "\r\n";
  }
}

}  // namespace llg
