#pragma once

#include "llg/schedule.hpp"
#include "llg/spectral.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>

namespace llg {

void to_json(nlohmann::json& j, const ModeIndex& m);
void from_json(const nlohmann::json& j, ModeIndex& m);

/// {"K": K, "coeffs": [[m_0^1, m_0^2, m_0^3], ...]}
void to_json(nlohmann::json& j, const ModeState& m);
void from_json(const nlohmann::json& j, ModeState& m);

/// {"T", "segments", "modes": [[k,l],...], "values": [[...per mode...] per segment]}
void to_json(nlohmann::json& j, const ControlSchedule& s);
void from_json(const nlohmann::json& j, ControlSchedule& s);

/// Round-trippable decimal text for CSV cells (17 significant digits).
std::string format_double(double x);

/// RFC-4180 CSV export: t_start, t_end, then one v_k^l column per mode.
void write_schedule_csv(std::ostream& os, const ControlSchedule& s);

}  // namespace llg
