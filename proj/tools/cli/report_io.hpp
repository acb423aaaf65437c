#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "condensate/concentration.hpp"

namespace condensate::cli {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; identical input gives identical text.
std::string format_number(double value);

void write_profile_csv(std::ostream& out, const Grid& g, const RealVector& profile,
                       const std::optional<RealVector>& analytic);

void write_field_csv(std::ostream& out, const Grid& g, const FieldVector& values);

/// One row per DistanceRecord, grouped by u then sample index.
void write_records_csv(std::ostream& out, const SweepReport& report);

Json constants_json(const TheoryConstants& k);
Json sweep_json(const SweepReport& report, const Json& config);
Json prop1_json(const Prop1Result& r, const Json& config);
Json prop3_json(const Prop3Result& r, const Json& config);

std::string_view to_string(ScalarField scalar) noexcept;
Json mode_json(const ConditionMode& mode);

}  // namespace condensate::cli
