#include "report_io.hpp"

#include <ostream>

#include <fmt/format.h>

namespace condensate::cli {

std::string format_number(double value) { return fmt::format("{}", value); }

void write_profile_csv(std::ostream& out, const Grid& g, const RealVector& profile,
                       const std::optional<RealVector>& analytic) {
  out << (analytic ? "x,profile_value,analytic_value\n" : "x,profile_value\n");
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << format_number(g.point(i)) << ',' << format_number(profile[k]);
    if (analytic) out << ',' << format_number((*analytic)[k]);
    out << '\n';
  }
}

void write_field_csv(std::ostream& out, const Grid& g, const FieldVector& values) {
  out << "x,re,im\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& v = values[static_cast<Eigen::Index>(i)];
    out << format_number(g.point(i)) << ',' << format_number(v.real()) << ',' << format_number(v.imag()) << '\n';
  }
}

void write_records_csv(std::ostream& out, const SweepReport& report) {
  out << "u,sample_index,rho,theta,sup_dist,l2_dist,bound_rhs,ratio_re,ratio_im,r,applicable,est0_ok,est12_ok\n";
  for (const auto& rec : report.records) {
    out << format_number(rec.u) << ',' << rec.sample_index << ',' << format_number(rec.rho) << ','
        << format_number(rec.theta) << ',' << format_number(rec.sup_dist) << ',' << format_number(rec.l2_dist) << ','
        << format_number(rec.bound_rhs) << ',' << format_number(rec.ratio.real()) << ','
        << format_number(rec.ratio.imag()) << ',' << format_number(rec.r) << ',' << (rec.applicable ? 1 : 0) << ','
        << (rec.est0_ok ? 1 : 0) << ',' << (rec.est12_ok ? 1 : 0) << '\n';
  }
}

std::string_view to_string(ScalarField scalar) noexcept {
  return scalar == ScalarField::Real ? "real" : "complex";
}

Json mode_json(const ConditionMode& mode) {
  if (const auto* fixed = std::get_if<FixedRho>(&mode)) {
    return Json{{"type", "fixed-rho"}, {"rho", fixed->rho}, {"theta", fixed->theta}};
  }
  return Json{{"type", "random"}};
}

Json constants_json(const TheoryConstants& k) {
  return Json{{"tct", k.tct}, {"tc2t", k.tc2t}, {"A", k.a}, {"B", k.b}, {"D", k.d}};
}

Json sweep_json(const SweepReport& report, const Json& config) {
  Json per_u = Json::array();
  for (const auto& level : report.levels) {
    per_u.push_back({{"u", level.u},
                     {"q10", level.sup.q10},
                     {"q50", level.sup.q50},
                     {"q90", level.sup.q90},
                     {"l2_q50", level.l2.q50}});
  }
  Json out;
  out["config"] = config;
  out["per_u"] = std::move(per_u);
  out["slope"] = report.slope ? Json(*report.slope) : Json(nullptr);
  out["violations_est0"] = report.violations_est0;
  out["violations_est12"] = report.violations_est12;
  out["applicable"] = report.applicable;
  out["n_records"] = report.records.size();
  out["constants"] = constants_json(report.constants);
  return out;
}

Json prop1_json(const Prop1Result& r, const Json& config) {
  Json out;
  out["check"] = "prop1";
  out["config"] = config;
  out["pass"] = r.pass;
  out["n_mc"] = r.n_mc;
  out["non_finite"] = r.non_finite;
  out["var_hat"] = r.var_hat;
  out["tct"] = r.tct;
  out["relative_error"] = r.var_hat / r.tct - 1.0;
  out["tolerance"] = r.tolerance;
  return out;
}

Json prop3_json(const Prop3Result& r, const Json& config) {
  Json out;
  out["check"] = "prop3";
  out["config"] = config;
  out["pass"] = r.pass;
  out["smoothness_warning"] = r.smoothness_warning;
  out["x0"] = r.x0;
  out["snapped_x0"] = r.snapped_x0;
  out["snap_distance"] = r.snap_distance;
  out["n"] = r.n;
  out["order"] = r.order;
  out["analytic_available"] = r.analytic_available;
  out["profile_distance"] = r.profile_distance ? Json(*r.profile_distance) : Json(nullptr);
  out["profile_tolerance"] = r.profile_tol;
  out["sample_reference"] = r.sample_vs_analytic ? "analytic" : "discrete";
  out["sample_distance"] = r.sample_distance;
  out["sample_tolerance"] = r.sample_tol;
  out["u_big"] = r.u_big;
  return out;
}

}  // namespace condensate::cli
