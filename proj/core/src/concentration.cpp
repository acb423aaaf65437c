#include "condensate/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "condensate/error.hpp"

namespace condensate {

namespace {

constexpr double kBoundSlack = 1e-9;

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += threads) body(i);
    });
  }
}

FieldVector normalized_difference(const FieldSample& sample, const RealVector& profile, const Grid& g) {
  const double phi_norm = l2_norm(sample.values, g);
  const double p_norm = l2_norm(profile, g);
  if (!(phi_norm > 0.0)) throw Error(ErrorCode::ZeroVector, "sample field vanishes");
  if (!(p_norm > 0.0)) throw Error(ErrorCode::ZeroVector, "profile vanishes");
  const Complex phase = std::polar(1.0, sample.theta);
  return sample.values / phi_norm - (phase / p_norm) * profile.cast<Complex>();
}

}  // namespace

double normalized_sup_distance(const FieldSample& sample, const RealVector& profile, const Grid& g) {
  return sup_norm(normalized_difference(sample, profile, g));
}

double normalized_l2_distance(const FieldSample& sample, const RealVector& profile, const Grid& g) {
  return l2_norm(normalized_difference(sample, profile, g), g);
}

double estimate0_rhs(const FieldSample& sample, const TheoryConstants& k, const Grid& g) {
  const double phi_norm = l2_norm(sample.values, g);
  if (!(phi_norm > 0.0)) throw Error(ErrorCode::ZeroVector, "sample field vanishes");
  const Complex gap = sample.t_u / phi_norm - std::polar(k.b, sample.theta);
  return k.a * std::sqrt(std::norm(gap) + sample.r2 / (phi_norm * phi_norm));
}

namespace {

// Estimates expressed through |t_u|, |t_u|/||phi|| and r only, so a stored record can be
// re-judged without the field.
RatioBounds bounds_from(double t_abs, const Complex& ratio, double theta, double r, const TheoryConstants& k) {
  RatioBounds out;
  if (!(t_abs > 0.0)) return out;
  out.ratio_abs = std::abs(ratio);
  const double inv_norm = out.ratio_abs / t_abs;  // 1 / ||phi||
  out.noise_share = r * r * inv_norm * inv_norm;
  out.lower = k.b / (1.0 + k.d * r / t_abs);
  out.applicable = t_abs > k.d * r;
  if (!out.applicable) return out;

  out.upper = k.b / (1.0 - k.d * r / t_abs);
  const double gap = t_abs - k.d * r;
  const double scaled = k.b * r / gap;
  out.noise_bound = scaled * scaled;
  out.ratio_ok = out.lower <= out.ratio_abs * (1.0 + kBoundSlack) && out.ratio_abs <= out.upper * (1.0 + kBoundSlack);
  out.noise_ok = out.noise_share <= out.noise_bound * (1.0 + kBoundSlack);

  const double limit1 = std::abs(ratio - std::polar(k.b, theta));
  const double limit1_bound = k.b * k.d * r / gap;
  const double limit2 = r * inv_norm;
  out.limit_ok = limit1 <= limit1_bound * (1.0 + kBoundSlack) + kBoundSlack * k.b * 1e-3 &&
                 limit2 <= scaled * (1.0 + kBoundSlack);
  return out;
}

}  // namespace

RatioBounds ratio_bounds_check(const FieldSample& sample, const TheoryConstants& k, const Grid& g) {
  const double phi_norm = l2_norm(sample.values, g);
  if (!(phi_norm > 0.0)) return RatioBounds{};
  return bounds_from(std::abs(sample.t_u), sample.t_u / phi_norm, sample.theta, std::sqrt(sample.r2), k);
}

void evaluate_checks(DistanceRecord& rec, const TheoryConstants& k) {
  rec.est0_ok = rec.sup_dist <= rec.bound_rhs + kBoundSlack;
  const RatioBounds rb = bounds_from(rec.t_abs, rec.ratio, rec.theta, rec.r, k);
  rec.applicable = rb.applicable;
  rec.est12_ok = rb.ok();
}

DistanceRecord measure(const FieldSample& sample, std::size_t index, const RealVector& profile,
                       const TheoryConstants& k, const Grid& g) {
  DistanceRecord rec;
  rec.u = sample.u;
  rec.sample_index = index;
  rec.rho = sample.rho;
  rec.theta = sample.theta;
  rec.sup_dist = normalized_sup_distance(sample, profile, g);
  rec.l2_dist = normalized_l2_distance(sample, profile, g);
  rec.bound_rhs = estimate0_rhs(sample, k, g);
  rec.ratio = sample.t_u / l2_norm(sample.values, g);
  rec.t_abs = std::abs(sample.t_u);
  rec.r = std::sqrt(sample.r2);
  evaluate_checks(rec, k);
  return rec;
}

Quantiles quantiles(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyVector, "quantiles of an empty sample");
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.1), at(0.5), at(0.9)};
}

std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  double sx = 0.0;
  double sy = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  if (!(sxx > 0.0)) return std::nullopt;
  return sxy / sxx;
}

SweepReport sweep(const SqrtFactor& s, const CovOperator& c, const LinearFunctional& t, const SweepOptions& opt) {
  if (opt.u_list.empty()) throw Error(ErrorCode::EmptyUList, "sweep needs at least one u value");
  if (!std::is_sorted(opt.u_list.begin(), opt.u_list.end())) {
    throw Error(ErrorCode::InvalidSpec, "u values must be ascending");
  }
  if (opt.n_mc == 0) throw Error(ErrorCode::InvalidSpec, "n_mc must be at least 1");
  for (double u : opt.u_list) validate(ConditionSpec{u, opt.mode, opt.scalar});

  const Grid& g = c.grid();
  const Conditioner conditioner(s, t);
  SweepReport report;
  report.constants = constants(t, c);
  report.kernel = c.kernel() ? describe(*c.kernel()) : std::string("matrix");
  report.functional = describe(t);
  report.scalar = opt.scalar;
  report.mode = opt.mode;
  report.seed = opt.seed;

  const RealVector prof = profile(t, c);
  const std::size_t n_u = opt.u_list.size();
  report.records.resize(n_u * opt.n_mc);

  parallel_for(opt.n_mc, opt.threads, [&](std::size_t i) {
    Stream noise_stream = Stream::substream(opt.seed, i);
    const FieldVector noise = draw_white_coefficients(noise_stream, s.size(), opt.scalar);
    for (std::size_t j = 0; j < n_u; ++j) {
      const ConditionSpec spec{opt.u_list[j], opt.mode, opt.scalar};
      Stream draw_stream = noise_stream.split(j + 1);
      const TuDraw draw = sample_t_u(spec, conditioner.tct(), draw_stream);
      FieldSample sample = conditioner.assemble(draw, spec.u, noise);
      sample.stream_key = noise_stream.key();
      DistanceRecord rec = measure(sample, i, prof, report.constants, g);
      if (opt.record_hook) {
        opt.record_hook(rec);
        evaluate_checks(rec, report.constants);
      }
      report.records[j * opt.n_mc + i] = rec;
    }
  });

  std::vector<double> medians;
  for (std::size_t j = 0; j < n_u; ++j) {
    std::vector<double> sup;
    std::vector<double> l2;
    sup.reserve(opt.n_mc);
    l2.reserve(opt.n_mc);
    for (std::size_t i = 0; i < opt.n_mc; ++i) {
      const auto& rec = report.records[j * opt.n_mc + i];
      sup.push_back(rec.sup_dist);
      l2.push_back(rec.l2_dist);
      if (!rec.est0_ok) ++report.violations_est0;
      if (rec.applicable) {
        ++report.applicable;
        if (!rec.est12_ok) ++report.violations_est12;
      }
    }
    report.levels.push_back({opt.u_list[j], quantiles(sup), quantiles(l2)});
    medians.push_back(report.levels.back().sup.q50);
  }
  report.slope = log_log_slope(opt.u_list, medians);
  return report;
}

Prop1Result verify_prop1(const SqrtFactor& s, const CovOperator& c, const LinearFunctional& t, std::size_t n_mc,
                         std::uint64_t seed, ScalarField scalar, unsigned threads) {
  if (n_mc < 1000) throw Error(ErrorCode::InvalidSpec, "verify_prop1 needs at least 1000 samples");
  Prop1Result out;
  out.n_mc = n_mc;
  out.tct = tct(t, c);

  std::vector<Complex> values(n_mc);
  parallel_for(n_mc, threads, [&](std::size_t i) {
    Stream rng = Stream::substream(seed, i);
    values[i] = t(sample_unconditional(s, scalar, rng).values);
  });

  Complex mean{0.0, 0.0};
  for (const auto& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) ++out.non_finite;
    mean += v;
  }
  mean /= static_cast<double>(n_mc);
  double acc = 0.0;
  for (const auto& v : values) acc += std::norm(v - mean);
  out.var_hat = acc / static_cast<double>(n_mc - 1);
  out.tolerance = 5.0 / std::sqrt(static_cast<double>(n_mc)) + 0.02;
  out.pass = out.non_finite == 0 && std::abs(out.var_hat / out.tct - 1.0) <= out.tolerance;
  return out;
}

Prop3Result verify_prop3(const Kernel& kernel, const Grid& g, const Prop3Options& opt) {
  Prop3Result out;
  out.x0 = opt.x0;
  out.n = opt.n;
  out.order = opt.order;
  out.u_big = opt.u_big;
  out.profile_tol = opt.profile_tol;
  out.sample_tol = opt.sample_tol;
  out.smoothness_warning = is_rough(kernel) && opt.n >= 1;

  const CovOperator c = assemble(kernel, g);
  const LinearFunctional t =
      opt.n == 0 ? make_point_functional(g, opt.x0) : make_derivative_functional(g, opt.x0, opt.n, opt.order);
  const std::size_t center = opt.n == 0 ? std::get<PointEval>(t.kind()).index : std::get<DerivativeEval>(t.kind()).index;
  out.snapped_x0 = g.point(center);
  out.snap_distance = std::abs(opt.x0 - out.snapped_x0);

  const RealVector discrete = profile(t, c);
  RealVector reference = discrete;
  RealVector analytic(static_cast<Eigen::Index>(g.size()));
  out.analytic_available = true;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto value = y_derivative(kernel, g.point(i), out.snapped_x0, opt.n, g);
    if (!value) {
      out.analytic_available = false;
      break;
    }
    analytic[static_cast<Eigen::Index>(i)] = *value;
  }
  if (out.analytic_available) {
    const double an = l2_norm(analytic, g);
    const double dn = l2_norm(discrete, g);
    if (!(an > 0.0) || !(dn > 0.0)) throw Error(ErrorCode::ZeroVector, "derivative profile vanishes");
    out.profile_distance = sup_norm(RealVector(discrete / dn - analytic / an));
    reference = analytic;
    out.sample_vs_analytic = true;
  }

  const SqrtFactor s = sqrt_factor(c);
  const Conditioner conditioner(s, t);
  Stream rng = Stream::substream(opt.seed, 0);
  const FieldSample sample = conditioner.sample(ConditionSpec{opt.u_big, opt.mode, opt.scalar}, rng);
  out.sample_distance = normalized_sup_distance(sample, reference, g);

  out.pass = out.sample_distance <= opt.sample_tol &&
             (!out.profile_distance || *out.profile_distance <= opt.profile_tol);
  return out;
}

}  // namespace condensate
