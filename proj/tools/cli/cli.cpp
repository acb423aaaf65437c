#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "condensate/error.hpp"
#include "report_io.hpp"

namespace condensate::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string domain = "0,1";
  std::size_t grid = 128;
  std::string kernel = "sqexp:1:0.2";
  std::string functional = "point:0.5";
  std::string scalar = "complex";
  std::string mode = "fixed-rho:1";
  std::optional<double> u;
  std::string u_list = "10,100,1000,10000";
  std::optional<std::size_t> mc;
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
  double clip_tol = 1e-12;
  std::string which;
  std::string config;
};

double parse_real(std::string_view text, std::string_view what) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw UsageError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> values;
  while (true) {
    const auto comma = text.find(',');
    values.push_back(parse_real(text.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return values;
}

ScalarField parse_scalar(const std::string& text) {
  if (text == "real") return ScalarField::Real;
  if (text == "complex") return ScalarField::Complex;
  throw UsageError("--scalar must be real or complex, got '" + text + "'");
}

ConditionMode parse_mode(std::string_view text) {
  if (text == "random") return RandomRho{};
  constexpr std::string_view prefix = "fixed-rho:";
  if (!text.starts_with(prefix)) throw UsageError("--mode must be fixed-rho:RHO[:THETA] or random");
  text.remove_prefix(prefix.size());
  const auto colon = text.find(':');
  FixedRho fixed;
  fixed.rho = parse_real(text.substr(0, colon), "rho");
  fixed.theta = colon == std::string_view::npos ? 0.0 : parse_real(text.substr(colon + 1), "theta");
  return fixed;
}

// Everything a command needs, resolved from the flags.
struct Problem {
  Grid grid;
  Kernel kernel;
  CovOperator cov;
  ScalarField scalar;
  ConditionMode mode;
};

Problem resolve(const Options& opt) {
  const auto bounds = parse_list(opt.domain, "domain");
  if (bounds.size() != 2) throw UsageError("--domain expects a,b");
  Grid g(bounds[0], bounds[1], opt.grid);
  Kernel k = parse_kernel(opt.kernel);
  CovOperator c = assemble(k, g);
  return Problem{g, std::move(k), std::move(c), parse_scalar(opt.scalar), parse_mode(opt.mode)};
}

Json config_json(const std::string& command, const Options& opt, const Problem& p) {
  Json cfg;
  cfg["command"] = command;
  cfg["domain"] = {p.grid.a(), p.grid.b()};
  cfg["grid"] = p.grid.size();
  cfg["kernel"] = opt.kernel;
  cfg["functional"] = opt.functional;
  cfg["scalar"] = to_string(p.scalar);
  cfg["mode"] = mode_json(p.mode);
  cfg["seed"] = opt.seed;
  cfg["clip_tol"] = opt.clip_tol;
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path + "'");
}

void write_json(const std::string& path, const Json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
  finish(out, path);
}

std::string sidecar_path(const std::string& csv_path) {
  if (csv_path.size() > 4 && csv_path.ends_with(".csv")) return csv_path.substr(0, csv_path.size() - 4) + ".json";
  return csv_path + ".json";
}

int cmd_profile(const Options& opt, std::ostream& out) {
  const Problem p = resolve(opt);
  const LinearFunctional t = parse_functional(opt.functional, p.grid);
  const RealVector prof = profile(t, p.cov);

  std::optional<RealVector> analytic;
  std::optional<std::size_t> center;
  if (const auto* pe = std::get_if<PointEval>(&t.kind())) center = pe->index;
  if (const auto* de = std::get_if<DerivativeEval>(&t.kind())) center = de->index;
  if (center) {
    RealVector curve(static_cast<Eigen::Index>(p.grid.size()));
    bool ok = true;
    for (std::size_t i = 0; i < p.grid.size() && ok; ++i) {
      const auto v = y_derivative(p.kernel, p.grid.point(i), p.grid.point(*center), t.derivative_order(), p.grid);
      if (v) curve[static_cast<Eigen::Index>(i)] = *v;
      ok = v.has_value();
    }
    if (ok && t.derivative_order() > 0) analytic = std::move(curve);
  }

  const std::string path = opt.out.empty() ? "profile.csv" : opt.out;
  auto file = open_output(path);
  write_profile_csv(file, p.grid, prof, analytic);
  finish(file, path);
  out << "wrote " << path << '\n';
  return kOk;
}

int cmd_condition(const Options& opt, std::ostream& out) {
  const Problem p = resolve(opt);
  const LinearFunctional t = parse_functional(opt.functional, p.grid);
  const ConditionSpec spec{opt.u.value_or(1000.0), p.mode, p.scalar};
  validate(spec);

  const SqrtFactor s = sqrt_factor(p.cov, opt.clip_tol);
  const Conditioner cond(s, t);
  const TheoryConstants k = constants(t, p.cov);
  Stream rng = Stream::substream(opt.seed, 0);
  const FieldSample sample = cond.sample(spec, rng);
  const DistanceRecord rec = measure(sample, 0, profile(t, p.cov), k, p.grid);

  const std::string path = opt.out.empty() ? "condition.csv" : opt.out;
  auto file = open_output(path);
  write_field_csv(file, p.grid, sample.values);
  finish(file, path);

  Json cfg = config_json("condition", opt, p);
  cfg["u"] = spec.u;
  Json doc;
  doc["config"] = cfg;
  doc["u"] = spec.u;
  doc["rho"] = sample.rho;
  doc["theta"] = sample.theta;
  doc["t_u"] = {{"re", sample.t_u.real()}, {"im", sample.t_u.imag()}};
  doc["r2"] = sample.r2;
  doc["sup_dist"] = rec.sup_dist;
  doc["l2_dist"] = rec.l2_dist;
  doc["bound_rhs"] = rec.bound_rhs;
  doc["constants"] = constants_json(k);
  const std::string json_path = sidecar_path(path);
  write_json(json_path, doc);
  out << "wrote " << path << " and " << json_path << '\n';
  return rec.est0_ok ? kOk : kVerificationFailed;
}

SweepReport run_sweep(const Options& opt, const Problem& p, const std::vector<double>& u_list, std::size_t n_mc,
                      const Hooks& hooks) {
  const LinearFunctional t = parse_functional(opt.functional, p.grid);
  const SqrtFactor s = sqrt_factor(p.cov, opt.clip_tol);
  SweepOptions so;
  so.u_list = u_list;
  so.n_mc = n_mc;
  so.mode = p.mode;
  so.scalar = p.scalar;
  so.seed = opt.seed;
  so.threads = opt.threads;
  so.record_hook = hooks.record_hook;
  return sweep(s, p.cov, t, so);
}

int cmd_sweep(const Options& opt, std::ostream& out, const Hooks& hooks) {
  const Problem p = resolve(opt);
  const auto u_list = opt.u ? std::vector<double>{*opt.u} : parse_list(opt.u_list, "u list");
  for (double u : u_list) validate(ConditionSpec{u, p.mode, p.scalar});
  const std::size_t n_mc = opt.mc.value_or(200);
  const SweepReport report = run_sweep(opt, p, u_list, n_mc, hooks);

  const std::string path = opt.out.empty() ? "sweep.csv" : opt.out;
  auto file = open_output(path);
  write_records_csv(file, report);
  finish(file, path);

  Json cfg = config_json("sweep", opt, p);
  cfg["u_list"] = u_list;
  cfg["mc"] = n_mc;
  const std::string json_path = sidecar_path(path);
  write_json(json_path, sweep_json(report, cfg));

  out << "wrote " << path << " and " << json_path << "; slope ";
  if (report.slope) {
    out << format_number(*report.slope);
  } else {
    out << "undefined";
  }
  out << ", violations est0=" << report.violations_est0 << " est12=" << report.violations_est12 << '\n';
  return report.violations_est0 + report.violations_est12 > 0 ? kVerificationFailed : kOk;
}

int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  const Problem p = resolve(opt);
  const std::string path = opt.out.empty() ? "verify.json" : opt.out;
  Json cfg = config_json("verify " + opt.which, opt, p);
  Json doc;
  bool pass = false;

  if (opt.which == "prop1") {
    const LinearFunctional t = parse_functional(opt.functional, p.grid);
    const std::size_t n_mc = opt.mc.value_or(20000);
    cfg["mc"] = n_mc;
    const SqrtFactor s = sqrt_factor(p.cov, opt.clip_tol);
    const Prop1Result r = verify_prop1(s, p.cov, t, n_mc, opt.seed, p.scalar, opt.threads);
    doc = prop1_json(r, cfg);
    pass = r.pass;
  } else if (opt.which == "prop3") {
    const LinearFunctional t = parse_functional(opt.functional, p.grid);
    Prop3Options po;
    if (const auto* de = std::get_if<DerivativeEval>(&t.kind())) {
      po.x0 = de->x0;
      po.n = de->n;
      po.order = de->order;
    } else if (const auto* pe = std::get_if<PointEval>(&t.kind())) {
      po.x0 = pe->x0;
      po.n = 0;
    } else {
      throw UsageError("verify prop3 needs a point: or dpoint: functional");
    }
    po.u_big = opt.u.value_or(1e6);
    po.mode = p.mode;
    po.scalar = p.scalar;
    po.seed = opt.seed;
    validate(ConditionSpec{po.u_big, po.mode, po.scalar});
    cfg["u"] = po.u_big;
    const Prop3Result r = verify_prop3(p.kernel, p.grid, po);
    doc = prop3_json(r, cfg);
    pass = r.pass;
    if (r.smoothness_warning) {
      err << "warning: kernel is not differentiable on the diagonal; derivative conditioning is outside the "
             "smoothness hypothesis\n";
    }
  } else if (opt.which == "bounds") {
    const double u = opt.u.value_or(1000.0);
    const std::size_t n_mc = opt.mc.value_or(200);
    validate(ConditionSpec{u, p.mode, p.scalar});
    cfg["u"] = u;
    cfg["mc"] = n_mc;
    const SweepReport report = run_sweep(opt, p, {u}, n_mc, hooks);
    doc["check"] = "bounds";
    doc["config"] = cfg;
    pass = report.violations_est0 == 0 && report.violations_est12 == 0;
    doc["pass"] = pass;
    doc["n_records"] = report.records.size();
    doc["applicable"] = report.applicable;
    doc["violations_est0"] = report.violations_est0;
    doc["violations_est12"] = report.violations_est12;
    doc["median_sup_dist"] = report.levels.front().sup.q50;
    doc["constants"] = constants_json(report.constants);
  } else {
    throw UsageError("verify expects prop1, prop3 or bounds");
  }

  write_json(path, doc);
  out << "verify " << opt.which << ": " << (pass ? "pass" : "FAIL") << " (" << path << ")\n";
  return pass ? kOk : kVerificationFailed;
}

void add_common(CLI::App* app, Options& opt) {
  app->add_option("--domain", opt.domain, "Interval a,b")->capture_default_str();
  app->add_option("--grid", opt.grid, "Number of midpoint grid points")->capture_default_str();
  app->add_option("--kernel", opt.kernel, "sqexp:VAR:ELL | exp:VAR:ELL | rankk:L0@K0,...")->capture_default_str();
  app->add_option("--functional", opt.functional, "point:X0 | dpoint:X0:N[:ORDER] | integral:NAME | custom:@FILE")
      ->capture_default_str();
  app->add_option("--scalar", opt.scalar, "real | complex")->capture_default_str();
  app->add_option("--mode", opt.mode, "fixed-rho:RHO[:THETA] | random")->capture_default_str();
  app->add_option("--u", opt.u, "Threshold on <T|phi>");
  app->add_option("--u-list", opt.u_list, "Ascending thresholds X1,X2,...")->capture_default_str();
  app->add_option("--mc", opt.mc, "Monte-Carlo sample count");
  app->add_option("--seed", opt.seed, "64-bit seed")->envname("CONDENSATE_SEED")->capture_default_str();
  app->add_option("--out", opt.out, "Output path");
  app->add_option("--threads", opt.threads, "Worker threads (0 = all cores); does not change results")
      ->capture_default_str();
  app->add_option("--clip-tol", opt.clip_tol, "Relative eigenvalue clip window")->capture_default_str();
  app->add_option("--config", opt.config, "JSON file whose keys mirror the long flags");
}

const std::vector<std::string> kCommands = {"profile", "condition", "sweep", "verify"};

// Splices "--key value" pairs from a JSON config right after the subcommand so that
// flags given on the command line still win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].starts_with("--config=")) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config '" + path + "' must hold a JSON object");

  std::vector<std::string> injected;
  for (const auto& [key, value] : doc.items()) {
    if (key == "config") continue;
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i) text += ',';
        text += value[i].is_string() ? value[i].get<std::string>() : value[i].dump();
      }
    } else if (value.is_number_float()) {
      text = format_number(value.get<double>());
    } else {
      text = value.dump();
    }
    injected.push_back("--" + key);
    injected.push_back(text);
  }
  auto pos = args.begin();
  while (pos != args.end() && std::find(kCommands.begin(), kCommands.end(), *pos) == kCommands.end()) ++pos;
  if (pos != args.end()) ++pos;
  args.insert(pos, injected.begin(), injected.end());
  return args;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::NotPositive:
    case ErrorCode::ZeroVector:
      return kRuntimeError;
    default:
      return kUsageError;
  }
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  CLI::App app{"Gaussian fields conditioned on a large linear functional", "condensate"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Options opt;

  auto* profile_cmd = app.add_subcommand("profile", "Write the limit profile C|T> as CSV");
  auto* condition_cmd = app.add_subcommand("condition", "Sample one conditioned field (CSV + JSON sidecar)");
  auto* sweep_cmd = app.add_subcommand("sweep", "Paired-seed u-sweep with per-sample bound checks");
  auto* verify_cmd = app.add_subcommand("verify", "Run prop1, prop3 or bounds checks");
  for (auto* sub : {profile_cmd, condition_cmd, sweep_cmd, verify_cmd}) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_common(sub, opt);
  }
  verify_cmd->add_option("which", opt.which, "prop1 | prop3 | bounds")
      ->required()
      ->check(CLI::IsMember({"prop1", "prop3", "bounds"}));

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }

  try {
    if (*profile_cmd) return cmd_profile(opt, out);
    if (*condition_cmd) return cmd_condition(opt, out);
    if (*sweep_cmd) return cmd_sweep(opt, out, hooks);
    return cmd_verify(opt, out, err, hooks);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    if (exit_code_for(e.code()) == kUsageError) err << app.help();
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace condensate::cli
