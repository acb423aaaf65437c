#include "condensate/functional.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "condensate/error.hpp"

namespace condensate {

namespace {

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidSpec, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

int parse_integer(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidSpec, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

void require_in_domain(const Grid& g, double x0) {
  if (!std::isfinite(x0) || !g.contains(x0)) {
    std::ostringstream os;
    os << "x0 = " << x0 << " outside [" << g.a() << ", " << g.b() << "]";
    throw Error(ErrorCode::OutOfDomain, os.str());
  }
}

// Fornberg's recursion for finite-difference weights at z = 0 on the given nodes.
// Returns weights[node][derivative] for derivatives 0..max_deriv.
std::vector<std::vector<double>> fornberg(const std::vector<double>& nodes, int max_deriv) {
  const auto count = nodes.size();
  std::vector<std::vector<double>> w(count, std::vector<double>(static_cast<std::size_t>(max_deriv) + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0];
  w[0][0] = 1.0;
  for (std::size_t i = 1; i < count; ++i) {
    const int mn = std::min(static_cast<int>(i), max_deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i];
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          w[i][k] = c1 * (k * w[i - 1][k - 1] - c5 * w[i - 1][k]) / c2;
        }
        w[i][0] = -c1 * c5 * w[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) w[j][k] = (c4 * w[j][k] - k * w[j][k - 1]) / c3;
      w[j][0] = c4 * w[j][0] / c3;
    }
    c1 = c2;
  }
  return w;
}

}  // namespace

LinearFunctional::LinearFunctional(Grid g, FunctionalKind kind, RealVector coeff)
    : grid_(std::move(g)), kind_(std::move(kind)), coeff_(std::move(coeff)) {
  if (coeff_.size() != static_cast<Eigen::Index>(grid_.size())) {
    throw Error(ErrorCode::LengthMismatch, "functional has " + std::to_string(coeff_.size()) +
                                               " coefficients for a grid of " + std::to_string(grid_.size()));
  }
  if (!coeff_.allFinite()) throw Error(ErrorCode::InvalidSpec, "functional coefficients must be finite");
  if (coeff_.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::DegenerateFunctional, "functional coefficients are identically zero");
  }
}

int LinearFunctional::derivative_order() const noexcept {
  if (const auto* d = std::get_if<DerivativeEval>(&kind_)) return d->n;
  return 0;
}

LinearFunctional make_point_functional(const Grid& g, double x0) {
  require_in_domain(g, x0);
  const auto i0 = g.nearest_index(x0);
  RealVector coeff = RealVector::Zero(static_cast<Eigen::Index>(g.size()));
  coeff[static_cast<Eigen::Index>(i0)] = 1.0 / g.weight();
  return LinearFunctional(g, PointEval{x0, i0, std::abs(x0 - g.point(i0))}, std::move(coeff));
}

RealVector central_difference_weights(int n, int order) {
  if (order != 2 && order != 4 && order != 6) {
    throw Error(ErrorCode::UnsupportedOrder, "stencil order must be 2, 4 or 6, got " + std::to_string(order));
  }
  if (n < 0) throw Error(ErrorCode::UnsupportedOrder, "derivative order must be nonnegative");
  if (n == 0) return RealVector::Ones(1);
  const int points = 2 * ((n + 1) / 2) - 1 + order;
  const int half = (points - 1) / 2;
  std::vector<double> nodes;
  for (int j = -half; j <= half; ++j) nodes.push_back(static_cast<double>(j));
  const auto w = fornberg(nodes, n);
  RealVector out(points);
  for (int j = 0; j < points; ++j) out[j] = w[static_cast<std::size_t>(j)][static_cast<std::size_t>(n)];
  return out;
}

LinearFunctional make_derivative_functional(const Grid& g, double x0, int n, int order) {
  require_in_domain(g, x0);
  const RealVector c = central_difference_weights(n, order);
  const auto half = static_cast<long>((c.size() - 1) / 2);
  const auto i0 = g.nearest_index(x0);
  const auto center = static_cast<long>(i0);
  if (center - half < 0 || center + half >= static_cast<long>(g.size())) {
    throw Error(ErrorCode::StencilOutOfRange, "stencil of half-width " + std::to_string(half) +
                                                  " does not fit around grid index " + std::to_string(i0));
  }
  const double scale = 1.0 / (g.weight() * std::pow(g.spacing(), n));
  RealVector coeff = RealVector::Zero(static_cast<Eigen::Index>(g.size()));
  for (long j = -half; j <= half; ++j) coeff[center + j] = c[j + half] * scale;
  return LinearFunctional(g, DerivativeEval{x0, n, order, i0, std::abs(x0 - g.point(i0))}, std::move(coeff));
}

LinearFunctional make_integral_functional(const Grid& g, std::string_view weight_name) {
  const auto m = static_cast<Eigen::Index>(g.size());
  RealVector coeff(m);
  if (weight_name == "uniform") {
    coeff.setOnes();
  } else if (weight_name == "linear") {
    for (Eigen::Index i = 0; i < m; ++i) coeff[i] = (g.point(static_cast<std::size_t>(i)) - g.a()) / g.length();
  } else if (weight_name.starts_with("cos")) {
    const int k = parse_integer(weight_name.substr(3), "cosine index");
    if (k < 0) throw Error(ErrorCode::InvalidSpec, "cosine index must be nonnegative");
    const double len = g.length();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double x = g.point(static_cast<std::size_t>(i));
      coeff[i] = k == 0 ? 1.0 / std::sqrt(len)
                        : std::sqrt(2.0 / len) * std::cos(k * std::numbers::pi * (x - g.a()) / len);
    }
  } else {
    throw Error(ErrorCode::InvalidSpec, "unknown integral weight '" + std::string(weight_name) +
                                            "' (expected uniform, linear or cos<k>)");
  }
  return LinearFunctional(g, Integral{std::string(weight_name)}, std::move(coeff));
}

LinearFunctional make_custom_functional(const Grid& g, RealVector coeff) {
  return LinearFunctional(g, Custom{}, std::move(coeff));
}

namespace {

RealVector read_coefficients(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open functional file '" + path + "'");
  std::vector<double> values;
  std::string line;
  bool seen_line = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> row;
    bool numeric = true;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto first = field.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      const auto last = field.find_last_not_of(" \t");
      const std::string_view token(field.data() + first, last - first + 1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (row.empty() && numeric) continue;
    if (!numeric) {
      if (seen_line) throw Error(ErrorCode::InvalidSpec, "non-numeric line '" + line + "' in " + path);
      seen_line = true;
      continue;
    }
    seen_line = true;
    values.insert(values.end(), row.begin(), row.end());
  }
  RealVector out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[i];
  return out;
}

}  // namespace

LinearFunctional parse_functional(std::string_view spec, const Grid& g) {
  const auto colon = spec.find(':');
  const auto name = spec.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (name == "point") return make_point_functional(g, parse_number(rest, "x0"));
  if (name == "dpoint") {
    std::vector<std::string_view> parts;
    std::string_view tail = rest;
    while (true) {
      const auto pos = tail.find(':');
      parts.push_back(tail.substr(0, pos));
      if (pos == std::string_view::npos) break;
      tail.remove_prefix(pos + 1);
    }
    if (parts.size() < 2 || parts.size() > 3) {
      throw Error(ErrorCode::InvalidSpec, "expected dpoint:<x0>:<n>[:<order>], got '" + std::string(spec) + "'");
    }
    const double x0 = parse_number(parts[0], "x0");
    const int n = parse_integer(parts[1], "derivative order");
    const int order = parts.size() == 3 ? parse_integer(parts[2], "stencil order") : 4;
    if (n == 0) {
      // Zeroth derivative is point evaluation; keep the derivative kind for reporting.
      central_difference_weights(0, order);
      auto p = make_point_functional(g, x0);
      const auto& pe = std::get<PointEval>(p.kind());
      return LinearFunctional(g, DerivativeEval{x0, 0, order, pe.index, pe.snap_distance}, p.coeff());
    }
    return make_derivative_functional(g, x0, n, order);
  }
  if (name == "integral") {
    if (rest.empty()) throw Error(ErrorCode::InvalidSpec, "integral functional needs a weight name");
    return make_integral_functional(g, rest);
  }
  if (name == "custom") {
    if (!rest.starts_with('@') || rest.size() < 2) {
      throw Error(ErrorCode::InvalidSpec, "expected custom:@<csv-file>, got '" + std::string(spec) + "'");
    }
    RealVector coeff = read_coefficients(std::string(rest.substr(1)));
    if (coeff.size() != static_cast<Eigen::Index>(g.size())) {
      throw Error(ErrorCode::LengthMismatch, "custom functional file has " + std::to_string(coeff.size()) +
                                                 " values, grid has " + std::to_string(g.size()));
    }
    return make_custom_functional(g, std::move(coeff));
  }
  throw Error(ErrorCode::InvalidSpec, "unknown functional '" + std::string(name) +
                                          "' (expected point, dpoint, integral or custom)");
}

std::string describe(const LinearFunctional& t) {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& kind) {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, PointEval>) {
          os << "point:" << kind.x0;
        } else if constexpr (std::is_same_v<K, DerivativeEval>) {
          os << "dpoint:" << kind.x0 << ':' << kind.n << ':' << kind.order;
        } else if constexpr (std::is_same_v<K, Integral>) {
          os << "integral:" << kind.weight_name;
        } else {
          os << "custom";
        }
      },
      t.kind());
  return os.str();
}

double TheoryConstants::t_threshold(double u) const noexcept { return u / std::sqrt(tct); }

namespace {

void require_same_grid(const LinearFunctional& t, const CovOperator& c) {
  if (!(t.grid() == c.grid())) throw Error(ErrorCode::GridMismatch, "functional and operator live on different grids");
}

}  // namespace

double tct(const LinearFunctional& t, const CovOperator& c) {
  require_same_grid(t, c);
  const RealVector ct = apply(c, t.coeff());
  const double value = inner(t.coeff(), ct, c.grid());
  const double t_norm2 = inner(t.coeff(), t.coeff(), c.grid());
  const double floor = 1e-14 * point_variance_max(c) * t_norm2;
  if (!(value > floor)) {
    std::ostringstream os;
    os << "<T|C|T> = " << value << " is not above the degeneracy floor " << floor;
    throw Error(ErrorCode::DegenerateFunctional, os.str());
  }
  return value;
}

RealVector profile(const LinearFunctional& t, const CovOperator& c) {
  require_same_grid(t, c);
  return apply(c, t.coeff());
}

TheoryConstants constants(const LinearFunctional& t, const CovOperator& c) {
  TheoryConstants k{};
  k.tct = tct(t, c);
  const double p = l2_norm(profile(t, c), c.grid());
  k.tc2t = p * p;
  if (!(k.tc2t > 0.0)) throw Error(ErrorCode::DegenerateFunctional, "<T|C^2|T> vanishes");
  k.a = std::sqrt(point_variance_max(c));
  k.b = std::sqrt(k.tct / k.tc2t);
  k.d = k.a * k.b * std::sqrt(c.grid().length());
  return k;
}

}  // namespace condensate
