#include "proxyvote/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "proxyvote/special_functions.hpp"
#include "proxyvote/text.hpp"

namespace proxyvote {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_support(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a < b, "distribution support must be finite with a < b");
}

double gamma_draw(double shape, Stream& rng) {
  if (shape < 1.0) return gamma_draw(shape + 1.0, rng) * std::pow(rng.uniform_open(), 1.0 / shape);
  // Marsaglia & Tsang.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double triangular_cdf(const Triangular& t, double x) {
  if (x <= t.a) return 0.0;
  if (x >= t.b) return 1.0;
  const double w = t.b - t.a;
  if (x <= t.peak) return (x - t.a) * (x - t.a) / (w * (t.peak - t.a));
  return 1.0 - (t.b - x) * (t.b - x) / (w * (t.b - t.peak));
}

double triangular_inverse(const Triangular& t, double u) {
  const double w = t.b - t.a;
  const double split = (t.peak - t.a) / w;
  if (u <= split) return t.a + std::sqrt(u * w * (t.peak - t.a));
  return t.b - std::sqrt((1.0 - u) * w * (t.b - t.peak));
}

}  // namespace

// --- NormalPiece -----------------------------------------------------------

void detail::NormalPiece::init(const TruncatedNormal& t) {
  require(t.sd > 0.0 && std::isfinite(t.sd), "truncated normal needs sd > 0");
  require(std::isfinite(t.center), "truncated normal needs a finite center");
  check_support(t.a, t.b);
  center = t.center;
  sd = t.sd;
  a = t.a;
  b = t.b;
  const double za = (a - center) / sd;
  const double zb = (b - center) / sd;
  upper_tail = za > 0.0;
  if (upper_tail) {
    base = special::normal_sf(za);
    mass = base - special::normal_sf(zb);
  } else {
    base = special::normal_cdf(za);
    mass = special::normal_cdf(zb) - base;
  }
  require(mass > 0.0, "truncated normal has no mass on its support");
}

double detail::NormalPiece::pdf(double x) const {
  if (x < a || x > b) return 0.0;
  return special::normal_pdf((x - center) / sd) / (sd * mass);
}

double detail::NormalPiece::cdf(double x) const {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double z = (x - center) / sd;
  const double v = upper_tail ? (base - special::normal_sf(z)) / mass : (special::normal_cdf(z) - base) / mass;
  return std::clamp(v, 0.0, 1.0);
}

double detail::NormalPiece::inverse(double u) const {
  const double z = upper_tail ? -special::normal_quantile(base - u * mass)
                              : special::normal_quantile(base + u * mass);
  return std::clamp(center + sd * z, a, b);
}

// --- DistributionSpec ------------------------------------------------------

DistributionSpec::DistributionSpec(Variant v) : variant_(std::move(v)) {
  std::visit(overloaded{
                 [&](const Uniform& u) {
                   check_support(u.a, u.b);
                   lower_ = u.a;
                   upper_ = u.b;
                 },
                 [&](const TruncatedNormal& t) {
                   pieces_[0].init(t);
                   lower_ = t.a;
                   upper_ = t.b;
                 },
                 [&](const Triangular& t) {
                   check_support(t.a, t.b);
                   require(t.a <= t.peak && t.peak <= t.b, "triangular peak must lie in [a,b]");
                   lower_ = t.a;
                   upper_ = t.b;
                 },
                 [&](const BimodalMixture& m) {
                   require(m.first.a == m.second.a && m.first.b == m.second.b,
                           "mixture components must share one support");
                   require(m.weight >= 0.0 && m.weight <= 1.0, "mixture weight must lie in [0,1]");
                   pieces_[0].init(m.first);
                   pieces_[1].init(m.second);
                   lower_ = m.first.a;
                   upper_ = m.first.b;
                 },
                 [&](const ScaledBeta& s) {
                   check_support(s.a, s.b);
                   require(s.alpha > 0.0 && s.beta > 0.0, "beta shape parameters must be positive");
                   log_beta_ = special::log_beta(s.alpha, s.beta);
                   lower_ = s.a;
                   upper_ = s.b;
                 },
             },
             variant_);
}

double pdf(const DistributionSpec& d, double x) {
  if (x < d.lower_ || x > d.upper_ || std::isnan(x)) return 0.0;
  return std::visit(
      overloaded{
          [&](const Uniform& u) { return 1.0 / (u.b - u.a); },
          [&](const TruncatedNormal&) { return d.pieces_[0].pdf(x); },
          [&](const Triangular& t) {
            const double w = t.b - t.a;
            if (x < t.peak) return 2.0 * (x - t.a) / (w * (t.peak - t.a));
            if (x > t.peak) return 2.0 * (t.b - x) / (w * (t.b - t.peak));
            return 2.0 / w;
          },
          [&](const BimodalMixture& m) {
            return m.weight * d.pieces_[0].pdf(x) + (1.0 - m.weight) * d.pieces_[1].pdf(x);
          },
          [&](const ScaledBeta& s) {
            const double w = s.b - s.a;
            const double y = (x - s.a) / w;
            const double log_kernel = (s.alpha - 1.0) * std::log(y) + (s.beta - 1.0) * std::log1p(-y);
            return std::exp(log_kernel - d.log_beta_) / w;
          },
      },
      d.variant_);
}

double cdf(const DistributionSpec& d, double x) {
  if (std::isnan(x)) return 0.0;
  if (x <= d.lower_) return 0.0;
  if (x >= d.upper_) return 1.0;
  return std::visit(overloaded{
                        [&](const Uniform& u) { return (x - u.a) / (u.b - u.a); },
                        [&](const TruncatedNormal&) { return d.pieces_[0].cdf(x); },
                        [&](const Triangular& t) { return triangular_cdf(t, x); },
                        [&](const BimodalMixture& m) {
                          return m.weight * d.pieces_[0].cdf(x) + (1.0 - m.weight) * d.pieces_[1].cdf(x);
                        },
                        [&](const ScaledBeta& s) {
                          return special::incomplete_beta(s.alpha, s.beta, (x - s.a) / (s.b - s.a));
                        },
                    },
                    d.variant_);
}

double quantile(const DistributionSpec& d, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile: p must lie in [0,1]");
  if (const auto* u = std::get_if<Uniform>(&d.variant())) return u->a + p * (u->b - u->a);
  if (const auto* t = std::get_if<Triangular>(&d.variant())) return triangular_inverse(*t, p);
  if (p == 0.0) return d.lower();
  double lo = d.lower(), hi = d.upper();
  const double tol = 1e-12 * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(d, mid) >= p)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double draw(const DistributionSpec& d, Stream& rng) {
  return std::visit(overloaded{
                        [&](const Uniform& u) { return u.a + (u.b - u.a) * rng.uniform(); },
                        [&](const TruncatedNormal&) { return d.pieces_[0].inverse(rng.uniform_open()); },
                        [&](const Triangular& t) { return triangular_inverse(t, rng.uniform()); },
                        [&](const BimodalMixture& m) {
                          const int piece = rng.uniform() < m.weight ? 0 : 1;
                          return d.pieces_[piece].inverse(rng.uniform_open());
                        },
                        [&](const ScaledBeta& s) {
                          const double x = gamma_draw(s.alpha, rng);
                          const double y = gamma_draw(s.beta, rng);
                          return s.a + (s.b - s.a) * (x / (x + y));
                        },
                    },
                    d.variant_);
}

Eigen::VectorXd sample(const DistributionSpec& d, Eigen::Index n, Stream& rng) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = draw(d, rng);
  return out;
}

double distribution_mean(const DistributionSpec& d) {
  auto normal_mean = [](const detail::NormalPiece& p) {
    const double za = (p.a - p.center) / p.sd, zb = (p.b - p.center) / p.sd;
    return p.center + p.sd * (special::normal_pdf(za) - special::normal_pdf(zb)) / p.mass;
  };
  return std::visit(overloaded{
                        [&](const Uniform& u) { return 0.5 * (u.a + u.b); },
                        [&](const TruncatedNormal&) { return normal_mean(d.pieces_[0]); },
                        [&](const Triangular& t) { return (t.a + t.peak + t.b) / 3.0; },
                        [&](const BimodalMixture& m) {
                          return m.weight * normal_mean(d.pieces_[0]) +
                                 (1.0 - m.weight) * normal_mean(d.pieces_[1]);
                        },
                        [&](const ScaledBeta& s) { return s.a + (s.b - s.a) * s.alpha / (s.alpha + s.beta); },
                    },
                    d.variant_);
}

ShapeFlags classify(const DistributionSpec& d) {
  const double mid = 0.5 * (d.lower() + d.upper());
  const double eps = 1e-12 * d.width();
  ShapeFlags flags;
  std::visit(
      overloaded{
          [&](const Uniform&) {
            flags.symmetric = true;
            flags.single_peaked = true;
            flags.weakly = true;
            flags.turning_point = mid;
          },
          [&](const TruncatedNormal& t) {
            flags.symmetric = std::fabs(t.center - mid) <= eps;
            flags.single_peaked = true;
            flags.turning_point = std::clamp(t.center, t.a, t.b);
          },
          [&](const Triangular& t) {
            flags.symmetric = std::fabs(t.peak - mid) <= eps;
            flags.single_peaked = true;
            flags.turning_point = t.peak;
          },
          [&](const BimodalMixture& m) {
            const bool mirrored = std::fabs(m.first.center + m.second.center - 2.0 * mid) <= eps &&
                                  m.first.sd == m.second.sd && m.weight == 0.5;
            const bool same = m.first.center == m.second.center && m.first.sd == m.second.sd;
            flags.symmetric = mirrored || (same && std::fabs(m.first.center - mid) <= eps);
            // The shape of a two-normal mixture has no simple closed-form test;
            // read it off a dense grid of the density.
            constexpr int kGrid = 4001;
            std::vector<double> f(kGrid);
            for (int i = 0; i < kGrid; ++i) f[i] = pdf(d, d.lower() + d.width() * i / (kGrid - 1));
            const double scale = *std::max_element(f.begin(), f.end());
            int direction_changes_up = 0, direction_changes_down = 0, last = 0;
            for (int i = 1; i < kGrid; ++i) {
              const double diff = f[i] - f[i - 1];
              const int dir = diff > 1e-13 * scale ? 1 : (diff < -1e-13 * scale ? -1 : 0);
              if (dir == 0) continue;
              if (last == 1 && dir == -1) ++direction_changes_down;
              if (last == -1 && dir == 1) ++direction_changes_up;
              last = dir;
            }
            flags.single_peaked = direction_changes_up == 0 && direction_changes_down <= 1;
            flags.single_dipped = direction_changes_down == 0 && direction_changes_up <= 1;
            if (flags.single_peaked && flags.single_dipped) flags.single_dipped = false;  // monotone
            const auto it = flags.single_dipped ? std::min_element(f.begin(), f.end())
                                                : std::max_element(f.begin(), f.end());
            flags.turning_point = d.lower() + d.width() * static_cast<double>(it - f.begin()) / (kGrid - 1);
          },
          [&](const ScaledBeta& s) {
            flags.symmetric = s.alpha == s.beta;
            const double w = s.b - s.a;
            if (s.alpha == 1.0 && s.beta == 1.0) {
              flags.single_peaked = true;
              flags.weakly = true;
              flags.turning_point = mid;
            } else if (s.alpha >= 1.0 && s.beta >= 1.0) {
              flags.single_peaked = true;
              flags.turning_point = s.a + w * (s.alpha - 1.0) / (s.alpha + s.beta - 2.0);
            } else if (s.alpha <= 1.0 && s.beta <= 1.0) {
              flags.single_dipped = true;
              flags.turning_point = s.a + w * (1.0 - s.alpha) / (2.0 - s.alpha - s.beta);
            } else {
              // Monotone density: peaked at the end it decreases from.
              flags.single_peaked = true;
              flags.turning_point = s.alpha < 1.0 ? s.a : s.b;
            }
          },
      },
      d.variant());
  return flags;
}

DistributionSpec parse_distribution(std::string_view literal) {
  const auto colon = literal.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("distribution literal needs 'family:params': " + std::string(literal));
  const auto family = text::trim(literal.substr(0, colon));
  std::vector<double> p;
  for (auto tok : text::split(literal.substr(colon + 1), ',')) p.push_back(text::to_double(tok));
  auto arity = [&](std::size_t n) {
    if (p.size() != n)
      throw std::invalid_argument("wrong parameter count in distribution literal: " + std::string(literal));
  };
  if (family == "uniform") {
    arity(2);
    return Uniform{p[0], p[1]};
  }
  if (family == "tnorm") {
    arity(4);
    return TruncatedNormal{p[0], p[1], p[2], p[3]};
  }
  if (family == "tri") {
    arity(3);
    return Triangular{p[0], p[1], p[2]};
  }
  if (family == "beta") {
    arity(4);
    return ScaledBeta{p[0], p[1], p[2], p[3]};
  }
  if (family == "bimodal") {
    if (p.size() == 5) {
      p.push_back(-1.0);
      p.push_back(1.0);
    }
    arity(7);
    return BimodalMixture{{p[0], p[1], p[5], p[6]}, {p[2], p[3], p[5], p[6]}, p[4]};
  }
  throw std::invalid_argument("unknown distribution family: " + std::string(family));
}

std::string to_literal(const DistributionSpec& d) {
  auto join = [](std::string family, std::initializer_list<double> vs) {
    std::string out = std::move(family) + ":";
    bool first = true;
    for (double v : vs) {
      if (!first) out += ',';
      out += text::format_double(v);
      first = false;
    }
    return out;
  };
  return std::visit(overloaded{
                        [&](const Uniform& u) { return join("uniform", {u.a, u.b}); },
                        [&](const TruncatedNormal& t) { return join("tnorm", {t.center, t.sd, t.a, t.b}); },
                        [&](const Triangular& t) { return join("tri", {t.a, t.peak, t.b}); },
                        [&](const BimodalMixture& m) {
                          return join("bimodal", {m.first.center, m.first.sd, m.second.center, m.second.sd,
                                                  m.weight, m.first.a, m.first.b});
                        },
                        [&](const ScaledBeta& s) { return join("beta", {s.alpha, s.beta, s.a, s.b}); },
                    },
                    d.variant());
}

// --- CompetenceDistribution -------------------------------------------------

CompetenceDistribution::CompetenceDistribution(Variant v) : variant_(std::move(v)) {
  std::visit(overloaded{
                 [](const UniformOn& u) { require(u.a > 0.0 && u.a <= 1.0, "UniformOn needs 0 < a <= 1"); },
                 [](const TruncatedNormalOn& t) {
                   require(t.sigma > 0.0, "TruncatedNormalOn needs sigma > 0");
                   detail::NormalPiece probe;
                   probe.init({t.mu, t.sigma, 0.0, 1.0});
                 },
                 [](const PointMassAt& m) { require(m.p >= 0.0 && m.p <= 1.0, "PointMassAt needs p in [0,1]"); },
             },
             variant_);
}

namespace {
detail::NormalPiece competence_piece(const TruncatedNormalOn& t) {
  detail::NormalPiece piece;
  piece.init({t.mu, t.sigma, 0.0, 1.0});
  return piece;
}
}  // namespace

double CompetenceDistribution::mean() const {
  return std::visit(overloaded{
                        [](const UniformOn& u) { return 0.5 * u.a; },
                        [](const TruncatedNormalOn& t) {
                          return distribution_mean(DistributionSpec(TruncatedNormal{t.mu, t.sigma, 0.0, 1.0}));
                        },
                        [](const PointMassAt& m) { return m.p; },
                    },
                    variant_);
}

double CompetenceDistribution::median() const {
  return std::visit(overloaded{
                        [](const UniformOn& u) { return 0.5 * u.a; },
                        [](const TruncatedNormalOn& t) { return competence_piece(t).inverse(0.5); },
                        [](const PointMassAt& m) { return m.p; },
                    },
                    variant_);
}

double CompetenceDistribution::cdf(double p) const {
  return std::visit(overloaded{
                        [&](const UniformOn& u) { return std::clamp(p / u.a, 0.0, 1.0); },
                        [&](const TruncatedNormalOn& t) { return competence_piece(t).cdf(p); },
                        [&](const PointMassAt& m) { return p >= m.p ? 1.0 : 0.0; },
                    },
                    variant_);
}

double CompetenceDistribution::draw(Stream& rng) const {
  return std::visit(overloaded{
                        [&](const UniformOn& u) { return u.a * rng.uniform(); },
                        [&](const TruncatedNormalOn& t) { return competence_piece(t).inverse(rng.uniform_open()); },
                        [&](const PointMassAt& m) { return m.p; },
                    },
                    variant_);
}

Eigen::VectorXd CompetenceDistribution::sample(Eigen::Index n, Stream& rng) const {
  Eigen::VectorXd out(n);
  if (const auto* t = std::get_if<TruncatedNormalOn>(&variant_)) {
    const auto piece = competence_piece(*t);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = piece.inverse(rng.uniform_open());
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) out[i] = draw(rng);
  return out;
}

CompetenceDistribution parse_competence(std::string_view literal) {
  const auto parts = text::split(literal, ',');
  if (parts.empty()) throw std::invalid_argument("empty competence literal");
  const auto family = parts[0];
  if (family == "uniform" && parts.size() == 2) return UniformOn{text::to_double(parts[1])};
  if (family == "tnorm" && parts.size() == 3)
    return TruncatedNormalOn{text::to_double(parts[1]), text::to_double(parts[2])};
  if (family == "point" && parts.size() == 2) return PointMassAt{text::to_double(parts[1])};
  throw std::invalid_argument("bad competence literal: " + std::string(literal));
}

std::string to_literal(const CompetenceDistribution& h) {
  using text::format_double;
  return std::visit(overloaded{
                        [](const UniformOn& u) { return "uniform," + format_double(u.a); },
                        [](const TruncatedNormalOn& t) {
                          return "tnorm," + format_double(t.mu) + "," + format_double(t.sigma);
                        },
                        [](const PointMassAt& m) { return "point," + format_double(m.p); },
                    },
                    h.variant());
}

}  // namespace proxyvote
