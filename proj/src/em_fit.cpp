#include "lanecluster/em_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lanecluster/errors.hpp"
#include "lanecluster/rng.hpp"

namespace lanecluster {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFreezeWeight = 1e-8;   // below this a curve keeps its old fit
constexpr double kRidge = 1e-9;          // fallback damping for a singular refit

void bernstein(double t, double b[3]) {
  const double s = 1.0 - t;
  b[0] = s * s;
  b[1] = 2.0 * t * s;
  b[2] = t * t;
}

// Per-point log weights: k curve components then the outlier component.
// Returns the row max so callers can log-sum-exp without recomputing it.
double log_weight_row(const Vec2& point, const std::vector<BezierCurve>& curves,
                      const std::vector<double>& mixing, const EmConfig& config,
                      std::vector<double>& out) {
  const double log_norm = -std::log(2.0 * kPi * config.sigma * config.sigma);
  const double inv_two_var = 1.0 / (2.0 * config.sigma * config.sigma);
  out.resize(curves.size() + 1);
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curves.size(); ++i) {
    double lw = -std::numeric_limits<double>::infinity();
    if (mixing[i] > 0.0) {
      const double d = closest_point(curves[i], point).distance;
      lw = std::log(mixing[i]) + log_norm - d * d * inv_two_var;
    }
    out[i] = lw;
    mx = std::max(mx, lw);
  }
  const double pi_out = mixing[curves.size()];
  double lw = -std::numeric_limits<double>::infinity();
  if (pi_out > 0.0 && config.outlier_density > 0.0)
    lw = std::log(pi_out) + std::log(config.outlier_density);
  out[curves.size()] = lw;
  mx = std::max(mx, lw);
  return mx;
}

// Solves G x = r for a symmetric 3x3 system via partial pivoting.
// Returns false when a pivot degenerates, leaving x untouched.
bool solve3(double G[3][3], const double r[3], double x[3]) {
  double a[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = G[i][j];
    a[i][3] = r[i];
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::fabs(a[row][col]) > std::fabs(a[piv][col])) piv = row;
    if (std::fabs(a[piv][col]) < 1e-12) return false;
    if (piv != col)
      for (int j = col; j < 4; ++j) std::swap(a[piv][j], a[col][j]);
    for (int row = col + 1; row < 3; ++row) {
      const double f = a[row][col] / a[col][col];
      for (int j = col; j < 4; ++j) a[row][j] -= f * a[col][j];
    }
  }
  for (int i = 2; i >= 0; --i) {
    double s = a[i][3];
    for (int j = i + 1; j < 3; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

// One weighted least-squares refit of a single curve against fixed
// projection parameters. The parameters are re-spread affinely onto [0, 1]
// before the solve; a quadratic Bezier is closed under that map, and without
// it the parameters compress toward one end over EM iterations until the
// Gram matrix degenerates and the control points blow up. Returns the old
// curve when the system is degenerate even after ridge damping, or when the
// refit collapses.
BezierCurve refit_curve(const BezierCurve& curve, const std::vector<Vec2>& points,
                        const std::vector<double>& weights) {
  std::vector<double> params(points.size(), 0.0);
  double t_lo = std::numeric_limits<double>::infinity();
  double t_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    params[j] = closest_point(curve, points[j]).t;
    t_lo = std::min(t_lo, params[j]);
    t_hi = std::max(t_hi, params[j]);
  }
  if (!(t_hi - t_lo > 1e-9)) return curve;
  double G[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  double rx[3] = {0, 0, 0};
  double rz[3] = {0, 0, 0};
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double w = weights[j];
    if (w <= 0.0) continue;
    const double t = (params[j] - t_lo) / (t_hi - t_lo);
    double b[3];
    bernstein(t, b);
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) G[k][l] += w * b[k] * b[l];
      rx[k] += w * b[k] * points[j].x;
      rz[k] += w * b[k] * points[j].z;
    }
  }
  double px[3], pz[3];
  bool ok = solve3(G, rx, px) && solve3(G, rz, pz);
  if (!ok) {
    for (int k = 0; k < 3; ++k) G[k][k] += kRidge;
    ok = solve3(G, rx, px) && solve3(G, rz, pz);
  }
  if (!ok) return curve;
  const Vec2 p0{px[0], pz[0]}, p1{px[1], pz[1]}, p2{px[2], pz[2]};
  if (norm(p0 - p2) < 1e-9 && norm(p0 - p1) < 1e-9) return curve;
  return BezierCurve{p0, p1, p2};
}

// Principal direction of a point cloud via the 2x2 covariance eigenvector.
Vec2 principal_direction(const std::vector<Vec2>& pts) {
  Vec2 mean{0.0, 0.0};
  for (const Vec2& p : pts) mean = mean + p;
  mean = mean * (1.0 / static_cast<double>(pts.size()));
  double cxx = 0.0, cxz = 0.0, czz = 0.0;
  for (const Vec2& p : pts) {
    const Vec2 d = p - mean;
    cxx += d.x * d.x;
    cxz += d.x * d.z;
    czz += d.z * d.z;
  }
  const double tr = cxx + czz;
  const double det = cxx * czz - cxz * cxz;
  const double disc = std::max(0.0, tr * tr / 4.0 - det);
  const double lambda = tr / 2.0 + std::sqrt(disc);
  Vec2 dir{cxz, lambda - cxx};
  if (norm(dir) < 1e-12) dir = (cxx >= czz) ? Vec2{1.0, 0.0} : Vec2{0.0, 1.0};
  return dir * (1.0 / norm(dir));
}

struct SeedLine {
  Vec2 point;
  Vec2 dir;  // unit
};

double line_distance(const SeedLine& line, const Vec2& p) {
  const Vec2 d = p - line.point;
  return std::fabs(line.dir.x * d.z - line.dir.z * d.x);
}

// Distance at which the uniform outlier density overtakes an equal-mixing
// Gaussian component. Points beyond it are the outlier component's to claim,
// so seeding stops chasing them.
double outlier_takeover(const EmConfig& config) {
  if (config.outlier_density <= 0.0) return std::numeric_limits<double>::infinity();
  const double arg =
      1.0 / (2.0 * kPi * config.sigma * config.sigma * config.outlier_density);
  if (arg <= 1.0) return config.sigma;
  return std::max(config.sigma, config.sigma * std::sqrt(2.0 * std::log(arg)));
}

// Straight curve through `anchor` along `dir`, long enough to cover every
// point's projection (at least 2 m so the curve never collapses).
BezierCurve line_curve(const std::vector<Vec2>& points, Vec2 anchor, Vec2 dir) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Vec2& p : points) {
    const double s = dot(p - anchor, dir);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  if (hi - lo < 2.0) {
    const double pad = (2.0 - (hi - lo)) / 2.0;
    lo -= pad;
    hi += pad;
  }
  const Vec2 a = anchor + lo * dir;
  const Vec2 b = anchor + hi * dir;
  return BezierCurve{a, 0.5 * (a + b), b};
}

// Seeding: k-means++ draws proportional to the squared distance from the
// existing seed lines, then a few hard reassignment rounds re-anchoring each
// line at its cluster mean. Lines all share the cloud's principal direction,
// so parallel lanes repel new seeds laterally no matter where along a lane
// the seeds sit; a line left without points respawns at the point farthest
// from the others. Distances are capped at the outlier takeover radius so an
// isolated point cannot monopolize the draw or drag an anchor. Full-length
// lines matter: a short stub would push its own lane's distant points onto
// the outlier component in the first E-step.
std::vector<BezierCurve> initial_curves(const std::vector<Vec2>& points,
                                        const EmConfig& config) {
  SeededRng rng(config.seed);
  const std::size_t n = points.size();
  const Vec2 dir = principal_direction(points);
  const double cap = outlier_takeover(config);
  std::vector<SeedLine> lines;
  lines.push_back({points[rng.index(n)], dir});
  std::vector<double> d2(n);
  while (lines.size() < config.k) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double best = std::numeric_limits<double>::infinity();
      for (const SeedLine& line : lines)
        best = std::min(best, line_distance(line, points[j]));
      best = std::min(best, cap);
      d2[j] = best * best;
      total += d2[j];
    }
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += d2[j];
        if (acc >= target) {
          pick = j;
          break;
        }
      }
    }
    lines.push_back({points[pick], dir});
  }
  // owner == lines.size() marks a point past the cap from every line; those
  // stay out of the anchor means.
  std::vector<std::size_t> owner(n);
  for (int round = 0; round < 3; ++round) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = lines.size();
      for (std::size_t i = 0; i < lines.size(); ++i) {
        const double d = line_distance(lines[i], points[j]);
        if (d < best) {
          best = d;
          arg = i;
        }
      }
      owner[j] = best <= cap ? arg : lines.size();
    }
    for (std::size_t i = 0; i < lines.size(); ++i) {
      Vec2 sum{0.0, 0.0};
      std::size_t cnt = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (owner[j] == i) {
          sum = sum + points[j];
          ++cnt;
        }
      }
      if (cnt == 0) {
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
          double nearest = std::numeric_limits<double>::infinity();
          for (std::size_t l = 0; l < lines.size(); ++l)
            if (l != i) nearest = std::min(nearest, line_distance(lines[l], points[j]));
          nearest = std::min(nearest, cap);
          if (nearest > far_d) {
            far_d = nearest;
            far = j;
          }
        }
        lines[i].point = points[far];
      } else {
        lines[i].point = sum * (1.0 / static_cast<double>(cnt));
      }
    }
  }
  std::vector<BezierCurve> curves;
  curves.reserve(config.k);
  for (const SeedLine& line : lines) curves.push_back(line_curve(points, line.point, line.dir));
  return curves;
}

}  // namespace

void EmConfig::validate() const {
  if (k < 1) throw std::invalid_argument("EmConfig: k must be at least 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("EmConfig: sigma must be positive and finite");
  if (!(outlier_density >= 0.0) || !std::isfinite(outlier_density))
    throw std::invalid_argument("EmConfig: outlier_density must be non-negative");
  if (!(tol > 0.0)) throw std::invalid_argument("EmConfig: tol must be positive");
}

MembershipMatrix e_step(const std::vector<Vec2>& points,
                        const std::vector<BezierCurve>& curves,
                        const std::vector<double>& mixing, const EmConfig& config) {
  config.validate();
  if (mixing.size() != curves.size() + 1)
    throw std::invalid_argument("e_step: mixing must have one weight per curve plus outlier");
  MembershipMatrix resp(points.size(), curves.size() + 1);
  std::vector<double> lw;
  for (std::size_t j = 0; j < points.size(); ++j) {
    const double mx = log_weight_row(points[j], curves, mixing, config, lw);
    if (!std::isfinite(mx))
      throw NumericalError("e_step: point has zero density under every component");
    double sum = 0.0;
    for (double v : lw) sum += std::exp(v - mx);
    for (std::size_t c = 0; c < lw.size(); ++c)
      resp(j, c) = std::exp(lw[c] - mx) / sum;
  }
  return resp;
}

std::pair<std::vector<BezierCurve>, std::vector<double>> m_step(
    const std::vector<Vec2>& points, const MembershipMatrix& responsibilities,
    const std::vector<BezierCurve>& curves) {
  const std::size_t n = points.size();
  const std::size_t k = curves.size();
  if (responsibilities.rows != n || responsibilities.cols != k + 1)
    throw std::invalid_argument("m_step: responsibilities shape mismatch");
  std::vector<BezierCurve> out = curves;
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < k; ++i) {
    double wsum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      weights[j] = responsibilities(j, i);
      wsum += weights[j];
    }
    if (wsum < kFreezeWeight) continue;
    // Two project/refit rounds; the second reprojects against the refit
    // curve so the parameters track the moved control points.
    BezierCurve cur = curves[i];
    cur = refit_curve(cur, points, weights);
    cur = refit_curve(cur, points, weights);
    out[i] = cur;
  }
  std::vector<double> mixing(k + 1, 0.0);
  if (n > 0) {
    for (std::size_t c = 0; c <= k; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += responsibilities(j, c);
      mixing[c] = s / static_cast<double>(n);
    }
  }
  return {std::move(out), std::move(mixing)};
}

double log_likelihood(const std::vector<Vec2>& points,
                      const std::vector<BezierCurve>& curves,
                      const std::vector<double>& mixing, const EmConfig& config) {
  config.validate();
  if (mixing.size() != curves.size() + 1)
    throw std::invalid_argument("log_likelihood: mixing must have one weight per curve plus outlier");
  double ll = 0.0;
  std::vector<double> lw;
  for (const Vec2& p : points) {
    const double mx = log_weight_row(p, curves, mixing, config, lw);
    if (!std::isfinite(mx)) return -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double v : lw) sum += std::exp(v - mx);
    ll += mx + std::log(sum);
  }
  return ll;
}

EmState fit(const std::vector<Vec2>& points, const EmConfig& config,
            std::vector<EmTracePoint>* trace) {
  config.validate();
  if (points.size() < 3 * config.k)
    throw std::invalid_argument("fit: need at least 3k points to constrain k curves");
  for (const Vec2& p : points)
    if (!is_finite(p)) throw std::invalid_argument("fit: points must be finite");

  EmState state;
  state.curves = initial_curves(points, config);
  state.mixing.assign(config.k + 1, 1.0 / static_cast<double>(config.k + 1));

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
    MembershipMatrix resp = e_step(points, state.curves, state.mixing, config);
    auto [curves, mixing] = m_step(points, resp, state.curves);
    state.curves = std::move(curves);
    state.mixing = std::move(mixing);
    const double ll = log_likelihood(points, state.curves, state.mixing, config);
    const double delta = std::isfinite(prev_ll) ? ll - prev_ll : 0.0;
    if (trace) trace->push_back({iter, ll, delta});
    state.iterations = iter;
    if (iter > 1 && delta < -1e-6) ++state.monotonicity_violations;
    const bool converged = iter > 1 && std::fabs(delta) < config.tol;
    prev_ll = ll;
    if (converged) break;
  }
  state.log_likelihood = prev_ll;
  state.responsibilities = e_step(points, state.curves, state.mixing, config);
  return state;
}

}  // namespace lanecluster
