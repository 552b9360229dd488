#include "fixcalc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "fixcalc/error.hpp"
#include "fixcalc/parameter_algebra.hpp"
#include "fixcalc/solver.hpp"

namespace fixcalc {

namespace {

using LD = long double;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(index)));
}

bool worse(const Witness& a, const Witness& b) {
  if (a.slack != b.slack) return a.slack < b.slack;
  return a.index < b.index;
}

void keep_worst(std::vector<Witness>& list, Witness w) {
  auto pos = std::lower_bound(list.begin(), list.end(), w, worse);
  if (static_cast<std::size_t>(pos - list.begin()) >= kMaxWitnesses) return;
  list.insert(pos, std::move(w));
  if (list.size() > kMaxWitnesses) list.pop_back();
}

Point hyperplane_relaxed(double lambda, const Point& normal, double offset, const Point& x) {
  const double t = (inner(normal, x) - offset) / norm_sq(normal);
  return x - (lambda * t) * normal;
}

}  // namespace

std::string_view to_string(PropertyKind kind) noexcept {
  switch (kind) {
    case PropertyKind::NE: return "NE";
    case PropertyKind::FNE: return "FNE";
    case PropertyKind::RFNE: return "RFNE";
    case PropertyKind::SPC: return "SPC";
    case PropertyKind::Cutter: return "Cutter";
    case PropertyKind::RelaxedCutter: return "RelaxedCutter";
    case PropertyKind::Demicontraction: return "Demicontraction";
    case PropertyKind::GeneralizedRelaxedCutter: return "GeneralizedRelaxedCutter";
  }
  return "?";
}

bool needs_fixed_points(PropertyKind kind) noexcept {
  switch (kind) {
    case PropertyKind::Cutter:
    case PropertyKind::RelaxedCutter:
    case PropertyKind::Demicontraction:
    case PropertyKind::GeneralizedRelaxedCutter: return true;
    default: return false;
  }
}

std::string_view to_string(Verdict verdict) noexcept {
  return verdict == Verdict::PassedSampling ? "PassedSampling" : "ViolationFound";
}

PropertyClaim PropertyClaim::from(const ClassCertificate& cert) {
  switch (cert.kind()) {
    case CertKind::NE: return {PropertyKind::NE, 0.0, {}};
    case CertKind::FNE: return {PropertyKind::FNE, 0.0, {}};
    case CertKind::Cutter: return {PropertyKind::Cutter, 0.0, {}};
    case CertKind::RFNE: return {PropertyKind::RFNE, cert.parameter(), {}};
    case CertKind::SPC: return {PropertyKind::SPC, cert.parameter(), {}};
    case CertKind::RelaxedCutter: return {PropertyKind::RelaxedCutter, cert.parameter(), {}};
    case CertKind::Demicontraction: return {PropertyKind::Demicontraction, cert.parameter(), {}};
  }
  throw Error(ErrorKind::InvalidArgument, "unknown certificate kind");
}

PropertyClaim PropertyClaim::generalized(RelaxationFn tau) {
  if (!tau) throw Error(ErrorKind::InvalidArgument, "generalized claim needs a relaxation function");
  return {PropertyKind::GeneralizedRelaxedCutter, 0.0, std::move(tau)};
}

std::string PropertyClaim::to_string() const {
  std::string s(fixcalc::to_string(kind));
  switch (kind) {
    case PropertyKind::RFNE:
    case PropertyKind::SPC:
    case PropertyKind::RelaxedCutter:
    case PropertyKind::Demicontraction: s += "(" + num(parameter) + ")"; break;
    case PropertyKind::GeneralizedRelaxedCutter: s += "(tau)"; break;
    default: break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(std::size_t dim, std::vector<Point> anchors, std::vector<double> radii)
    : dim_(dim), anchors_(std::move(anchors)), radii_(std::move(radii)) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "sampler dimension must be >= 1");
  if (anchors_.empty()) anchors_.push_back(Point::zeros(dim_));
  if (radii_.empty()) throw Error(ErrorKind::InvalidArgument, "sampler needs at least one radius");
  for (const auto& a : anchors_) require_same_dim(dim_, a.dim(), "sampler anchor");
  for (double r : radii_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidArgument, "sampler radii must be positive");
  }
}

Sampler Sampler::around(const std::vector<PrimitiveSet>& sets, std::vector<double> radii) {
  if (sets.empty()) throw Error(ErrorKind::InvalidArgument, "Sampler::around needs at least one set");
  const std::size_t dim = sets.front().dim();
  std::vector<Point> anchors;
  for (const auto& s : sets) {
    require_same_dim(dim, s.dim(), "sampler set");
    const Point a = s.anchor();
    anchors.push_back(a);
    // A boundary point: project a point displaced from the anchor.
    Point off = a;
    off.mutable_coords()[0] += 1e3;
    anchors.push_back(s.project(off));
  }
  return Sampler(dim, std::move(anchors), std::move(radii));
}

Point Sampler::draw(std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::size_t> pick_anchor(0, anchors_.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_radius(0, radii_.size() - 1);
  const Point& a = anchors_[pick_anchor(rng)];
  const double r = radii_[pick_radius(rng)];
  return a + r * random_normal(dim_, rng);
}

Point Sampler::draw_partner(const Point& x, std::mt19937_64& rng) const {
  std::bernoulli_distribution independent(0.5);
  if (independent(rng)) return draw(rng);
  std::uniform_int_distribution<std::size_t> pick_radius(0, radii_.size() - 1);
  const double r = radii_[pick_radius(rng)];
  return x + r * random_normal(dim_, rng);
}

// ---------------------------------------------------------------------------
// Slacks, accumulated in extended precision with every sum of squares formed
// before the final subtraction.

double pair_slack(const OperatorHandle& t, const PropertyClaim& claim, const Point& x, const Point& y) {
  if (needs_fixed_points(claim.kind)) {
    throw Error(ErrorKind::InvalidArgument, "pair_slack called for fixed-point class " + claim.to_string());
  }
  const Point tx = t(x);
  const Point ty = t(y);
  LD xy2 = 0, txy2 = 0, d2 = 0, txy_xy = 0, yx_d = 0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const LD dx = static_cast<LD>(x[i]) - y[i];
    const LD dt = static_cast<LD>(tx[i]) - ty[i];
    const LD d = (static_cast<LD>(tx[i]) - x[i]) - (static_cast<LD>(ty[i]) - y[i]);
    xy2 += dx * dx;
    txy2 += dt * dt;
    d2 += d * d;
    txy_xy += dt * dx;
    yx_d += -dx * d;
  }
  LD slack = 0;
  switch (claim.kind) {
    case PropertyKind::NE: slack = xy2 - txy2; break;
    case PropertyKind::FNE: slack = txy_xy - txy2; break;
    case PropertyKind::RFNE: slack = yx_d - d2 / static_cast<LD>(claim.parameter); break;
    case PropertyKind::SPC: slack = (xy2 + static_cast<LD>(claim.parameter) * d2) - txy2; break;
    default: break;
  }
  return static_cast<double>(slack);
}

double fixed_point_slack(const OperatorHandle& t, const PropertyClaim& claim, const Point& x, const Point& z) {
  if (!needs_fixed_points(claim.kind)) {
    throw Error(ErrorKind::InvalidArgument, "fixed_point_slack called for pair class " + claim.to_string());
  }
  const Point tx = t(x);
  LD r2 = 0, zx_r = 0, xz2 = 0, txz2 = 0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const LD r = static_cast<LD>(tx[i]) - x[i];
    const LD zx = static_cast<LD>(z[i]) - x[i];
    const LD txz = static_cast<LD>(tx[i]) - z[i];
    r2 += r * r;
    zx_r += zx * r;
    xz2 += zx * zx;
    txz2 += txz * txz;
  }
  LD slack = 0;
  switch (claim.kind) {
    case PropertyKind::Cutter: slack = zx_r - r2; break;
    case PropertyKind::RelaxedCutter: slack = static_cast<LD>(claim.parameter) * zx_r - r2; break;
    case PropertyKind::Demicontraction: slack = (xz2 + static_cast<LD>(claim.parameter) * r2) - txz2; break;
    case PropertyKind::GeneralizedRelaxedCutter: slack = static_cast<LD>(claim.tau(x)) * zx_r - r2; break;
    default: break;
  }
  return static_cast<double>(slack);
}

double reevaluate(const OperatorHandle& t, const PropertyClaim& claim, const Witness& w) {
  if (needs_fixed_points(claim.kind)) {
    if (!w.z) throw Error(ErrorKind::InvalidArgument, "witness has no fixed point");
    return fixed_point_slack(t, claim, w.x, *w.z);
  }
  if (!w.y) throw Error(ErrorKind::InvalidArgument, "witness has no partner point");
  return pair_slack(t, claim, w.x, *w.y);
}

CheckReport check_property(const OperatorHandle& t, const PropertyClaim& claim, const Sampler& sampler,
                           const std::vector<Point>& fix_points, std::size_t n, std::uint64_t seed,
                           std::size_t threads, double tol) {
  require_same_dim(t.dim(), sampler.dim(), "check_property sampler");
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "check_property needs at least one sample");
  const bool fixed_class = needs_fixed_points(claim.kind);
  if (fixed_class && fix_points.empty()) {
    throw Error(ErrorKind::MissingFixedPoints, claim.to_string() + " needs at least one fixed point");
  }
  for (const auto& z : fix_points) require_same_dim(t.dim(), z.dim(), "check_property fixed point");
  if (claim.kind == PropertyKind::GeneralizedRelaxedCutter && !claim.tau) {
    throw Error(ErrorKind::InvalidArgument, "generalized claim needs a relaxation function");
  }

  auto evaluate = [&](std::size_t i) {
    std::mt19937_64 rng = sample_rng(seed, i);
    Point x = sampler.draw(rng);
    if (fixed_class) {
      Witness w{i, x, std::nullopt, fix_points.front(), fixed_point_slack(t, claim, x, fix_points.front())};
      for (std::size_t j = 1; j < fix_points.size(); ++j) {
        const double s = fixed_point_slack(t, claim, x, fix_points[j]);
        if (s < w.slack) {
          w.slack = s;
          w.z = fix_points[j];
        }
      }
      return w;
    }
    Point y = sampler.draw_partner(x, rng);
    const double s = pair_slack(t, claim, x, y);
    return Witness{i, std::move(x), std::move(y), std::nullopt, s};
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::vector<std::vector<Witness>> partial(threads);
  std::vector<std::exception_ptr> failures(threads);
  auto work = [&](std::size_t c) {
    try {
      for (std::size_t i = c; i < n; i += threads) keep_worst(partial[c], evaluate(i));
    } catch (...) {
      failures[c] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t c = 0; c < threads; ++c) pool.emplace_back(work, c);
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  CheckReport report;
  report.property = claim.to_string();
  report.samples = n;
  report.tol = tol;
  for (auto& part : partial) {
    for (auto& w : part) keep_worst(report.witnesses, std::move(w));
  }
  report.worst_slack = report.witnesses.front().slack;
  report.verdict = report.worst_slack < -tol ? Verdict::ViolationFound : Verdict::PassedSampling;
  return report;
}

CheckReport check_class(const OperatorHandle& t, const ClassCertificate& claim, const Sampler& sampler,
                        const std::vector<Point>& fix_points, std::size_t n, std::uint64_t seed, std::size_t threads,
                        double tol) {
  return check_property(t, PropertyClaim::from(claim), sampler, fix_points, n, seed, threads, tol);
}

// ---------------------------------------------------------------------------
// Sharpness

namespace {

struct SharpnessParams {
  double c;
  double nu;
};

SharpnessParams require_sharpness_range(double lambda, double mu, double rho, bool allow_nu) {
  if (!(lambda > 0.0 && mu > 0.0)) throw Error(ErrorKind::PreconditionViolated, "lambda and mu must be positive");
  const CompositionVerdict v = nu_star(lambda, mu);
  if (!v.certified) {
    throw Error(ErrorKind::PreconditionViolated, "needs lambda*mu < 4, got " + num(lambda * mu));
  }
  const double c = lambda + mu - lambda * mu;
  const double nu = *v.nu_star;
  const bool upper_ok = allow_nu ? rho <= nu * (1.0 + 1e-12) : rho < nu;
  if (!(rho > c) || !upper_ok) {
    throw Error(ErrorKind::PreconditionViolated, "rho = " + num(rho) + " must lie in (" + num(c) + ", " + num(nu) +
                                                     (allow_nu ? "]" : ")"));
  }
  return {c, nu};
}

}  // namespace

double optimality_h(double lambda, double mu, double rho) {
  const double c = require_sharpness_range(lambda, mu, rho, true).c;
  const double q = rho * (2.0 - lambda) - 2.0 * c;
  return -mu * mu / (4.0 * c) * q * q / (rho - c) + mu * rho - mu * mu;
}

double sharpness_xi(double lambda, double mu, double rho) {
  const double c = require_sharpness_range(lambda, mu, rho, true).c;
  return -(rho * (2.0 - lambda) - 2.0 * c) * mu / (2.0 * c * (rho - c));
}

double sharpness_slack(double lambda, double mu, double rho, double k, const Point& x) {
  require_same_dim(2, x.dim(), "sharpness point");
  const Point h_normal{0.0, 1.0};
  const Point hk_normal{1.0, -k};
  const Point tx = hyperplane_relaxed(lambda, h_normal, 0.0, x);
  const Point utx = hyperplane_relaxed(mu, hk_normal, k, tx);
  const LD r0 = static_cast<LD>(utx[0]) - x[0];
  const LD r1 = static_cast<LD>(utx[1]) - x[1];
  const LD zx0 = static_cast<LD>(k) - x[0];
  const LD zx1 = -static_cast<LD>(x[1]);
  return static_cast<double>(static_cast<LD>(rho) * (zx0 * r0 + zx1 * r1) - (r0 * r0 + r1 * r1));
}

SharpnessWitness sharpness_witness(double lambda, double mu, double rho, std::uint64_t k_max) {
  require_sharpness_range(lambda, mu, rho, false);
  const double xi = sharpness_xi(lambda, mu, rho);
  const double h = optimality_h(lambda, mu, rho);
  const Point x{0.0, xi};
  for (std::uint64_t k = 1; k <= k_max; k *= 2) {
    const double s = sharpness_slack(lambda, mu, rho, static_cast<double>(k), x);
    if (s < 0.0) return SharpnessWitness{k, x, s, h};
  }
  throw Error(ErrorKind::NotFound, "no k <= " + std::to_string(k_max) + " gives a negative slack at rho = " + num(rho) +
                                       "; limiting value h(rho) = " + num(h));
}

NotRelaxedCutterWitness not_relaxed_cutter_witness(double lambda, double mu, std::uint64_t k_max) {
  if (!(lambda > 0.0 && mu > 0.0)) throw Error(ErrorKind::PreconditionViolated, "lambda and mu must be positive");
  const double p = lambda * mu;
  const double c = lambda + mu - p;
  if (!(p > 4.0)) throw Error(ErrorKind::PreconditionViolated, "needs lambda*mu > 4, got " + num(p));
  const Point h_normal{0.0, 1.0};

  if (c < 0.0) {
    // Both operators relax the projection onto H = {x2 = 0}.
    const Point x{0.0, 1.0};
    const Point z{0.0, 0.0};
    const Point utx = hyperplane_relaxed(mu, h_normal, 0.0, hyperplane_relaxed(lambda, h_normal, 0.0, x));
    return NotRelaxedCutterWitness{'b', std::nullopt, x, z, inner(z - x, utx - x)};
  }

  // Limit of <z_k - x, U_k T x - x> is c xi^2 + (2 - lambda) mu xi + mu.
  double xi;
  if (c > 0.0) {
    xi = (lambda - 2.0) * mu / (2.0 * c);
  } else {
    xi = -2.0 / (2.0 - lambda);
  }
  const Point x{0.0, xi};
  for (std::uint64_t k = 1; k <= k_max; k *= 2) {
    const double kd = static_cast<double>(k);
    const Point z{kd, 0.0};
    const Point utx =
        hyperplane_relaxed(mu, Point{1.0, -kd}, kd, hyperplane_relaxed(lambda, h_normal, 0.0, x));
    const double in = inner(z - x, utx - x);
    if (in < 0.0) return NotRelaxedCutterWitness{'a', k, x, z, in};
  }
  throw Error(ErrorKind::NotFound, "no k <= " + std::to_string(k_max) + " gives a negative inner product");
}

FixCollapseWitness fix_collapse_witness(double lambda, double mu, std::size_t dim, std::size_t samples,
                                        std::uint64_t seed) {
  if (!(lambda > 0.0 && mu > 0.0)) throw Error(ErrorKind::PreconditionViolated, "lambda and mu must be positive");
  if (!(lambda + mu <= lambda * mu)) {
    throw Error(ErrorKind::PreconditionViolated,
                "needs lambda + mu <= lambda*mu, got lambda=" + num(lambda) + ", mu=" + num(mu));
  }
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  const double sigma = lambda / (mu * (lambda - 1.0));
  const PrimitiveSet h = PrimitiveSet::hyperplane(Point::unit(dim, dim - 1), 0.0);
  const OperatorHandle t = relax(projection(h), lambda);
  const OperatorHandle u = relax(projection(h), sigma * mu);

  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const Point x = random_normal(dim, rng);
    worst = std::max(worst, norm(u(t(x)) - x));
  }
  const Point x = Point::unit(dim, dim - 1);
  worst = std::max(worst, norm(u(t(x)) - x));
  return FixCollapseWitness{t, u, sigma, x, worst, worst <= 1e-12};
}

FixVReport fixv_characterization(const PrimitiveSet& a, const PrimitiveSet& b, double lambda, double mu,
                                 std::size_t iters) {
  if (!a.is_affine() || !b.is_affine()) {
    throw Error(ErrorKind::InvalidArgument, "fixv_characterization supports hyperplanes only, got " + a.describe() +
                                                " and " + b.describe());
  }
  require_same_dim(a.dim(), b.dim(), "fixv sets");
  if (!(lambda > 0.0 && mu > 0.0)) throw Error(ErrorKind::PreconditionViolated, "lambda and mu must be positive");
  const auto& ha = std::get<Hyperplane>(a.shape());
  const auto& hb = std::get<Hyperplane>(b.shape());

  const double na = norm(ha.normal);
  const double nb = norm(hb.normal);
  const bool parallel = std::abs(inner(ha.normal, hb.normal)) >= (1.0 - 1e-12) * na * nb;
  const Point a0 = a.anchor();
  const Point b0 = b.project(a0);
  const bool intersect = !parallel || distance(a0, b0) <= 1e-12 * (1.0 + norm(a0));

  const OperatorHandle v = compose(relax(projection(b), mu), relax(projection(a), lambda));
  const double c = lambda + mu - lambda * mu;

  FixVReport report{};
  report.sum_equals_product = std::abs(c) <= 1e-12 * std::max(1.0, lambda * mu);
  report.sets_intersect = intersect;

  if (!report.sum_equals_product && parallel && !intersect) {
    const Point x = (1.0 / c) * (lambda * a0 + mu * b0 - (lambda * mu) * a0);
    report.fixed_point = x;
    report.residual = norm(v(x) - x);
    report.fixed_point_found = report.residual <= 1e-12;
    report.consistent = report.fixed_point_found;
    return report;
  }

  // Iterate the averaged operator: it has the same fixed points as V.
  const OperatorHandle averaged = relax(v, 0.5);
  StoppingRule stop;
  stop.residual_tol = 1e-12;
  stop.max_iters = iters;
  std::vector<double> ones(a.dim(), 1.0);
  const IterationTrace trace = iterate(averaged, StepRule{}, stop, a0 + Point(ones));
  for (const auto& row : trace.rows) report.residuals.push_back(row.residual);
  report.residual = trace.last().residual;
  report.fixed_point_found = trace.status == RunStatus::Converged;
  if (report.fixed_point_found) {
    report.fixed_point = trace.last().x;
    if (intersect) report.projected = a.project(trace.last().x);
  }
  report.consistent = report.sum_equals_product ? report.fixed_point_found == intersect : report.fixed_point_found;
  return report;
}

}  // namespace fixcalc
