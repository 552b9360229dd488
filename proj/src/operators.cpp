#include "fixcalc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fixcalc/error.hpp"
#include "fixcalc/parameter_algebra.hpp"

namespace fixcalc {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// PrimitiveSet

PrimitiveSet PrimitiveSet::hyperplane(Point normal, double offset) {
  if (norm_sq(normal) == 0.0) throw Error(ErrorKind::InvalidArgument, "hyperplane normal must be nonzero");
  if (!std::isfinite(offset)) throw Error(ErrorKind::NonFinite, "hyperplane offset is not finite");
  return PrimitiveSet(Hyperplane{std::move(normal), offset});
}

PrimitiveSet PrimitiveSet::halfspace(Point normal, double offset) {
  if (norm_sq(normal) == 0.0) throw Error(ErrorKind::InvalidArgument, "halfspace normal must be nonzero");
  if (!std::isfinite(offset)) throw Error(ErrorKind::NonFinite, "halfspace offset is not finite");
  return PrimitiveSet(Halfspace{std::move(normal), offset});
}

PrimitiveSet PrimitiveSet::ball(Point center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorKind::InvalidArgument, "ball radius must be positive and finite");
  }
  return PrimitiveSet(Ball{std::move(center), radius});
}

PrimitiveSet PrimitiveSet::box(Point lower, Point upper) {
  require_same_dim(lower.dim(), upper.dim(), "box bounds");
  for (std::size_t i = 0; i < lower.dim(); ++i) {
    if (lower[i] > upper[i]) {
      throw Error(ErrorKind::InvalidArgument, "box lower bound exceeds upper bound at " + std::to_string(i));
    }
  }
  return PrimitiveSet(Box{std::move(lower), std::move(upper)});
}

std::size_t PrimitiveSet::dim() const noexcept {
  return std::visit(Overloaded{[](const Hyperplane& h) { return h.normal.dim(); },
                               [](const Halfspace& h) { return h.normal.dim(); },
                               [](const Ball& b) { return b.center.dim(); },
                               [](const Box& b) { return b.lower.dim(); }},
                    shape_);
}

Point PrimitiveSet::project(const Point& x) const {
  require_same_dim(dim(), x.dim(), "projection");
  return std::visit(
      Overloaded{[&](const Hyperplane& h) {
                   const double t = (inner(h.normal, x) - h.offset) / norm_sq(h.normal);
                   return x - t * h.normal;
                 },
                 [&](const Halfspace& h) {
                   const double excess = inner(h.normal, x) - h.offset;
                   if (excess <= 0.0) return x;
                   return x - (excess / norm_sq(h.normal)) * h.normal;
                 },
                 [&](const Ball& b) {
                   const Point d = x - b.center;
                   const double r = norm(d);
                   // The center itself lies inside, so r == 0 falls in this branch.
                   if (r <= b.radius) return x;
                   return b.center + (b.radius / r) * d;
                 },
                 [&](const Box& b) {
                   Point p = x;
                   auto c = p.mutable_coords();
                   for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::clamp(c[i], b.lower[i], b.upper[i]);
                   return p;
                 }},
      shape_);
}

bool PrimitiveSet::contains(const Point& x, double tol) const {
  require_same_dim(dim(), x.dim(), "set membership");
  return std::visit(
      Overloaded{[&](const Hyperplane& h) {
                   return std::abs(inner(h.normal, x) - h.offset) <= tol * norm(h.normal);
                 },
                 [&](const Halfspace& h) { return inner(h.normal, x) - h.offset <= tol * norm(h.normal); },
                 [&](const Ball& b) { return distance(x, b.center) <= b.radius + tol; },
                 [&](const Box& b) {
                   for (std::size_t i = 0; i < x.dim(); ++i) {
                     if (x[i] < b.lower[i] - tol || x[i] > b.upper[i] + tol) return false;
                   }
                   return true;
                 }},
      shape_);
}

Point PrimitiveSet::anchor() const {
  return std::visit(Overloaded{[](const Hyperplane& h) { return (h.offset / norm_sq(h.normal)) * h.normal; },
                               [](const Halfspace& h) { return (h.offset / norm_sq(h.normal)) * h.normal; },
                               [](const Ball& b) { return b.center; },
                               [](const Box& b) { return 0.5 * (b.lower + b.upper); }},
                    shape_);
}

std::string PrimitiveSet::describe() const {
  return std::visit(
      Overloaded{[](const Hyperplane& h) { return "hyperplane{<" + h.normal.to_string() + ",x> = " + fmt_double(h.offset) + "}"; },
                 [](const Halfspace& h) { return "halfspace{<" + h.normal.to_string() + ",x> <= " + fmt_double(h.offset) + "}"; },
                 [](const Ball& b) { return "ball{" + b.center.to_string() + ", r=" + fmt_double(b.radius) + "}"; },
                 [](const Box& b) { return "box{" + b.lower.to_string() + ", " + b.upper.to_string() + "}"; }},
      shape_);
}

Point project(const PrimitiveSet& set, const Point& x) { return set.project(x); }

// ---------------------------------------------------------------------------
// FixSet

FixSet::FixSet(std::size_t dim, std::vector<PrimitiveSet> sets) : dim_(dim), sets_(std::move(sets)) {
  if (dim == 0) throw Error(ErrorKind::InvalidArgument, "fixed set dimension must be >= 1");
  for (const auto& s : sets_) require_same_dim(dim_, s.dim(), "fixed set member");
}

bool FixSet::contains(const Point& x, double tol) const {
  require_same_dim(dim_, x.dim(), "fixed set membership");
  return std::all_of(sets_.begin(), sets_.end(), [&](const PrimitiveSet& s) { return s.contains(x, tol); });
}

std::optional<Point> FixSet::nearest(const Point& x, double tol, std::size_t max_sweeps) const {
  require_same_dim(dim_, x.dim(), "fixed set projection");
  if (sets_.empty()) return x;
  if (sets_.size() == 1) return sets_.front().project(x);
  Point cur = x;
  std::vector<Point> corrections(sets_.size(), Point::zeros(dim_));
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    const Point before = cur;
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      const Point shifted = cur + corrections[i];
      cur = sets_[i].project(shifted);
      corrections[i] = shifted - cur;
    }
    if (distance(before, cur) <= 1e-15 * (1.0 + norm(cur)) && contains(cur, tol)) return cur;
  }
  if (contains(cur, tol)) return cur;
  return std::nullopt;
}

FixSet FixSet::intersect(const FixSet& other) const {
  require_same_dim(dim_, other.dim_, "fixed set intersection");
  std::vector<PrimitiveSet> sets = sets_;
  sets.insert(sets.end(), other.sets_.begin(), other.sets_.end());
  return FixSet(dim_, std::move(sets));
}

// ---------------------------------------------------------------------------
// ClassCertificate

ClassCertificate ClassCertificate::rfne(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::InvalidArgument, "RFNE lambda must be > 0");
  return {CertKind::RFNE, lambda};
}

ClassCertificate ClassCertificate::spc(double alpha) {
  if (!(alpha < 1.0) || !std::isfinite(alpha)) throw Error(ErrorKind::InvalidArgument, "SPC alpha must be < 1");
  return {CertKind::SPC, alpha};
}

ClassCertificate ClassCertificate::relaxed_cutter(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "relaxed cutter lambda must be > 0");
  }
  return {CertKind::RelaxedCutter, lambda};
}

ClassCertificate ClassCertificate::demicontraction(double alpha) {
  if (!(alpha < 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::InvalidArgument, "demicontraction alpha must be < 1");
  }
  return {CertKind::Demicontraction, alpha};
}

bool ClassCertificate::is_pair_class() const noexcept {
  return kind_ == CertKind::NE || kind_ == CertKind::FNE || kind_ == CertKind::RFNE || kind_ == CertKind::SPC;
}

double ClassCertificate::relaxation() const {
  switch (kind_) {
    case CertKind::SPC:
    case CertKind::Demicontraction: return spc_to_rfne(param_);
    default: return param_;
  }
}

std::string ClassCertificate::to_string() const {
  switch (kind_) {
    case CertKind::NE: return "NE";
    case CertKind::FNE: return "FNE";
    case CertKind::Cutter: return "Cutter";
    case CertKind::RFNE: return "RFNE(" + fmt_double(param_) + ")";
    case CertKind::SPC: return "SPC(" + fmt_double(param_) + ")";
    case CertKind::RelaxedCutter: return "RelaxedCutter(" + fmt_double(param_) + ")";
    case CertKind::Demicontraction: return "Demicontraction(" + fmt_double(param_) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// OperatorHandle

OperatorHandle::OperatorHandle(std::size_t dim, EvalFn eval, std::string label,
                               std::optional<ClassCertificate> certificate, std::optional<FixSet> fix_set)
    : dim_(dim),
      eval_(std::make_shared<const EvalFn>(std::move(eval))),
      label_(std::move(label)),
      certificate_(std::move(certificate)),
      fix_set_(std::move(fix_set)) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "operator dimension must be >= 1");
  if (!*eval_) throw Error(ErrorKind::InvalidArgument, "operator needs an evaluator");
  if (fix_set_) require_same_dim(dim_, fix_set_->dim(), "operator fixed set");
}

Point OperatorHandle::operator()(const Point& x) const {
  require_same_dim(dim_, x.dim(), label_.c_str());
  return (*eval_)(x);
}

OperatorHandle OperatorHandle::with_certificate(std::optional<ClassCertificate> cert) const {
  OperatorHandle copy = *this;
  copy.certificate_ = std::move(cert);
  return copy;
}

OperatorHandle OperatorHandle::with_fix_set(std::optional<FixSet> fix) const {
  if (fix) require_same_dim(dim_, fix->dim(), "operator fixed set");
  OperatorHandle copy = *this;
  copy.fix_set_ = std::move(fix);
  return copy;
}

OperatorHandle OperatorHandle::with_label(std::string label) const {
  OperatorHandle copy = *this;
  copy.label_ = std::move(label);
  return copy;
}

OperatorHandle identity(std::size_t dim) {
  return OperatorHandle(dim, [](const Point& x) { return x; }, "Id", ClassCertificate::fne(),
                        FixSet::whole_space(dim));
}

OperatorHandle projection(const PrimitiveSet& set) {
  return OperatorHandle(set.dim(), [set](const Point& x) { return set.project(x); }, "P[" + set.describe() + "]",
                        ClassCertificate::fne(), FixSet(set.dim(), {set}));
}

namespace {

std::optional<ClassCertificate> relaxed_certificate(const std::optional<ClassCertificate>& cert, double mu) {
  if (!cert) return std::nullopt;
  if (mu == 1.0) return cert;
  switch (cert->kind()) {
    case CertKind::NE:
    case CertKind::FNE:
    case CertKind::RFNE: return ClassCertificate::rfne(cert->parameter() * mu);
    case CertKind::SPC: return ClassCertificate::spc(relax_demicontraction(cert->parameter(), mu));
    case CertKind::Cutter:
    case CertKind::RelaxedCutter: return ClassCertificate::relaxed_cutter(cert->parameter() * mu);
    case CertKind::Demicontraction:
      return ClassCertificate::demicontraction(relax_demicontraction(cert->parameter(), mu));
  }
  return std::nullopt;
}

}  // namespace

OperatorHandle relax(const OperatorHandle& t, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorKind::InvalidArgument, "relaxation parameter must be positive, got " + std::to_string(lambda));
  }
  auto eval = [t, lambda](const Point& x) {
    Point tx = t(x);
    tx -= x;
    tx *= lambda;
    tx += x;
    return tx;
  };
  return OperatorHandle(t.dim(), std::move(eval), "(" + t.label() + ")_" + fmt_double(lambda),
                        relaxed_certificate(t.certificate(), lambda), t.fix_set());
}

OperatorHandle generalized_relax(const OperatorHandle& t, RelaxationFn sigma) {
  if (!sigma) throw Error(ErrorKind::InvalidArgument, "relaxation function is empty");
  auto eval = [t, sigma = std::move(sigma)](const Point& x) {
    const double s = sigma(x);
    if (!std::isfinite(s)) {
      throw Error(ErrorKind::NonFinite, "relaxation function is not finite at " + x.to_string());
    }
    if (!(s > 0.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  "relaxation function value " + fmt_double(s) + " is not positive at " + x.to_string());
    }
    Point tx = t(x);
    tx -= x;
    tx *= s;
    tx += x;
    return tx;
  };
  return OperatorHandle(t.dim(), std::move(eval), "(" + t.label() + ")_sigma", std::nullopt, t.fix_set());
}

namespace {

std::optional<ClassCertificate> composed_certificate(const OperatorHandle& outer, const OperatorHandle& inner) {
  const auto& cu = outer.certificate();
  const auto& ct = inner.certificate();
  if (!cu || !ct) return std::nullopt;
  const double lambda = ct->relaxation();
  const double mu = cu->relaxation();
  const CompositionVerdict verdict = nu_star(lambda, mu);

  if (ct->is_pair_class() && cu->is_pair_class()) {
    if (verdict.certified) {
      if (ct->kind() == CertKind::SPC && cu->kind() == CertKind::SPC) {
        return ClassCertificate::spc(gamma_star(ct->parameter(), cu->parameter()));
      }
      return ClassCertificate::rfne(*verdict.nu_star);
    }
    // Both reflections-type (2-RFNE): nonexpansive maps compose to a nonexpansive map.
    if (lambda == 2.0 && mu == 2.0) return ClassCertificate::ne();
    return std::nullopt;
  }
  // Relaxed-cutter route: needs a common fixed point, so both fixed sets must be known.
  if (!verdict.certified || !outer.fix_set() || !inner.fix_set()) return std::nullopt;
  if (ct->kind() == CertKind::Demicontraction && cu->kind() == CertKind::Demicontraction) {
    return ClassCertificate::demicontraction(gamma_star(ct->parameter(), cu->parameter()));
  }
  return ClassCertificate::relaxed_cutter(*verdict.nu_star);
}

}  // namespace

OperatorHandle compose(const OperatorHandle& outer, const OperatorHandle& inner) {
  require_same_dim(outer.dim(), inner.dim(), "composition");
  std::optional<FixSet> fix;
  if (outer.fix_set() && inner.fix_set() && outer.certificate() && inner.certificate()) {
    const CompositionVerdict v = nu_star(inner.certificate()->relaxation(), outer.certificate()->relaxation());
    if (v.fix_intersection_ok) fix = inner.fix_set()->intersect(*outer.fix_set());
  }
  auto eval = [outer, inner](const Point& x) { return outer(inner(x)); };
  return OperatorHandle(inner.dim(), std::move(eval), outer.label() + " o " + inner.label(),
                        composed_certificate(outer, inner), std::move(fix));
}

OperatorHandle convex_combination(const std::vector<OperatorHandle>& ops, const std::vector<double>& weights) {
  if (ops.empty()) throw Error(ErrorKind::InvalidArgument, "convex combination of an empty list");
  if (ops.size() != weights.size()) {
    throw Error(ErrorKind::InvalidArgument, "convex combination needs one weight per operator");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorKind::InvalidArgument, "weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "weights sum to " + std::to_string(total) + ", expected 1");
  }
  const std::size_t dim = ops.front().dim();
  for (const auto& op : ops) require_same_dim(dim, op.dim(), "convex combination");

  const bool all_certified = std::all_of(ops.begin(), ops.end(), [](const auto& op) { return op.certificate().has_value(); });
  const bool all_fixed = std::all_of(ops.begin(), ops.end(), [](const auto& op) { return op.fix_set().has_value(); });

  std::optional<ClassCertificate> cert;
  std::optional<FixSet> fix;
  if (all_certified) {
    auto all_kind = [&](CertKind k) {
      return std::all_of(ops.begin(), ops.end(), [k](const auto& op) { return op.certificate()->kind() == k; });
    };
    const bool all_pair = std::all_of(ops.begin(), ops.end(), [](const auto& op) { return op.certificate()->is_pair_class(); });
    std::vector<double> params;
    for (const auto& op : ops) params.push_back(op.certificate()->parameter());
    std::vector<double> lambdas;
    for (const auto& op : ops) lambdas.push_back(op.certificate()->relaxation());

    if (all_kind(CertKind::SPC)) {
      cert = ClassCertificate::spc(combined_spc(weights, params));
    } else if (all_pair) {
      cert = ClassCertificate::rfne(combined_relaxation(weights, lambdas));
    } else if (all_fixed) {
      if (all_kind(CertKind::Demicontraction)) {
        cert = ClassCertificate::demicontraction(combined_spc(weights, params));
      } else {
        cert = ClassCertificate::relaxed_cutter(combined_relaxation(weights, lambdas));
      }
    }
    if (all_fixed) {
      FixSet acc = *ops.front().fix_set();
      for (std::size_t i = 1; i < ops.size(); ++i) acc = acc.intersect(*ops[i].fix_set());
      fix = std::move(acc);
    }
  }

  std::string label = "cc(";
  for (std::size_t i = 0; i < ops.size(); ++i) label += (i ? ", " : "") + ops[i].label();
  label += ")";
  auto eval = [ops, weights](const Point& x) {
    Point acc = Point::zeros(x.dim());
    for (std::size_t i = 0; i < ops.size(); ++i) acc += weights[i] * ops[i](x);
    return acc;
  };
  return OperatorHandle(dim, std::move(eval), std::move(label), cert, std::move(fix));
}

namespace {

/// Preimage A^-1(C) for the primitive shapes whose preimage is again an
/// intersection of primitives. Balls (ellipsoids) and degenerate rows give nullopt.
std::optional<FixSet> preimage(const FixSet& fix, const LinearMap& a) {
  std::vector<PrimitiveSet> out;
  auto pulled_normal = [&](const Point& normal) { return a.apply_adjoint(normal); };
  auto row = [&](std::size_t r) {
    std::vector<double> v(a.cols());
    for (std::size_t c = 0; c < a.cols(); ++c) v[c] = a.at(r, c);
    return Point(std::move(v));
  };
  for (const auto& set : fix.sets()) {
    const auto& shape = set.shape();
    if (const auto* h = std::get_if<Hyperplane>(&shape)) {
      Point n = pulled_normal(h->normal);
      if (norm_sq(n) == 0.0) return std::nullopt;
      out.push_back(PrimitiveSet::hyperplane(std::move(n), h->offset));
    } else if (const auto* h = std::get_if<Halfspace>(&shape)) {
      Point n = pulled_normal(h->normal);
      if (norm_sq(n) == 0.0) return std::nullopt;
      out.push_back(PrimitiveSet::halfspace(std::move(n), h->offset));
    } else if (const auto* b = std::get_if<Box>(&shape)) {
      for (std::size_t r = 0; r < a.rows(); ++r) {
        Point n = row(r);
        if (norm_sq(n) == 0.0) return std::nullopt;
        out.push_back(PrimitiveSet::halfspace(n, b->upper[r]));
        out.push_back(PrimitiveSet::halfspace(-n, -b->lower[r]));
      }
    } else {
      return std::nullopt;
    }
  }
  return FixSet(a.cols(), std::move(out));
}

}  // namespace

OperatorHandle landweber(const OperatorHandle& s, const LinearMap& a) {
  require_same_dim(s.dim(), a.rows(), "Landweber operator range");
  if (a.is_zero()) throw Error(ErrorKind::ZeroMap, "Landweber operator needs a nonzero linear map");
  if (!a.cached_norm()) {
    throw Error(ErrorKind::MissingNorm, "linear map has no cached norm; call estimate_norm (or set_norm) first");
  }
  const double inv_norm_sq = 1.0 / (*a.cached_norm() * *a.cached_norm());
  std::optional<ClassCertificate> cert;
  if (s.certificate()) cert = ClassCertificate::demicontraction(relaxed_cutter_to_demicontraction(s.certificate()->relaxation()));
  std::optional<FixSet> fix;
  if (s.fix_set()) fix = preimage(*s.fix_set(), a);
  auto eval = [s, a, inv_norm_sq](const Point& x) {
    const Point ax = a.apply(x);
    Point r = s(ax);
    r -= ax;
    Point step = a.apply_adjoint(r);
    step *= inv_norm_sq;
    return x + step;
  };
  return OperatorHandle(a.cols(), std::move(eval), "L{" + s.label() + "}", cert, std::move(fix));
}

}  // namespace fixcalc
