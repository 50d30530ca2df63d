#include "logifold/exact.hpp"

#include <algorithm>
#include <map>

#include "logifold/error.hpp"

namespace logifold {

Constraint make_constraint(std::span<const double> a, double b, bool strict) {
  Constraint c;
  c.a.reserve(a.size());
  for (double v : a) c.a.emplace_back(v);
  c.b = b;
  c.strict = strict;
  return c;
}

Constraint side_constraint(const AffineMap& l, std::size_t r, Sign s) {
  Constraint c = make_constraint(l.row(r), l.offset(r), s == Sign::Minus);
  if (s == Sign::Minus) {
    for (auto& v : c.a) v = -v;
    c.b = -c.b;
  }
  return c;
}

Rational value(const Constraint& c, const RationalPoint& x) {
  Rational acc = c.b;
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    if (sgn(c.a[i]) != 0) acc += c.a[i] * x[i];
  }
  return acc;
}

bool satisfies(const Constraint& c, const RationalPoint& x) {
  const int s = sgn(value(c, x));
  return c.strict ? s > 0 : s >= 0;
}

bool satisfies_all(const std::vector<Constraint>& cs, const RationalPoint& x) {
  return std::all_of(cs.begin(), cs.end(), [&](const Constraint& c) { return satisfies(c, x); });
}

RationalPoint to_rational(std::span<const double> x) {
  RationalPoint out;
  out.reserve(x.size());
  for (double v : x) out.emplace_back(v);
  return out;
}

Point to_double(const RationalPoint& x) {
  Point out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i].get_d();
  return out;
}

bool verify_certificate(const std::vector<Constraint>& cs, const FarkasCertificate& cert) {
  if (cert.multipliers.size() != cs.size() || cs.empty()) return false;
  const std::size_t n = cs.front().a.size();
  std::vector<Rational> lin(n);
  Rational constant = 0;
  bool strict_used = false;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const Rational& m = cert.multipliers[i];
    if (sgn(m) < 0) return false;
    if (sgn(m) == 0) continue;
    if (cs[i].a.size() != n) return false;
    for (std::size_t j = 0; j < n; ++j) lin[j] += m * cs[i].a[j];
    constant += m * cs[i].b;
    strict_used = strict_used || cs[i].strict;
  }
  for (const auto& v : lin) {
    if (sgn(v) != 0) return false;
  }
  return sgn(constant) < 0 || (sgn(constant) == 0 && strict_used);
}

namespace {

struct Row {
  std::vector<Rational> a;
  Rational b;
  bool strict = false;
  std::vector<Rational> mult;  // empty unless certificates are tracked
};

bool constant_violated(const Row& r) { return sgn(r.b) < 0 || (sgn(r.b) == 0 && r.strict); }

void scale(Row& r, const Rational& f) {
  for (auto& v : r.a) v *= f;
  r.b *= f;
  for (auto& v : r.mult) v *= f;
}

// Accumulates rows, scaling each so its first nonzero coefficient has modulus
// one and keeping only the tightest row per direction.
class RowSet {
 public:
  // Returns false when a violated constant row shows up; `bad` then holds it.
  bool add(Row r) {
    auto it = std::find_if(r.a.begin(), r.a.end(), [](const Rational& v) { return sgn(v) != 0; });
    if (it == r.a.end()) {
      if (constant_violated(r)) {
        bad = std::move(r);
        return false;
      }
      return true;
    }
    Rational f = abs(*it);
    if (f != 1) scale(r, Rational(1) / f);
    auto [pos, inserted] = index_.try_emplace(r.a, rows.size());
    if (inserted) {
      rows.push_back(std::move(r));
      return true;
    }
    Row& old = rows[pos->second];
    const int c = cmp(r.b, old.b);  // smaller offset is tighter
    if (c < 0 || (c == 0 && r.strict && !old.strict)) old = std::move(r);
    return true;
  }

  std::vector<Row> rows;
  Row bad;

 private:
  std::map<std::vector<Rational>, std::size_t> index_;
};

Row combine(const Row& p, const Row& q, std::size_t v) {
  // p has a positive coefficient at v, q a negative one.
  const Rational wp = -q.a[v];
  const Rational& wq = p.a[v];
  Row out;
  out.a.resize(p.a.size());
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    if (i == v) continue;
    out.a[i] = wp * p.a[i] + wq * q.a[i];
  }
  out.b = wp * p.b + wq * q.b;
  out.strict = p.strict || q.strict;
  if (!p.mult.empty()) {
    out.mult.resize(p.mult.size());
    for (std::size_t i = 0; i < p.mult.size(); ++i) out.mult[i] = wp * p.mult[i] + wq * q.mult[i];
  }
  return out;
}

struct Bound {
  bool present = false;
  Rational value;
  bool strict = false;
  std::size_t row = 0;
};

// Bounds on x_v implied by rows once all other coordinates are fixed to x.
void bounds_for(const std::vector<Row>& rows, std::size_t v, const RationalPoint& x, Bound& lo, Bound& hi) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    const int s = sgn(r.a[v]);
    if (s == 0) continue;
    Rational rest = r.b;
    for (std::size_t i = 0; i < r.a.size(); ++i) {
      if (i != v && sgn(r.a[i]) != 0) rest += r.a[i] * x[i];
    }
    Rational bound = -rest / r.a[v];
    if (s > 0) {
      const int c = lo.present ? cmp(bound, lo.value) : 1;
      if (c > 0 || (c == 0 && r.strict && !lo.strict)) lo = {true, bound, r.strict, k};
    } else {
      const int c = hi.present ? cmp(bound, hi.value) : -1;
      if (c < 0 || (c == 0 && r.strict && !hi.strict)) hi = {true, bound, r.strict, k};
    }
  }
}

bool interval_empty(const Bound& lo, const Bound& hi) {
  if (!lo.present || !hi.present) return false;
  const int c = cmp(lo.value, hi.value);
  return c > 0 || (c == 0 && (lo.strict || hi.strict));
}

Rational pick(const Bound& lo, const Bound& hi) {
  if (lo.present && hi.present) {
    if (cmp(lo.value, hi.value) == 0) return lo.value;
    return (lo.value + hi.value) / 2;
  }
  if (lo.present) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), lo.value.get_num_mpz_t(), lo.value.get_den_mpz_t());
    return Rational(f + 1);
  }
  if (hi.present) {
    mpz_class c;
    mpz_cdiv_q(c.get_mpz_t(), hi.value.get_num_mpz_t(), hi.value.get_den_mpz_t());
    return Rational(c - 1);
  }
  return Rational(0);
}

Feasibility infeasible_from(const Row& bad, bool want_certificate) {
  Feasibility out;
  out.feasible = false;
  if (want_certificate) out.certificate = FarkasCertificate{bad.mult};
  return out;
}

}  // namespace

Feasibility solve_system(const std::vector<Constraint>& cs, std::size_t dim, bool want_certificate) {
  RowSet start;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].a.size() != dim) fail(ErrorCode::DimensionMismatch, "constraint dimension differs from system dimension");
    Row r{cs[i].a, cs[i].b, cs[i].strict, {}};
    if (want_certificate) {
      r.mult.assign(cs.size(), Rational(0));
      r.mult[i] = 1;
    }
    if (!start.add(std::move(r))) return infeasible_from(start.bad, want_certificate);
  }

  struct Stage {
    std::vector<Row> rows;
    std::size_t var;
  };
  std::vector<Stage> stages;
  std::vector<bool> active(dim, true);
  std::size_t remaining = dim;
  std::vector<Row> cur = std::move(start.rows);

  while (remaining > 0 && !cur.empty()) {
    // Eliminate the variable producing the fewest combined rows.
    std::size_t best = dim;
    std::size_t best_cost = 0;
    for (std::size_t v = 0; v < dim; ++v) {
      if (!active[v]) continue;
      std::size_t pos = 0, neg = 0;
      for (const Row& r : cur) {
        const int s = sgn(r.a[v]);
        pos += s > 0;
        neg += s < 0;
      }
      const std::size_t cost = pos * neg;
      if (best == dim || cost < best_cost) {
        best = v;
        best_cost = cost;
      }
    }
    const std::size_t v = best;

    if (remaining == 1) {
      // Only x_v left: a bounds check replaces the pairwise combination.
      RationalPoint zero(dim);
      Bound lo, hi;
      bounds_for(cur, v, zero, lo, hi);
      if (interval_empty(lo, hi)) {
        Row bad = combine(cur[lo.row], cur[hi.row], v);
        return infeasible_from(bad, want_certificate);
      }
      stages.push_back({std::move(cur), v});
      cur.clear();
      active[v] = false;
      --remaining;
      break;
    }

    RowSet next;
    std::vector<std::size_t> pos, neg;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      const int s = sgn(cur[k].a[v]);
      if (s > 0) {
        pos.push_back(k);
      } else if (s < 0) {
        neg.push_back(k);
      } else if (!next.add(cur[k])) {
        return infeasible_from(next.bad, want_certificate);
      }
    }
    for (std::size_t p : pos) {
      for (std::size_t q : neg) {
        if (!next.add(combine(cur[p], cur[q], v))) return infeasible_from(next.bad, want_certificate);
      }
    }
    stages.push_back({std::move(cur), v});
    cur = std::move(next.rows);
    active[v] = false;
    --remaining;
  }

  Feasibility out;
  out.feasible = true;
  out.witness.assign(dim, Rational(0));
  for (auto it = stages.rbegin(); it != stages.rend(); ++it) {
    Bound lo, hi;
    bounds_for(it->rows, it->var, out.witness, lo, hi);
    if (interval_empty(lo, hi)) fail(ErrorCode::InvalidArgument, "elimination back-substitution found an empty interval");
    out.witness[it->var] = pick(lo, hi);
  }
  return out;
}

namespace {

struct Partial {
  std::string signs;
  std::vector<Constraint> cs;
  RationalPoint witness;
};

// Cheap attempt to cross row c's hyperplane from w: move along the row normal
// and test the landing points exactly.
std::optional<RationalPoint> cross(const Constraint& c, const std::vector<Constraint>& others, const RationalPoint& w) {
  Rational norm2 = 0;
  for (const auto& v : c.a) norm2 += v * v;
  if (sgn(norm2) == 0) return std::nullopt;
  const Rational v = value(c, w);  // currently violated: v < 0, or v == 0 with c strict
  std::vector<Rational> targets;
  if (sgn(v) != 0) {
    targets = {-v, -v / 4, -v / 64};
    // a weak row may only be met on its hyperplane
    if (!c.strict) targets.push_back(Rational(0));
  } else {
    targets = {Rational(1), Rational(1, 1024), Rational(1, 1 << 20)};
  }
  for (const Rational& target : targets) {
    const Rational t = (target - v) / norm2;
    RationalPoint p = w;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (sgn(c.a[i]) != 0) p[i] += t * c.a[i];
    }
    if (satisfies(c, p) && satisfies_all(others, p)) return p;
  }
  return std::nullopt;
}

// c contradicts some constraint of cs that is its exact negation, e.g. l > 0 against -l >= 0.
bool opposes(const Constraint& c, const std::vector<Constraint>& cs) {
  for (const Constraint& d : cs) {
    if (!c.strict && !d.strict) continue;
    if (cmp(d.b, -c.b) != 0) continue;
    bool neg = true;
    for (std::size_t i = 0; i < c.a.size() && neg; ++i) neg = cmp(d.a[i], -c.a[i]) == 0;
    if (neg) return true;
  }
  return false;
}

}  // namespace

std::vector<Chamber> enumerate_chambers(const AffineMap& l, const std::vector<Constraint>& region,
                                        const RationalPoint& region_witness, std::size_t cap) {
  const std::size_t n = l.cols();
  std::vector<Partial> cur;
  cur.push_back({std::string{}, region, region_witness});
  for (std::size_t r = 0; r < l.rows(); ++r) {
    const bool constant = l.row_is_constant(r);
    const Constraint plus = side_constraint(l, r, Sign::Plus);
    const Constraint minus = side_constraint(l, r, Sign::Minus);
    std::vector<Partial> next;
    next.reserve(cur.size() * 2);
    for (Partial& p : cur) {
      const bool at_plus = satisfies(plus, p.witness);
      std::optional<RationalPoint> other;
      const Constraint& flip = at_plus ? minus : plus;
      if (!constant && !opposes(flip, p.cs)) {
        other = cross(flip, p.cs, p.witness);
        if (!other) {
          std::vector<Constraint> sys = p.cs;
          sys.push_back(flip);
          Feasibility f = solve_system(sys, n);
          if (f.feasible) other = std::move(f.witness);
        }
      }
      Partial keep{p.signs + (at_plus ? '+' : '-'), p.cs, p.witness};
      keep.cs.push_back(at_plus ? plus : minus);
      std::optional<Partial> moved;
      if (other) {
        moved = Partial{p.signs + (at_plus ? '-' : '+'), std::move(p.cs), std::move(*other)};
        moved->cs.push_back(flip);
      }
      if (at_plus) {
        next.push_back(std::move(keep));
        if (moved) next.push_back(std::move(*moved));
      } else {
        if (moved) next.push_back(std::move(*moved));
        next.push_back(std::move(keep));
      }
    }
    if (next.size() > cap) {
      fail(ErrorCode::GuardExplosion, "guard with " + std::to_string(l.rows()) + " rows exceeds " +
                                          std::to_string(cap) + " chambers");
    }
    cur = std::move(next);
  }
  std::vector<Chamber> out;
  out.reserve(cur.size());
  for (Partial& p : cur) out.push_back({SignVector(std::move(p.signs)), std::move(p.witness)});
  return out;
}

std::vector<Chamber> enumerate_chambers(const AffineMap& l, std::size_t cap) {
  return enumerate_chambers(l, {}, RationalPoint(l.cols()), cap);
}

}  // namespace logifold
