#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "logifold/affine.hpp"

namespace logifold {

using Rational = mpq_class;
using RationalPoint = std::vector<Rational>;

/// a·x + b > 0 (strict) or a·x + b >= 0.
struct Constraint {
  std::vector<Rational> a;
  Rational b;
  bool strict = false;
};

/// Doubles convert exactly (every finite double is a dyadic rational).
Constraint make_constraint(std::span<const double> a, double b, bool strict);
/// Row r of l restricted to one side: PLUS gives l_r >= 0, MINUS gives -l_r > 0.
Constraint side_constraint(const AffineMap& l, std::size_t r, Sign s);

Rational value(const Constraint& c, const RationalPoint& x);
bool satisfies(const Constraint& c, const RationalPoint& x);
bool satisfies_all(const std::vector<Constraint>& cs, const RationalPoint& x);

RationalPoint to_rational(std::span<const double> x);
Point to_double(const RationalPoint& x);

/// Nonnegative multipliers over the input constraints whose combination has
/// zero linear part and a constant that is negative, or zero with some strict
/// constraint carrying positive weight: a proof the system has no solution.
struct FarkasCertificate {
  std::vector<Rational> multipliers;
};

bool verify_certificate(const std::vector<Constraint>& cs, const FarkasCertificate& cert);

struct Feasibility {
  bool feasible = false;
  RationalPoint witness;                      // set when feasible
  std::optional<FarkasCertificate> certificate;  // set when infeasible and requested
};

/// Exact Fourier–Motzkin elimination with back-substituted witness.
Feasibility solve_system(const std::vector<Constraint>& cs, std::size_t dim, bool want_certificate = false);

inline constexpr std::size_t kDefaultChamberCap = std::size_t{1} << 16;

struct Chamber {
  SignVector signs;
  RationalPoint witness;
};

/// Realizable sign vectors of l inside {x : region}, each with an exact
/// witness. `region_witness` must satisfy the region. Order is lexicographic
/// with '+' before '-'. Throws GuardExplosion past `cap` chambers.
std::vector<Chamber> enumerate_chambers(const AffineMap& l, const std::vector<Constraint>& region,
                                        const RationalPoint& region_witness, std::size_t cap = kDefaultChamberCap);
std::vector<Chamber> enumerate_chambers(const AffineMap& l, std::size_t cap = kDefaultChamberCap);

}  // namespace logifold
