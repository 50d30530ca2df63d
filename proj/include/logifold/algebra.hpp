#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logifold/llg.hpp"

namespace logifold {

/// "(a,b,...)"
std::string tuple_label(const std::vector<std::string>& parts);

/// Single-arrow graph source -> target(label) on R^n.
LogicalGraph constant_graph(std::size_t input_dim, const std::string& label);

/// x -> (g_1(x), ..., g_k(x)): a copy of g_{i+1} hangs off every target of the
/// graph built so far, its source merged into that target.
LogicalGraph product(const std::vector<const LogicalGraph*>& graphs);
LogicalGraph product(const LogicalGraph& g1, const LogicalGraph& g2);

enum class F2Op { Add, Mul };

/// Pointwise sum or product over F2 of two graphs labeled by "0"/"1".
LogicalGraph boolean_combine(const LogicalGraph& g1, const LogicalGraph& g2, F2Op op);

/// Graph on R^{n+1} -> {"0","1"} vanishing exactly on {(x, y) : |y - g(x)| <= 1/2}.
/// Labels of g must be distinct integers; the extra coordinate y comes last.
LogicalGraph zero_locus_lift(const LogicalGraph& g);

/// Identity on a finite point set: one guard of N-1 parallel hyperplanes
/// u·x = m_j along a random direction u. Targets are labeled format_point(x).
LogicalGraph identity_graph(const std::vector<Point>& points, std::uint64_t seed = 0, int attempts = 16);

/// x -> (x, g(x)) on the finite set.
LogicalGraph parametrize(const LogicalGraph& g, const std::vector<Point>& points, std::uint64_t seed = 0);

}  // namespace logifold
