#pragma once

#include "nlvar/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace nlvar {

/// Bracket on the joint spectral radius of a finite matrix set.
struct JsrBracket {
  double lower = 0.0;
  double upper = 0.0;
  /// Longest product length explored.
  int depth = 0;
  /// True when the search ran to the requested depth (or stopped because the
  /// target was decided) without exhausting the node budget. The bounds are
  /// valid either way.
  bool certified = true;
};

struct JsrOptions {
  int depth = 12;
  /// Stop as soon as upper < target or lower >= target; products whose norm
  /// bound is already below the target are pruned.
  std::optional<double> target;
  /// Maximum number of live products per level; once exceeded the search
  /// stops at the current depth.
  std::size_t node_budget = 200000;
  /// Also bound norms in an ellipsoidal norm fitted to the set.
  bool precondition = true;
};

/// lower = max over explored products B of length t of rho(B)^(1/t).
/// upper = smallest, over explored depths, of the largest norm^(1/t) taken
/// over a complete prefix cut of the product tree: a product is a leaf of the
/// cut when its norm bound already falls to the current lower bound (or
/// below the target), otherwise it is expanded. Any complete cut bounds the
/// JSR from above since every long product factors into cut leaves.
/// A set with a single distinct matrix A returns [rho(A), rho(A)] at depth 1.
/// Throws DimensionMismatch for non-square or inconsistent matrices.
JsrBracket jsr_bounds(std::span<const Mat> matrices, const JsrOptions& options = {});

enum class JsrVerdict { Below, Above, Inconclusive };

struct JsrDecision {
  JsrVerdict verdict = JsrVerdict::Inconclusive;
  JsrBracket bracket;
};

/// Below when the certified upper bound is < rho_bar, Above when the lower
/// bound is >= rho_bar, Inconclusive otherwise.
JsrDecision jsr_decision(std::span<const Mat> matrices, double rho_bar, int max_depth = 12);

std::string to_string(JsrVerdict v);

}  // namespace nlvar
