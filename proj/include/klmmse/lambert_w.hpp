#pragma once

namespace klmmse {

enum class LambertBranch { Principal, MinusOne };

/// Real Lambert W: the solution w of w*e^w = x on the requested branch.
/// Principal branch: x >= -1/e, w >= -1. MinusOne branch: -1/e <= x < 0,
/// w <= -1. Halley iteration from branch-aware initial guesses; near the
/// branch point -1/e a series in sqrt(2*(1+e*x)) is used.
/// Throws std::domain_error outside the branch domain.
double lambert_w(LambertBranch branch, double x);

}  // namespace klmmse
