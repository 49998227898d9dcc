#pragma once

#include "rsmfg/game_spec.hpp"

namespace rsmfg {

// Two-state deterministic fixture: perfect observations, transitions go to
// the state matching the action index, cost 1{s = s1} + 0.5 * d(s1),
// beta = 1, lambda = 1, T = 1, start at s0. Staying at s0 is free.
GameSpec toy_a();

// toy_a with accuracy-0.8 observations and a population-coupled kernel: the
// vertex kernel attached to s1 shifts 0.2 of the transition mass toward s1.
GameSpec toy_b();

}  // namespace rsmfg
