#pragma once

#include "exist/ast.hpp"

namespace exist {

// Weakest pre-expectation of a loop-free command: wpe(c, E)(s) is the
// expected value of E over the output distribution of c run from s.
// Rules: skip is identity, assignment substitutes, sampling takes the
// distribution-weighted sum of substitutions, sequencing composes, and
// conditionals split with indicator weights.
ExprPtr wpe_loopfree(const CmdPtr& c, const ExprPtr& E);

// One application of the loop's characteristic function:
//   [G] * wpe(body, I) + [!G] * postE
ExprPtr char_fn_apply(const Program& prog, const ExprPtr& postE, const ExprPtr& I);

}  // namespace exist
