#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "seqqa/tensor.hpp"

namespace seqqa {

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
};

struct GradCheckSuite {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;
  bool passed = true;
  double seconds = 0.0;
};

/// Central-difference checks of every backward rule (matmul, activations,
/// softmax cross entropy, embedding lookup, LSTM cell, encoder stack, decoder
/// stack with projection, masked sequence loss) and of the full seq2seq batch
/// loss at V=5, E=4, H=3, 2 layers, 2 examples. All in double precision.
GradCheckSuite run_gradcheck_suite(const GradCheckOptions& options = {});

void print_gradcheck(std::ostream& out, const GradCheckSuite& suite);

}  // namespace seqqa
