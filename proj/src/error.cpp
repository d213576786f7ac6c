#include "globreg/error.hpp"

namespace globreg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kEmptyCloud: return "empty cloud";
    case ErrorKind::kDegenerateNeighborhood: return "degenerate neighborhood";
    case ErrorKind::kCoincidentPoints: return "coincident points";
    case ErrorKind::kNoReliablePoints: return "no reliable points";
    case ErrorKind::kInsufficientSupport: return "insufficient support";
    case ErrorKind::kRankDeficient: return "rank-deficient";
    case ErrorKind::kSolverDegenerate: return "solver degenerate";
    case ErrorKind::kEmptyPrune: return "pruning rejected all correspondences";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kParse: return "parse error";
  }
  return "unknown";
}

}  // namespace globreg
