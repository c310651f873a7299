#include "sequtil/report.hpp"

namespace sequtil {

std::string_view to_string(WitnessKind kind) {
  switch (kind) {
    case WitnessKind::affine_residual: return "affine-residual";
    case WitnessKind::nonpositive_multiplier: return "nonpositive-multiplier";
    case WitnessKind::ordering_flip: return "ordering-flip";
    case WitnessKind::multiplier_not_one: return "multiplier-not-one";
    case WitnessKind::exchange_residual: return "exchange-residual";
    case WitnessKind::dominance: return "dominance";
    case WitnessKind::potential_residual: return "potential-residual";
    case WitnessKind::connector_mismatch: return "connector-mismatch";
    case WitnessKind::incomparable: return "incomparable";
    case WitnessKind::strict_conflict: return "strict-conflict";
    case WitnessKind::intransitive: return "intransitive";
  }
  return "unknown";
}

std::string_view to_string(Status status) {
  return status == Status::consistent ? "consistent" : "violated";
}

void ConsistencyReport::add(Witness w) {
  status = Status::violated;
  if (witnesses.size() >= max_witnesses) {
    truncated = true;
    return;
  }
  witnesses.push_back(std::move(w));
}

}  // namespace sequtil
