#include "survcontour/model.hpp"

namespace survcontour {

const char* to_string(OutcomeKind kind) { return kind == OutcomeKind::cif ? "cif" : "survival"; }

}  // namespace survcontour
