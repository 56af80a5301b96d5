#include "fspde/error.hpp"

namespace fspde {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::BlowUp: return "blow-up";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Condition: return "condition";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace fspde
