#include "eklab/errors.hpp"

namespace eklab {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::shape: return "shape error";
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::unsupported_order: return "unsupported-order error";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::vacuum: return "vacuum error";
    case ErrorKind::instability: return "instability error";
    case ErrorKind::hyperbolicity_loss: return "alpha-violation error";
    case ErrorKind::dependency: return "dependency error";
    case ErrorKind::profile_existence: return "profile-existence error";
    case ErrorKind::coercivity: return "coercivity error";
    case ErrorKind::enlarge_domain: return "enlarge-domain error";
    case ErrorKind::decay: return "decay error";
    case ErrorKind::scale_separation: return "scale-separation error";
    case ErrorKind::history_too_short: return "history-too-short error";
    case ErrorKind::config: return "config error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

}  // namespace eklab
