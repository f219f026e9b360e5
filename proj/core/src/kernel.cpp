#include "chartdate/kernel.hpp"

#include <sstream>
#include <stdexcept>

namespace chartdate {

std::string_view to_string(KernelShape shape) {
  switch (shape) {
    case KernelShape::gaussian:
      return "gaussian";
    case KernelShape::student_t:
      return "student_t";
    case KernelShape::epanechnikov:
      return "epanechnikov";
  }
  return "unknown";
}

KernelShape parse_kernel_shape(std::string_view name) {
  if (name == "gaussian") return KernelShape::gaussian;
  if (name == "student_t" || name == "t") return KernelShape::student_t;
  if (name == "epanechnikov") return KernelShape::epanechnikov;
  throw std::invalid_argument("unknown kernel shape '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be > 0");
  if (shape == KernelShape::student_t && !(nu > 0.0))
    throw std::invalid_argument("student_t kernel needs nu > 0");
  if (!(scale > 0.0)) throw std::invalid_argument("kernel scale must be > 0");
}

std::string KernelSpec::describe() const {
  std::ostringstream out;
  out << to_string(shape) << "(h=" << bandwidth;
  if (shape == KernelShape::student_t) out << ",df=" << nu;
  out << ')';
  return out.str();
}

}  // namespace chartdate
