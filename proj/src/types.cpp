#include "apex/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace apex {

bool in_training_lattice(const Hyperparams& hp) {
  auto ok = [](int v) { return v >= kCoefficientMin && v <= kCoefficientMax; };
  return ok(hp.lambda) && ok(hp.sigma) && ok(hp.rho) && ok(hp.mu);
}

std::string to_string(const Hyperparams& hp) {
  return "(" + std::to_string(hp.lambda) + "," + std::to_string(hp.sigma) + "," +
         std::to_string(hp.rho) + "," + std::to_string(hp.mu) + ")";
}

std::string_view to_string(TypeClass t) { return t == TypeClass::Linked ? "linked" : "partial"; }

std::string_view to_string(FileStatus s) {
  switch (s) {
    case FileStatus::Used:
      return "used";
    case FileStatus::Deleted:
      return "deleted";
    case FileStatus::Obsolete:
      return "obsolete";
  }
  return "?";
}

TypeClass parse_type_class(std::string_view s) {
  if (s == "linked") return TypeClass::Linked;
  if (s == "partial") return TypeClass::Partial;
  throw InvalidArgument("unknown type class '" + std::string(s) + "'");
}

TypeClass type_class_for_path(std::string_view path) {
  static constexpr std::array<std::string_view, 6> kLinked = {".exe", ".o", ".zip", ".elf", ".so", ".bin"};
  auto dot = path.rfind('.');
  auto slash = path.rfind('/');
  if (dot == std::string_view::npos || (slash != std::string_view::npos && dot < slash)) {
    return TypeClass::Partial;
  }
  std::string ext(path.substr(dot));
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::find(kLinked.begin(), kLinked.end(), ext) != kLinked.end() ? TypeClass::Linked
                                                                         : TypeClass::Partial;
}

}  // namespace apex
