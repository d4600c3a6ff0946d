#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace apex {

using BlockAddress = std::uint32_t;
using FileId = std::uint64_t;
using Tick = std::uint64_t;

// Ranking coefficients: PF = lambda*HF - sigma*UF + rho*SF + mu*LF.
struct Hyperparams {
  int lambda = 4;
  int sigma = 7;
  int rho = 1;
  int mu = 9;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
  friend auto operator<=>(const Hyperparams&, const Hyperparams&) = default;
};

inline constexpr int kCoefficientMin = 1;
inline constexpr int kCoefficientMax = 10;

bool in_training_lattice(const Hyperparams& hp);
std::string to_string(const Hyperparams& hp);

enum class TypeClass { Linked, Partial };
enum class FileStatus { Used, Deleted, Obsolete };

std::string_view to_string(TypeClass t);
std::string_view to_string(FileStatus s);
TypeClass parse_type_class(std::string_view s);

// Infers the recoverability class from the path's extension.
// Unknown extensions default to Partial.
TypeClass type_class_for_path(std::string_view path);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied bad input (bad config, bad path, out of range).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class AlreadyExists : public Error {
 public:
  using Error::Error;
};

class DiskFull : public Error {
 public:
  using Error::Error;
};

// Internal consistency check failed; always a bug.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace apex
