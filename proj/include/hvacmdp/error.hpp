#pragma once

#include <stdexcept>
#include <string>

namespace hvacmdp {

/// Base of every error thrown by the library. `kind()` maps onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  enum class Kind { Config, Data, Infeasible, Numeric, Usage };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(Kind::Config, w) {}
};

struct DataError : Error {
  explicit DataError(const std::string& w) : Error(Kind::Data, w) {}
};

struct EmptyData : DataError {
  explicit EmptyData(const std::string& w) : DataError("empty data: " + w) {}
};

struct GridMismatch : DataError {
  explicit GridMismatch(const std::string& w) : DataError("grid mismatch: " + w) {}
};

struct CorruptFile : DataError {
  explicit CorruptFile(const std::string& w) : DataError("corrupt file: " + w) {}
};

struct VersionMismatch : DataError {
  explicit VersionMismatch(const std::string& w) : DataError("version mismatch: " + w) {}
};

struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& w) : Error(Kind::Infeasible, w) {}
};

/// All weights of a visited policy row are zero.
struct DeadState : InfeasibleError {
  explicit DeadState(const std::string& w) : InfeasibleError("dead state: " + w) {}
};

/// Every Monte-Carlo rollout of an iteration was infeasible.
struct NoPaths : InfeasibleError {
  explicit NoPaths(const std::string& w) : InfeasibleError("no feasible paths: " + w) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(Kind::Numeric, w) {}
};

struct NonConvergence : NumericError {
  explicit NonConvergence(const std::string& w) : NumericError("no convergence: " + w) {}
};

struct OutOfRange : Error {
  explicit OutOfRange(const std::string& w) : Error(Kind::Usage, "out of range: " + w) {}
};

struct TooLarge : Error {
  explicit TooLarge(const std::string& w) : Error(Kind::Usage, "model too large: " + w) {}
};

}  // namespace hvacmdp
