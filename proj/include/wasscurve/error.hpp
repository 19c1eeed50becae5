#ifndef WASSCURVE_ERROR_HPP
#define WASSCURVE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wasscurve {

/// Coarse error category; the CLI maps each one to a distinct exit code.
enum class ErrorCategory { io, schema, solver_divergence, precondition };

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::io: return "io";
    case ErrorCategory::schema: return "schema";
    case ErrorCategory::solver_divergence: return "solver-divergence";
    case ErrorCategory::precondition: return "precondition";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

inline void require(bool cond, const std::string& what,
                    ErrorCategory category = ErrorCategory::precondition) {
  if (!cond) throw Error(category, what);
}

}  // namespace wasscurve

#endif  // WASSCURVE_ERROR_HPP
