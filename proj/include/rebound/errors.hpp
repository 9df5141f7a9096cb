#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace rebound {

// Error categories double as CLI exit codes (0 = success, 1 = usage).
enum class ErrorCategory {
    io = 2,
    parse = 3,
    validation = 4,
    state = 5,
    numeric = 6,
    insufficient_data = 7,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}
    ErrorCategory category() const noexcept { return category_; }

  private:
    ErrorCategory category_;
};

struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorCategory::io, w) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& w) : Error(ErrorCategory::parse, w) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& w) : Error(ErrorCategory::validation, w) {}
};

// Pipeline stages invoked out of order (missing upstream artifact).
struct StateError : Error {
    explicit StateError(const std::string& w) : Error(ErrorCategory::state, w) {}
};

// Model evaluated at or beyond its critical time.
struct ModelDomainError : Error {
    explicit ModelDomainError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

// Near-singular normal matrix in the linear slaving step.
struct DegenerateBasisError : Error {
    explicit DegenerateBasisError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& w)
        : Error(ErrorCategory::insufficient_data, w) {}
};

// Optimizer hit a non-finite objective; carries the last finite iterate.
struct NumericFailureError : Error {
    NumericFailureError(const std::string& w, const std::array<double, 4>& iterate,
                        double objective)
        : Error(ErrorCategory::numeric, w), last_good(iterate), last_objective(objective) {}
    std::array<double, 4> last_good;
    double last_objective;
};

// Every calibration candidate for a window failed.
struct FitFailureError : Error {
    explicit FitFailureError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

struct UndefinedPosteriorError : Error {
    explicit UndefinedPosteriorError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

struct UndefinedSharpeError : Error {
    explicit UndefinedSharpeError(const std::string& w) : Error(ErrorCategory::numeric, w) {}
};

} // namespace rebound
