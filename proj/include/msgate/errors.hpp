#pragma once

#include <stdexcept>
#include <string>

namespace msgate {

// Error taxonomy mirrors the CLI / C-API status codes:
// 2 = invalid configuration or input, 3 = infeasible problem, 4 = numerical failure.
enum class ErrorCode : int { ok = 0, config = 2, infeasible = 3, numeric = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorCode::config, what) {}
};

class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& what) : Error(ErrorCode::infeasible, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorCode::numeric, what) {}
};

}  // namespace msgate
