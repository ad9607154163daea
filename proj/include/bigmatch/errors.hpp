#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bm {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define BM_ERROR(Name)                                                   \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    };

BM_ERROR(DegenerateInterpolation)
BM_ERROR(ZeroPolynomial)
BM_ERROR(EmptyRange)
BM_ERROR(InvalidParameter)
BM_ERROR(AssumptionViolated)
BM_ERROR(ScheduleError)
BM_ERROR(InvalidSchedule)
BM_ERROR(InvalidAction)
BM_ERROR(DegenerateBasis)
BM_ERROR(InvalidInput)
BM_ERROR(StrategyContractViolation)
BM_ERROR(CapExceeded)
BM_ERROR(NotRecorded)
BM_ERROR(UsageError)

#undef BM_ERROR

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line, std::size_t column)
        : Error("ParseError at " + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

}  // namespace bm
