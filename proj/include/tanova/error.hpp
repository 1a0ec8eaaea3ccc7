#pragma once

#include <stdexcept>
#include <string>

namespace tanova {

// Failures are either malformed input data or numerical conditions detected
// during computation. The CLI maps the two kinds to distinct exit codes.
enum class ErrorKind { data, numeric };

class Error : public std::runtime_error {
public:
    Error(std::string name, ErrorKind kind, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)), kind_(kind) {}

    const std::string& name() const noexcept { return name_; }
    ErrorKind kind() const noexcept { return kind_; }

private:
    std::string name_;
    ErrorKind kind_;
};

struct InvalidInput : Error {
    explicit InvalidInput(const std::string& w) : Error("InvalidInput", ErrorKind::data, w) {}
};

struct DimMismatch : Error {
    explicit DimMismatch(const std::string& w) : Error("DimMismatch", ErrorKind::data, w) {}
};

struct NotPsd : Error {
    explicit NotPsd(const std::string& w) : Error("NotPsd", ErrorKind::numeric, w) {}
};

struct RankDeficientMean : Error {
    explicit RankDeficientMean(const std::string& w) : Error("RankDeficientMean", ErrorKind::numeric, w) {}
};

struct RankDeficientInputs : Error {
    explicit RankDeficientInputs(const std::string& w) : Error("RankDeficientInputs", ErrorKind::numeric, w) {}
};

struct InsufficientData : Error {
    explicit InsufficientData(const std::string& w) : Error("InsufficientData", ErrorKind::data, w) {}
};

struct BasisReductionRequired : Error {
    explicit BasisReductionRequired(const std::string& w) : Error("BasisReductionRequired", ErrorKind::numeric, w) {}
};

// Carries the largest admissible |t| for the requested step direction.
struct StepOutsideCone : Error {
    StepOutsideCone(const std::string& w, double max_abs_t_)
        : Error("StepOutsideCone", ErrorKind::numeric, w), max_abs_t(max_abs_t_) {}
    double max_abs_t;
};

struct DegenerateBasis : Error {
    explicit DegenerateBasis(const std::string& w) : Error("DegenerateBasis", ErrorKind::numeric, w) {}
};

struct CannotSymmetrize : Error {
    explicit CannotSymmetrize(const std::string& w) : Error("CannotSymmetrize", ErrorKind::numeric, w) {}
};

struct ParseError : Error {
    ParseError(const std::string& w, long line_)
        : Error("ParseError", ErrorKind::data, "line " + std::to_string(line_) + ": " + w), line(line_) {}
    long line;
};

struct Degenerate : Error {
    explicit Degenerate(const std::string& w) : Error("Degenerate", ErrorKind::data, w) {}
};

struct IoError : Error {
    explicit IoError(const std::string& w) : Error("IoError", ErrorKind::data, w) {}
};

}  // namespace tanova
