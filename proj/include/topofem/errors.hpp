#pragma once

#include <stdexcept>
#include <string>

namespace topofem {

struct NearCriticalPoint : std::runtime_error {
    explicit NearCriticalPoint(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidRect : std::invalid_argument {
    explicit InvalidRect(const std::string& what) : std::invalid_argument(what) {}
};

struct ContainmentViolation : std::runtime_error {
    explicit ContainmentViolation(const std::string& what) : std::runtime_error(what) {}
};

struct SolverDivergence : std::runtime_error {
    explicit SolverDivergence(const std::string& what) : std::runtime_error(what) {}
};

struct UnsupportedDimension : std::invalid_argument {
    explicit UnsupportedDimension(const std::string& what) : std::invalid_argument(what) {}
};

struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace topofem
