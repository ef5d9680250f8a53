#pragma once

#include <stdexcept>
#include <string>

namespace rss {

struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& what) : std::runtime_error("InvalidInput: " + what) {}
};

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error("InvalidConfig: " + what) {}
};

struct SingularTriangular : std::runtime_error {
    explicit SingularTriangular(const std::string& what) : std::runtime_error("SingularTriangular: " + what) {}
};

struct DegenerateSketch : std::runtime_error {
    explicit DegenerateSketch(const std::string& what) : std::runtime_error("DegenerateSketch: " + what) {}
};

struct SubproblemFailure : std::runtime_error {
    explicit SubproblemFailure(const std::string& what) : std::runtime_error("SubproblemFailure: " + what) {}
};

struct NumericalBreakdown : std::runtime_error {
    explicit NumericalBreakdown(const std::string& what) : std::runtime_error("NumericalBreakdown: " + what) {}
};

struct BoundInfeasible : std::runtime_error {
    explicit BoundInfeasible(const std::string& what) : std::runtime_error("BoundInfeasible: " + what) {}
};

struct MaxIterations : std::runtime_error {
    explicit MaxIterations(const std::string& what) : std::runtime_error("MaxIterations: " + what) {}
};

struct Stagnation : std::runtime_error {
    explicit Stagnation(const std::string& what) : std::runtime_error("Stagnation: " + what) {}
};

} // namespace rss
