#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace rvml {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/** Invalid user input: bad grid sizes, unknown config keys, CFL violations. */
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * A numerical procedure failed to reach its target. Carries the best
 * estimate and an error measure so callers can report them.
 */
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double estimate, double error)
        : std::runtime_error(what), estimate_(estimate), error_(error) {}
    double estimate() const { return estimate_; }
    double error() const { return error_; }

private:
    double estimate_;
    double error_;
};

// Worker count used by parallel_for. Results never depend on it: every
// output element is produced by exactly one worker in a fixed order.
void set_thread_budget(int n);
int thread_budget();

// Calls body(begin, end) on contiguous chunks of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

} // namespace rvml
