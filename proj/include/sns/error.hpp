#pragma once

#include <stdexcept>
#include <string>

namespace sns {

/// Thrown when an integrator produces a non-finite state. The integrators never
/// clamp or silently repair the state.
class IntegrationAborted : public std::runtime_error {
public:
    IntegrationAborted(const std::string& what, std::size_t step, double time)
        : std::runtime_error(what + " (step " + std::to_string(step) + ", t = " + std::to_string(time) + ")"),
          step_(step),
          time_(time) {}

    std::size_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::size_t step_;
    double time_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace detail
} // namespace sns
