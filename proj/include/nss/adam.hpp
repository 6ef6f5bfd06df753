#pragma once

#include "nss/error.hpp"
#include "nss/field.hpp"

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nss {

/// Piecewise-constant learning rate: `base` before `drop_step`, `dropped` after.
struct LrSchedule {
    double base = 5e-4;
    std::int64_t drop_step = 250000;
    double dropped = 5e-5;

    double at(std::int64_t step) const { return step < drop_step ? base : dropped; }
};

template <class S>
struct AdamState {
    AlignedVector<S> m;
    AlignedVector<S> v;
    /// Number of completed updates.
    std::int64_t step = 0;
    LrSchedule schedule;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(std::size_t n = 0, LrSchedule s = {}) : m(n, S(0)), v(n, S(0)), schedule(s) {}
};

/// One bias-corrected ADAM update. Throws NumericError naming the parameter
/// block that holds a non-finite gradient (blocks may be empty).
template <class S>
void adam_step(AdamState<S>& state, std::span<S> params, std::span<const S> grads,
               const std::vector<ParamBlock>& blocks = {}) {
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw DomainError("adam_step: parameter, gradient, and moment sizes differ");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (std::isfinite(grads[i])) continue;
        std::string where = "index " + std::to_string(i);
        for (const auto& b : blocks)
            if (i >= b.offset && i < b.offset + b.size) where = b.name;
        throw NumericError("non-finite gradient in parameter block " + where);
    }
    const double lr = state.schedule.at(state.step);
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const S b1 = static_cast<S>(state.beta1), b2 = static_cast<S>(state.beta2);
    const S step_size = static_cast<S>(lr / bc1);
    const S inv_sqrt_bc2 = static_cast<S>(1.0 / std::sqrt(bc2));
    const S eps = static_cast<S>(state.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const S g = grads[i];
        state.m[i] = b1 * state.m[i] + (S(1) - b1) * g;
        state.v[i] = b2 * state.v[i] + (S(1) - b2) * g * g;
        params[i] -= step_size * state.m[i] / (std::sqrt(state.v[i]) * inv_sqrt_bc2 + eps);
    }
}

}  // namespace nss
