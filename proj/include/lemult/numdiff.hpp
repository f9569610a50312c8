#pragma once

// Finite-difference derivatives with one Richardson extrapolation step.
// These are the numerical oracles that the closed-form expressions are
// checked against; they never see the closed forms.

#include <array>
#include <cstddef>

namespace lemult::numdiff {

namespace detail {

template <class F, class T, std::size_t N>
T stencil(F& f, T x, T h, const std::array<double, N>& coeff)
{
    T sum = 0;
    for (std::size_t k = 0; k < N; ++k) {
        if (coeff[k] != 0.0) {
            sum += T(coeff[k]) * f(x + static_cast<T>(k) * h);
        }
    }
    return sum;
}

template <class T>
T richardson4(T coarse, T fine)
{
    return (16 * fine - coarse) / 15;
}

}  // namespace detail

/// Five-point centred first derivative, Richardson-extrapolated: O(s^6).
template <class F, class T>
T centred_first(F&& f, T x, T s)
{
    auto d = [&](T h) -> T {
        return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
    };
    return detail::richardson4(d(s), d(s / 2));
}

/// Five-point centred second derivative, Richardson-extrapolated: O(s^6).
template <class F, class T>
T centred_second(F&& f, T x, T s)
{
    auto d = [&](T h) -> T {
        return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h);
    };
    return detail::richardson4(d(s), d(s / 2));
}

/// One-sided first derivative using points x, x + h, ..., x + 4h with
/// h = direction * s (direction = +1 forward, -1 backward).
template <class F, class T>
T one_sided_first(F&& f, T x, T s, int direction)
{
    static constexpr std::array<double, 5> c{-25.0, 48.0, -36.0, 16.0, -3.0};
    auto d = [&](T h) -> T { return detail::stencil(f, x, h, c) / (12 * h); };
    const T h = direction >= 0 ? s : -s;
    return detail::richardson4(d(h), d(h / 2));
}

/// One-sided second derivative using six points on one side of x.
template <class F, class T>
T one_sided_second(F&& f, T x, T s, int direction)
{
    static constexpr std::array<double, 6> c{45.0, -154.0, 214.0, -156.0, 61.0, -10.0};
    auto d = [&](T h) -> T { return detail::stencil(f, x, h, c) / (12 * h * h); };
    const T h = direction >= 0 ? s : -s;
    return detail::richardson4(d(h), d(h / 2));
}

}  // namespace lemult::numdiff
