#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

namespace peerchain::parallel {

/// Every kernel has a serial reference and an OpenMP version; tests run both
/// and compare.
enum class Exec { serial, parallel };

std::string_view exec_name(Exec e);

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

/// Smallest i in [0, n) for which `ok(i)` is false, or nullopt. `ok` must be
/// safe to call concurrently. The serial version stops at the first failure;
/// the parallel one evaluates every index.
std::optional<std::size_t> first_failure(std::size_t n, const std::function<bool(std::size_t)>& ok, Exec exec);

/// Sum of f(i) over [0, n).
std::uint64_t sum_over(std::size_t n, const std::function<std::uint64_t(std::size_t)>& f, Exec exec);

/// Number of i in [0, n) for which `pred(i)` holds.
std::size_t count_if(std::size_t n, const std::function<bool(std::size_t)>& pred, Exec exec);

}  // namespace peerchain::parallel
