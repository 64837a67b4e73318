#include "peerchain/parallel/kernels.hpp"

#include <omp.h>

#include <atomic>
#include <exception>
#include <limits>
#include <mutex>

namespace peerchain::parallel {

namespace {

// Exceptions may not leave an OpenMP region; keep the first and rethrow.
class FirstException {
public:
    template <typename F>
    void guard(F&& f) {
        try {
            f();
        } catch (...) {
            std::lock_guard lock(mu_);
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mu_;
    std::exception_ptr error_;
};

}  // namespace

std::string_view exec_name(Exec e) { return e == Exec::serial ? "serial" : "parallel"; }

int max_threads() { return omp_get_max_threads(); }

std::optional<std::size_t> first_failure(std::size_t n, const std::function<bool(std::size_t)>& ok, Exec exec) {
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!ok(i)) return i;
        }
        return std::nullopt;
    }
    constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
    std::size_t first = none;
    FirstException errors;
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) reduction(min : first)
    for (std::int64_t i = 0; i < count; ++i) {
        errors.guard([&] {
            if (!ok(static_cast<std::size_t>(i))) first = std::min(first, static_cast<std::size_t>(i));
        });
    }
    errors.rethrow();
    if (first == none) return std::nullopt;
    return first;
}

std::uint64_t sum_over(std::size_t n, const std::function<std::uint64_t(std::size_t)>& f, Exec exec) {
    std::uint64_t total = 0;
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) total += f(i);
        return total;
    }
    FirstException errors;
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) reduction(+ : total)
    for (std::int64_t i = 0; i < count; ++i) {
        errors.guard([&] { total += f(static_cast<std::size_t>(i)); });
    }
    errors.rethrow();
    return total;
}

std::size_t count_if(std::size_t n, const std::function<bool(std::size_t)>& pred, Exec exec) {
    return static_cast<std::size_t>(sum_over(n, [&](std::size_t i) -> std::uint64_t { return pred(i) ? 1 : 0; }, exec));
}

}  // namespace peerchain::parallel
