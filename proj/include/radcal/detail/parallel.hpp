#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace radcal::detail {

/// Number of partial fields used by score accumulation. Fixed so results do
/// not depend on the machine's thread count.
inline constexpr std::size_t kReductionChunks = 32;

/// Splits [0, n_items) into kReductionChunks contiguous ranges, lets
/// `fill(begin, end, partial)` accumulate each range into its own zeroed
/// partial of `field_size` cells (in parallel), then sums the partials in
/// chunk order. The result is bit-identical for any thread count.
template <class Fill>
std::vector<double> chunked_field_sum(std::size_t n_items, std::size_t field_size, Fill&& fill) {
    const std::size_t chunks = std::min(kReductionChunks, std::max<std::size_t>(n_items, 1));
    std::vector<std::vector<double>> partials(chunks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
            partials[c].assign(field_size, 0.0);
            const std::size_t begin = n_items * c / chunks;
            const std::size_t end = n_items * (c + 1) / chunks;
            fill(begin, end, partials[c]);
        }
    };
    const std::size_t n_threads =
        std::min<std::size_t>(chunks, std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<double> total(field_size, 0.0);
    for (const auto& p : partials) {
        for (std::size_t i = 0; i < field_size; ++i) total[i] += p[i];
    }
    return total;
}

}  // namespace radcal::detail
