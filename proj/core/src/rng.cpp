#include "coshare/rng.hpp"

namespace coshare {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Rng Rng::fork(std::uint64_t stream) const {
    return Rng(splitmix64(seed_ ^ splitmix64(stream + 1)));
}

std::vector<std::size_t> Rng::sample_indices(std::size_t n, std::size_t k) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    if (k > n) k = n;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(below(n - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

} // namespace coshare
