#include "satenq/rng.hpp"

#include <cmath>
#include <sstream>

#include "satenq/errors.hpp"

namespace satenq {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::stream(std::uint64_t tag) const {
    return Rng(splitmix64(seed_ ^ splitmix64(tag + 1)));
}

Rng Rng::stream(std::uint64_t tag_a, std::uint64_t tag_b) const {
    return Rng(splitmix64(seed_ ^ splitmix64(tag_a + 1) ^ splitmix64(splitmix64(tag_b + 0x51ED2701ULL))));
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
    // 53 random bits -> [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::uniform_int(int n) {
    if (n <= 0) throw ContractError("uniform_int: n must be positive");
    return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

std::string Rng::state_string() const {
    std::ostringstream os;
    os.precision(17);  // max_digits10: the spare must survive the round-trip
    os << seed_ << ' ' << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ' << spare_;
    return os.str();
}

void Rng::restore_state(const std::string& s) {
    std::istringstream is(s);
    int spare_flag = 0;
    is >> seed_ >> engine_ >> spare_flag >> spare_;
    if (!is) throw IoError("Rng::restore_state: malformed state string");
    has_spare_ = spare_flag != 0;
}

}  // namespace satenq
