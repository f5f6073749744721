#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadfit {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

enum class ErrorKind {
    io_error,
    malformed_input,
    empty_mesh,
    not_watertight,
    degenerate_input,
    invalid_program,
    empty_solid,
    incompatible_grids,
    domain_error,
    config_error,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::io_error: return "io_error";
        case ErrorKind::malformed_input: return "malformed_input";
        case ErrorKind::empty_mesh: return "empty_mesh";
        case ErrorKind::not_watertight: return "not_watertight";
        case ErrorKind::degenerate_input: return "degenerate_input";
        case ErrorKind::invalid_program: return "invalid_program";
        case ErrorKind::empty_solid: return "empty_solid";
        case ErrorKind::incompatible_grids: return "incompatible_grids";
        case ErrorKind::domain_error: return "domain_error";
        case ErrorKind::config_error: return "config_error";
    }
    return "unknown";
}

struct Box3 {
    Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
            std::numeric_limits<double>::max()};
    Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
            std::numeric_limits<double>::lowest()};

    bool empty() const { return lo.x() > hi.x() || lo.y() > hi.y() || lo.z() > hi.z(); }
    void expand(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void expand(const Box3& b) {
        if (b.empty()) return;
        lo = lo.cwiseMin(b.lo);
        hi = hi.cwiseMax(b.hi);
    }
    Box3 inflated(double pad) const { return {lo.array() - pad, hi.array() + pad}; }
    Vec3 extent() const { return hi - lo; }
    Vec3 center() const { return 0.5 * (lo + hi); }
    double diagonal() const { return empty() ? 0.0 : extent().norm(); }
    double longest_side() const { return empty() ? 0.0 : extent().maxCoeff(); }
    bool contains(const Vec3& p) const {
        return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y() &&
               p.z() >= lo.z() && p.z() <= hi.z();
    }
    bool intersects(const Box3& b) const {
        return !(b.lo.x() > hi.x() || b.hi.x() < lo.x() || b.lo.y() > hi.y() || b.hi.y() < lo.y() ||
                 b.lo.z() > hi.z() || b.hi.z() < lo.z());
    }
};

// Deterministic RNG. All randomness in the pipeline flows through this so that
// a run is reproducible bit-for-bit from one manifest seed.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {
        // splitmix warmup so nearby seeds decorrelate
        next();
        next();
    }

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n) { return n == 0 ? 0 : next() % n; }

    static uint64_t derive(uint64_t seed, uint64_t salt) {
        Rng r(seed ^ (salt * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
        return r.next();
    }

private:
    uint64_t state_;
};

// Worker count used by parallel_for; 0 = hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Chunked index-space parallel loop; fn(begin, end) over disjoint ranges.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

}  // namespace cadfit
