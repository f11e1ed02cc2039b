// Seeded RNG helpers. All randomized probes draw through these so that a run
// is reproducible from its seed alone, independent of the standard library's
// distribution implementations.
#pragma once

#include <cstdint>
#include <random>

namespace tgc {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution. Same bits on every platform.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Symmetric around zero, handy for perturbation directions.
  double symmetric(double amplitude) { return uniform(-amplitude, amplitude); }

  std::uint64_t raw() { return engine_(); }

  // Deterministic stream splitting for independent sub-probes.
  Rng fork() { return Rng(engine_() ^ 0x9e3779b97f4a7c15ull); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tgc
