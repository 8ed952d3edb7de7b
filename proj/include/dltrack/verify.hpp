#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Randomized cross-checks of the engine against the brute-force oracles.
namespace dltrack {

// Deliberate corruption of the engine side of a check (negative control).
enum class Fault { none, likelihood, mstep, gradient };
std::string_view fault_name(Fault f);
Fault parse_fault(std::string_view s);  // throws config_error

struct CheckResult {
    std::string name;       // the invariant being checked
    int instances = 0;
    int failures = 0;
    double worst = 0.0;     // largest observed error
    double tolerance = 0.0;
    std::string first_failure;

    bool passed() const noexcept { return failures == 0; }
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    bool passed() const noexcept;
};

// batch_log_likelihood against the H^N enumeration, relative tolerance 1e-10.
// Throws size_limit when h^n exceeds the oracle limit.
CheckResult check_exhaustive_likelihood(int instances, std::size_t n, std::size_t h, std::uint64_t seed,
                                        Fault fault = Fault::none);

// Closed-form track update against numeric maximization, 1e-6 per parameter
// (relative to max(1, |value|)).
CheckResult check_mstep_optimality(int instances, std::uint64_t seed, Fault fault = Fault::none);

// Central-difference gradient of the weighted objective at the closed-form
// solution; every component must be at most 1e-4.
CheckResult check_mstep_gradient(int instances, std::uint64_t seed, Fault fault = Fault::none);

VerifyReport run_verification(int instances, std::size_t n, std::size_t h, std::uint64_t seed,
                              Fault fault = Fault::none);

}  // namespace dltrack
