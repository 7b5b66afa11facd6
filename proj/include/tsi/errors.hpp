#pragma once

#include <stdexcept>
#include <string>

namespace tsi {

/* Typed failure conditions surfaced by the library.  The CLI maps these to
 * structured JSON reports and exit codes; tests match on the code enum. */
enum class errc {
    invalid_argument,      // precondition violated by the caller
    non_positive_determinant,
    zero_vector,
    symmetry_violation,    // field coefficients not even/real-compatible
    zero_mean_field,
    non_monotone,          // change of variables loses monotonicity
    non_positive,          // recovered density dips <= 0 (inconsistent data)
    ill_conditioned,       // cosine factor below the safe floor
    incomplete_coverage,   // direction set misses required rays
    genericity_failure,    // no usable basis pair of directions
    clamp_violation,       // recovered cosine outside [-1,1] beyond tolerance
    flux_not_quantized,
    convergence_failure,   // iterative solver did not meet its residual target
    nonzero_mean_potential,
    io_error,
    parse_error,
};

const char* errc_name(errc code) noexcept;

class error : public std::runtime_error {
  public:
    error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw error(code, std::string(errc_name(code)) + ": " + what);
}

inline void require(bool cond, errc code, const std::string& what) {
    if (!cond) fail(code, what);
}

}  // namespace tsi
