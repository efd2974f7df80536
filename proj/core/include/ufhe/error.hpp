#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ufhe {

enum class Errc {
  not_enough_primes,
  order_not_dividing,
  bad_length,
  rep_mismatch,
  basis_mismatch,
  missing_plan,
  basis_too_small,
  not_coprime,
  factorization_mismatch,
  wrong_slot_count,
  out_of_range,
  noise_budget_exhausted,
  level_mismatch,
  out_of_levels,
  missing_galois_key,
  unsupported_p,
  alphabet_violation,
  worker_panic,
  length_mismatch,
  already_consumed,
  comparison_failed,
  capacity_exceeded,
  bad_format,
  config,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

inline std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::not_enough_primes: return "NotEnoughPrimes";
    case Errc::order_not_dividing: return "OrderNotDividing";
    case Errc::bad_length: return "BadLength";
    case Errc::rep_mismatch: return "RepMismatch";
    case Errc::basis_mismatch: return "BasisMismatch";
    case Errc::missing_plan: return "MissingPlan";
    case Errc::basis_too_small: return "BasisTooSmall";
    case Errc::not_coprime: return "NotCoprime";
    case Errc::factorization_mismatch: return "FactorizationMismatch";
    case Errc::wrong_slot_count: return "WrongSlotCount";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::noise_budget_exhausted: return "NoiseBudgetExhausted";
    case Errc::level_mismatch: return "LevelMismatch";
    case Errc::out_of_levels: return "OutOfLevels";
    case Errc::missing_galois_key: return "MissingGaloisKey";
    case Errc::unsupported_p: return "UnsupportedP";
    case Errc::alphabet_violation: return "AlphabetViolation";
    case Errc::worker_panic: return "WorkerPanic";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::already_consumed: return "AlreadyConsumed";
    case Errc::comparison_failed: return "ComparisonFailed";
    case Errc::capacity_exceeded: return "CapacityExceeded";
    case Errc::bad_format: return "BadFormat";
    case Errc::config: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace ufhe
