#pragma once

#include <stdexcept>
#include <string>

namespace ebff {

enum class Errc {
    NomeOutOfRange,
    Overflow,
    ZeroArgument,
    BadModulus,
    PoleHit,
    NegativeInput,
    NonpositiveM,
    InvalidParams,
    RangeError,
    SingularHeight,
    TailMismatch,
    CombinatorialBlowup,
    BadCommutators,
    SpecMissing,
    UnregisteredPair,
    AnnulusEmpty,
    ContourOnPole,
    UnknownCheck,
    ConfigError,
};

const char* errc_name(Errc c);

// Precondition-type errors map to CLI exit code 3, usage errors to 2.
bool is_precondition(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string detail);
    Errc code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    Errc code_;
    std::string detail_;
};

[[noreturn]] void fail(Errc code, const std::string& detail);

} // namespace ebff
