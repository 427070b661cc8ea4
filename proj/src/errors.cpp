#include "ebff/errors.hpp"

namespace ebff {

const char* errc_name(Errc c)
{
    switch (c) {
    case Errc::NomeOutOfRange: return "NomeOutOfRange";
    case Errc::Overflow: return "Overflow";
    case Errc::ZeroArgument: return "ZeroArgument";
    case Errc::BadModulus: return "BadModulus";
    case Errc::PoleHit: return "PoleHit";
    case Errc::NegativeInput: return "NegativeInput";
    case Errc::NonpositiveM: return "NonpositiveM";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::RangeError: return "RangeError";
    case Errc::SingularHeight: return "SingularHeight";
    case Errc::TailMismatch: return "TailMismatch";
    case Errc::CombinatorialBlowup: return "CombinatorialBlowup";
    case Errc::BadCommutators: return "BadCommutators";
    case Errc::SpecMissing: return "SpecMissing";
    case Errc::UnregisteredPair: return "UnregisteredPair";
    case Errc::AnnulusEmpty: return "AnnulusEmpty";
    case Errc::ContourOnPole: return "ContourOnPole";
    case Errc::UnknownCheck: return "UnknownCheck";
    case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

bool is_precondition(Errc c)
{
    return c != Errc::UnknownCheck && c != Errc::ConfigError;
}

Error::Error(Errc code, std::string detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
      code_(code), detail_(std::move(detail))
{
}

void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

} // namespace ebff
