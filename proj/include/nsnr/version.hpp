#pragma once

namespace nsnr {

inline constexpr char kVersion[] = "0.1.0";

// Per-trial stream derivation scheme; recorded in every CSV output so results
// can be tied to the generator that produced them.
inline constexpr char kRngName[] = "mt19937_64/seedseq-splitmix64/v1";

}  // namespace nsnr
