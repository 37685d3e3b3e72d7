#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wbplab/gf2codes.hpp"

namespace wbplab {

// Ordered statistics decoding: re-encode flip patterns of weight <= order
// over the K most reliable linearly independent positions and keep the
// candidate with the best correlation sum_v llr_v * (-1)^{c_v}.
struct OsdConfig {
    unsigned order = 3;
};

std::vector<std::uint8_t> osd_decode(const Code& code,
                                     std::span<const double> llr,
                                     const OsdConfig& cfg);

}  // namespace wbplab
