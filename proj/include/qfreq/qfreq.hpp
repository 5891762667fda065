#pragma once

#include "qfreq/decoherence.hpp"
#include "qfreq/errors.hpp"
#include "qfreq/frequency.hpp"
#include "qfreq/io.hpp"
#include "qfreq/numeric.hpp"
#include "qfreq/readoff.hpp"
#include "qfreq/state.hpp"

namespace qfreq {
inline constexpr const char* kVersion = "1.0.0";
}
