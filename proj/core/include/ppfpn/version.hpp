#pragma once

namespace ppfpn {

inline constexpr const char* library_version = "ppfpn 1.0.0";

}
