#pragma once

namespace ofc {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kModelFormat = "ofckit-model/1";
inline constexpr const char* kPreparedFormat = "ofckit-prepared/1";
inline constexpr const char* kEnsembleFormat = "ofckit-ensemble/1";

} // namespace ofc
