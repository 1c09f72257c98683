#pragma once

#include <string>
#include <string_view>

namespace substory {

// Porter stemming algorithm (Porter 1980), matching the reference
// implementation distributed by its author, including its documented
// departures from the paper (bli -> ble, logi -> log, 2-letter guard).
// Tokens containing anything outside [a-z] are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace substory
