#pragma once

#include <string>

namespace extsumm {

// The 1980 Porter suffix-stripping algorithm, as published: step 2 maps
// "abli" to "able", there is no "logi" rule, and short words are not
// exempted. Input must already be lowercase ASCII.
std::string porter_stem(const std::string& word);

}  // namespace extsumm
