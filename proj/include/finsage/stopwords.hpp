#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>

namespace finsage {

// Fixed English stopword list compiled into the library. Directional words
// (up, down, above, below, over, under) are deliberately absent: in market
// commentary they carry the label signal. The fingerprint pins the exact
// list so preprocessing examples stay stable across releases.
const std::unordered_set<std::string>& stopwords();
bool is_stopword(const std::string& token);
std::uint64_t stopwords_fingerprint();

}  // namespace finsage
