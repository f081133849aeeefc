#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace crowdaudit::overlap {

struct CommonSubstring {
  std::size_t length = 0;  // in code points
  std::string text;        // UTF-8
};

/// Longest contiguous substring shared by `a` and `b`, compared code point by
/// code point with no normalization. Among equally long candidates the one
/// starting earliest in `a` wins. Runs in O(|a| + |b| log sigma) using a
/// suffix automaton of `b`.
CommonSubstring longest_common_substring(std::u32string_view a, std::u32string_view b);
CommonSubstring longest_common_substring(std::string_view a, std::string_view b);

struct OverlapOptions {
  // NFC plus collapsing whitespace runs to one space before matching.
  bool normalize = true;
  double low_overlap_threshold = 0.10;
};

struct OverlapResult {
  std::string summary_id;
  std::string abstract_id;
  std::size_t lcs_length = 0;
  std::string lcs_text;
  std::size_t abstract_length = 0;
  double ratio = 0.0;  // lcs_length / abstract_length
};

// The text actually compared when `options.normalize` is set.
std::string normalize_for_matching(std::string_view text);

// Throws ValidationError if the abstract is empty.
double overlap_ratio(std::string_view summary, std::string_view abstract, const OverlapOptions& options = {});

OverlapResult compute_overlap(std::string summary_id, std::string_view summary, std::string abstract_id,
                              std::string_view abstract, const OverlapOptions& options = {});

// Strict: a ratio equal to the threshold is not low.
inline bool low_overlap(const OverlapResult& result, double threshold = 0.10) { return result.ratio < threshold; }

// Columns: summary_id, abstract_id, lcs_length, abstract_length, ratio.
void write_overlap_csv(std::ostream& out, const std::vector<OverlapResult>& results);

}  // namespace crowdaudit::overlap
