#include "crowdaudit/overlap.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "crowdaudit/csv.hpp"
#include "crowdaudit/error.hpp"
#include "crowdaudit/text.hpp"

namespace crowdaudit::overlap {
namespace {

class SuffixAutomaton {
 public:
  explicit SuffixAutomaton(std::u32string_view s) {
    states_.reserve(2 * s.size() + 1);
    states_.push_back({});
    for (char32_t c : s) extend(c);
  }

  // Walks `a` through the automaton and returns (length, end index in a) of the
  // longest match, preferring the earliest end on ties.
  std::pair<std::size_t, std::size_t> longest_match(std::u32string_view a) const {
    int state = 0;
    std::size_t current = 0;
    std::size_t best = 0;
    std::size_t best_end = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const char32_t c = a[i];
      while (state != 0 && !states_[state].next.contains(c)) {
        state = states_[state].link;
        current = static_cast<std::size_t>(states_[state].len);
      }
      if (auto it = states_[state].next.find(c); it != states_[state].next.end()) {
        state = it->second;
        ++current;
      } else {
        current = 0;
      }
      if (current > best) {
        best = current;
        best_end = i + 1;
      }
    }
    return {best, best_end};
  }

 private:
  struct State {
    int len = 0;
    int link = -1;
    std::map<char32_t, int> next;
  };

  void extend(char32_t c) {
    const int cur = static_cast<int>(states_.size());
    states_.push_back({states_[last_].len + 1, -1, {}});
    int p = last_;
    while (p != -1 && !states_[p].next.contains(c)) {
      states_[p].next[c] = cur;
      p = states_[p].link;
    }
    if (p == -1) {
      states_[cur].link = 0;
    } else {
      const int q = states_[p].next[c];
      if (states_[p].len + 1 == states_[q].len) {
        states_[cur].link = q;
      } else {
        const int clone = static_cast<int>(states_.size());
        State copy = states_[q];
        copy.len = states_[p].len + 1;
        states_.push_back(std::move(copy));
        while (p != -1) {
          auto it = states_[p].next.find(c);
          if (it == states_[p].next.end() || it->second != q) break;
          it->second = clone;
          p = states_[p].link;
        }
        states_[q].link = clone;
        states_[cur].link = clone;
      }
    }
    last_ = cur;
  }

  std::vector<State> states_;
  int last_ = 0;
};

}  // namespace

CommonSubstring longest_common_substring(std::u32string_view a, std::u32string_view b) {
  if (a.empty() || b.empty()) return {};
  const SuffixAutomaton automaton(b);
  const auto [length, end] = automaton.longest_match(a);
  return {length, text::to_utf8(a.substr(end - length, length))};
}

CommonSubstring longest_common_substring(std::string_view a, std::string_view b) {
  return longest_common_substring(std::u32string_view(text::to_u32(a)), std::u32string_view(text::to_u32(b)));
}

std::string normalize_for_matching(std::string_view text) { return text::collapse_whitespace(text::nfc(text)); }

OverlapResult compute_overlap(std::string summary_id, std::string_view summary, std::string abstract_id,
                              std::string_view abstract, const OverlapOptions& options) {
  const std::string s = options.normalize ? normalize_for_matching(summary) : std::string(summary);
  const std::string a = options.normalize ? normalize_for_matching(abstract) : std::string(abstract);
  const std::u32string a32 = text::to_u32(a);
  if (a32.empty()) throw ValidationError("overlap: abstract '" + abstract_id + "' is empty");
  const auto lcs = longest_common_substring(std::u32string_view(text::to_u32(s)), std::u32string_view(a32));
  OverlapResult r;
  r.summary_id = std::move(summary_id);
  r.abstract_id = std::move(abstract_id);
  r.lcs_length = lcs.length;
  r.lcs_text = lcs.text;
  r.abstract_length = a32.size();
  r.ratio = static_cast<double>(lcs.length) / static_cast<double>(a32.size());
  return r;
}

double overlap_ratio(std::string_view summary, std::string_view abstract, const OverlapOptions& options) {
  return compute_overlap("", summary, "", abstract, options).ratio;
}

void write_overlap_csv(std::ostream& out, const std::vector<OverlapResult>& results) {
  out << "summary_id,abstract_id,lcs_length,abstract_length,ratio\n";
  for (const auto& r : results) {
    out << csv::join({r.summary_id, r.abstract_id, std::to_string(r.lcs_length), std::to_string(r.abstract_length),
                      csv::format_double(r.ratio)})
        << '\n';
  }
}

}  // namespace crowdaudit::overlap
