#pragma once

#include <cstdint>

#include "crowdaudit/corpus.hpp"

namespace crowdaudit {

// Two templated text families standing in for casual human summaries and
// polished model output. Items are spread round-robin over `n_abstracts`
// placeholder abstracts; labels alternate human/synthetic.
corpus::Corpus make_toy_corpus(std::size_t n_items = 200, std::uint64_t seed = 7, std::size_t n_abstracts = 8);

}  // namespace crowdaudit
