#pragma once

#include <string>

#include "mgtc/corpus.hpp"
#include "mgtc/tensor.hpp"

namespace mgtc {

struct EmbeddingLoadReport {
    int loaded = 0;   // vocab tokens found in the file
    int missing = 0;  // vocab tokens absent (rows left at their init values)
    int dim = 0;
};

// Whitespace-delimited text vectors, one "token v1 ... vD" per line. An
// optional "count dim" header line is detected and skipped. Rows of `matrix`
// (vocab_size x dim) are overwritten for tokens present in both the file and
// the vocab.
EmbeddingLoadReport load_text_embeddings(const std::string& path, const Vocab& vocab, Tensor& matrix);

}  // namespace mgtc
