#include "mgtc/embeddings.hpp"

#include <fstream>
#include <sstream>

#include "mgtc/errors.hpp"

namespace mgtc {

EmbeddingLoadReport load_text_embeddings(const std::string& path, const Vocab& vocab, Tensor& matrix) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open embedding file: " + path);
    if (matrix.ndim() != 2 || matrix.rows() != vocab.size())
        throw ShapeError("embedding matrix must be vocab_size x dim");
    const int dim = matrix.cols();

    EmbeddingLoadReport report;
    report.dim = dim;
    std::vector<bool> seen(static_cast<size_t>(vocab.size()), false);

    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string tok;
        is >> tok;
        std::vector<float> vals;
        float v;
        while (is >> v) vals.push_back(v);
        if (first) {
            first = false;
            // header "count dim": first field numeric and exactly one value after it
            char* end = nullptr;
            std::strtod(tok.c_str(), &end);
            if (end && *end == '\0' && vals.size() == 1) continue;
        }
        if (static_cast<int>(vals.size()) != dim)
            throw FormatError("embedding file line " + std::to_string(lineno) + ": expected " +
                              std::to_string(dim) + " values, got " + std::to_string(vals.size()));
        auto it = vocab.index.find(tok);
        if (it == vocab.index.end()) continue;
        for (int j = 0; j < dim; ++j) matrix.at(it->second, j) = vals[static_cast<size_t>(j)];
        seen[static_cast<size_t>(it->second)] = true;
        ++report.loaded;
    }
    for (int i = 2; i < vocab.size(); ++i)  // pad/oov rows keep their init
        if (!seen[static_cast<size_t>(i)]) ++report.missing;
    return report;
}

}  // namespace mgtc
