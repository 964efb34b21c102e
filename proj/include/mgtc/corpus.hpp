#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mgtc/errors.hpp"

namespace mgtc {

enum class WordTag { ROLE, ACTION_NAME, OBJECT, OTHER };
constexpr int kNumWordTags = 4;

enum class SentenceSemantic { BLOCK_BEGIN, BLOCK_END, SUCCESSIVE, OPTIONAL, CONCURRENT };
constexpr int kNumSemantics = 5;

enum class SentenceType { ACTION, STATEMENT };

const char* to_string(WordTag t);
const char* to_string(SentenceSemantic s);
const char* to_string(SentenceType t);
const char* to_symbol(SentenceSemantic s);  // one of |> <| . x +

WordTag word_tag_from_string(const std::string& s);
SentenceSemantic semantic_from_string(const std::string& s);
SentenceType sentence_type_from_string(const std::string& s);

struct Sentence {
    std::string text;
    std::vector<std::string> tokens;
    SentenceType s_type = SentenceType::ACTION;
    std::optional<SentenceSemantic> s_semantic;  // STATEMENT only
    std::vector<WordTag> word_tags;              // ACTION only, one per token

    // ACTION => no semantic, |word_tags| == |tokens|; STATEMENT => semantic
    // set, no word tags. Returns an error message or empty string.
    std::string validate() const;
};

struct Document {
    std::string id;
    std::string domain;  // "COR", "MAM", or other
    std::vector<Sentence> sentences;
};

struct CorpusStats {
    int64_t documents = 0;
    int64_t sentences = 0;
    int64_t labeled_words = 0;          // word tags over ACTION sentences
    int sentence_categories_used = 0;   // distinct over {ACTION} + semantics
    int word_categories_used = 0;
};

struct SplitSpec {
    enum class Mode { Ratio82, KFold };
    Mode mode = Mode::Ratio82;
    int folds = 0;  // KFold only
    uint64_t seed = 0;
};

struct Split {
    std::vector<Document> train, test;
};

// JSON-lines corpus: one document object per line. In strict mode any
// invariant violation throws; lenient mode skips bad documents and collects
// warnings.
std::vector<Document> load_corpus(const std::string& path, bool strict = true,
                                  std::vector<std::string>* warnings = nullptr);
std::vector<Document> parse_corpus_jsonl(const std::string& content, bool strict,
                                         std::vector<std::string>* warnings);
void save_corpus(const std::vector<Document>& docs, const std::string& path);
std::string document_to_json(const Document& doc);
Document document_from_json(const std::string& line);

CorpusStats corpus_stats(const std::vector<Document>& docs);
std::string stats_table(const CorpusStats& s, const std::string& label);

// Fallback tokenizer for raw text: splits on whitespace, peels punctuation.
std::vector<std::string> tokenize(const std::string& text);

struct Vocab {
    std::vector<std::string> tokens;  // index order; [0]=<pad>, [1]=<unk>
    std::unordered_map<std::string, int> index;

    static constexpr int kPad = 0;
    static constexpr int kOov = 1;

    int id(const std::string& tok) const {
        auto it = index.find(tok);
        return it == index.end() ? kOov : it->second;
    }
    int size() const { return static_cast<int>(tokens.size()); }
    uint64_t hash() const;  // FNV-1a over tokens in index order
};

// Frequency-descending order with lexicographic tie-break; tokens below
// min_freq fall back to oov.
Vocab build_vocab(const std::vector<Document>& docs, int min_freq = 1);

std::vector<int> token_ids(const Vocab& vocab, const std::vector<std::string>& tokens);

// Document-level split: no sentence of one document lands on both sides.
Split split_corpus(const std::vector<Document>& docs, const SplitSpec& spec);
std::vector<std::vector<Document>> kfold_split(const std::vector<Document>& docs, int folds, uint64_t seed);

}  // namespace mgtc
