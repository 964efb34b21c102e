#include "mgtc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mgtc/rng.hpp"

namespace mgtc {

using nlohmann::json;

const char* to_string(WordTag t) {
    switch (t) {
        case WordTag::ROLE: return "ROLE";
        case WordTag::ACTION_NAME: return "ACTION_NAME";
        case WordTag::OBJECT: return "OBJECT";
        case WordTag::OTHER: return "OTHER";
    }
    return "?";
}

const char* to_string(SentenceSemantic s) {
    switch (s) {
        case SentenceSemantic::BLOCK_BEGIN: return "BLOCK_BEGIN";
        case SentenceSemantic::BLOCK_END: return "BLOCK_END";
        case SentenceSemantic::SUCCESSIVE: return "SUCCESSIVE";
        case SentenceSemantic::OPTIONAL: return "OPTIONAL";
        case SentenceSemantic::CONCURRENT: return "CONCURRENT";
    }
    return "?";
}

const char* to_symbol(SentenceSemantic s) {
    switch (s) {
        case SentenceSemantic::BLOCK_BEGIN: return "|>";
        case SentenceSemantic::BLOCK_END: return "<|";
        case SentenceSemantic::SUCCESSIVE: return ".";
        case SentenceSemantic::OPTIONAL: return "x";
        case SentenceSemantic::CONCURRENT: return "+";
    }
    return "?";
}

const char* to_string(SentenceType t) { return t == SentenceType::ACTION ? "ACTION" : "STATEMENT"; }

WordTag word_tag_from_string(const std::string& s) {
    if (s == "ROLE") return WordTag::ROLE;
    if (s == "ACTION_NAME") return WordTag::ACTION_NAME;
    if (s == "OBJECT") return WordTag::OBJECT;
    if (s == "OTHER") return WordTag::OTHER;
    throw ValidationError("unknown word tag: " + s);
}

SentenceSemantic semantic_from_string(const std::string& s) {
    if (s == "BLOCK_BEGIN" || s == "|>" || s == "▷") return SentenceSemantic::BLOCK_BEGIN;
    if (s == "BLOCK_END" || s == "<|" || s == "◁") return SentenceSemantic::BLOCK_END;
    if (s == "SUCCESSIVE" || s == "." || s == "•") return SentenceSemantic::SUCCESSIVE;
    if (s == "OPTIONAL" || s == "x" || s == "×") return SentenceSemantic::OPTIONAL;
    if (s == "CONCURRENT" || s == "+") return SentenceSemantic::CONCURRENT;
    throw ValidationError("unknown sentence semantic: " + s);
}

SentenceType sentence_type_from_string(const std::string& s) {
    if (s == "ACTION") return SentenceType::ACTION;
    if (s == "STATEMENT") return SentenceType::STATEMENT;
    throw ValidationError("unknown sentence type: " + s);
}

std::string Sentence::validate() const {
    if (tokens.empty()) return "sentence has no tokens";
    if (s_type == SentenceType::ACTION) {
        if (s_semantic.has_value()) return "ACTION sentence carries s_semantic";
        if (word_tags.size() != tokens.size())
            return "ACTION sentence needs one word_tag per token (got " + std::to_string(word_tags.size()) +
                   " tags for " + std::to_string(tokens.size()) + " tokens)";
    } else {
        if (!word_tags.empty()) return "STATEMENT sentence carries word_tags";
        if (!s_semantic.has_value()) return "STATEMENT sentence is missing s_semantic";
    }
    return "";
}

static Sentence sentence_from_json(const json& j) {
    Sentence s;
    s.text = j.value("text", "");
    for (const auto& t : j.at("tokens")) s.tokens.push_back(t.get<std::string>());
    if (s.text.empty()) {
        std::ostringstream os;
        for (size_t i = 0; i < s.tokens.size(); ++i) os << (i ? " " : "") << s.tokens[i];
        s.text = os.str();
    }
    s.s_type = sentence_type_from_string(j.at("s_type").get<std::string>());
    if (j.contains("s_semantic") && !j.at("s_semantic").is_null())
        s.s_semantic = semantic_from_string(j.at("s_semantic").get<std::string>());
    if (j.contains("word_tags"))
        for (const auto& t : j.at("word_tags")) s.word_tags.push_back(word_tag_from_string(t.get<std::string>()));
    return s;
}

static json sentence_to_json(const Sentence& s) {
    json j;
    j["text"] = s.text;
    j["tokens"] = s.tokens;
    j["s_type"] = to_string(s.s_type);
    if (s.s_semantic) j["s_semantic"] = to_string(*s.s_semantic);
    if (!s.word_tags.empty()) {
        json tags = json::array();
        for (WordTag t : s.word_tags) tags.push_back(to_string(t));
        j["word_tags"] = tags;
    }
    return j;
}

Document document_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what());
    }
    Document d;
    try {
        d.id = j.at("id").get<std::string>();
        d.domain = j.value("domain", "other");
        int idx = 0;
        for (const auto& sj : j.at("sentences")) {
            Sentence s = sentence_from_json(sj);
            std::string err = s.validate();
            if (!err.empty())
                throw ValidationError("document " + d.id + ", sentence " + std::to_string(idx) + ": " + err);
            d.sentences.push_back(std::move(s));
            ++idx;
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("bad document object: ") + e.what());
    }
    if (d.sentences.empty()) throw ValidationError("document " + d.id + " has no sentences");
    return d;
}

std::string document_to_json(const Document& doc) {
    json j;
    j["id"] = doc.id;
    j["domain"] = doc.domain;
    json arr = json::array();
    for (const auto& s : doc.sentences) arr.push_back(sentence_to_json(s));
    j["sentences"] = arr;
    return j.dump();
}

std::vector<Document> parse_corpus_jsonl(const std::string& content, bool strict,
                                         std::vector<std::string>* warnings) {
    std::vector<Document> docs;
    std::istringstream in(content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            docs.push_back(document_from_json(line));
        } catch (const std::runtime_error& e) {
            std::string msg = "line " + std::to_string(lineno) + ": " + e.what();
            if (strict) throw ValidationError(msg);
            if (warnings) warnings->push_back(msg);
        }
    }
    return docs;
}

std::vector<Document> load_corpus(const std::string& path, bool strict, std::vector<std::string>* warnings) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open corpus file: " + path);
    std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_corpus_jsonl(content, strict, warnings);
}

void save_corpus(const std::vector<Document>& docs, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot open corpus file for writing: " + path);
    for (const auto& d : docs) f << document_to_json(d) << "\n";
}

CorpusStats corpus_stats(const std::vector<Document>& docs) {
    CorpusStats st;
    std::set<std::string> sentence_cats;
    std::set<WordTag> word_cats;
    st.documents = static_cast<int64_t>(docs.size());
    for (const auto& d : docs)
        for (const auto& s : d.sentences) {
            ++st.sentences;
            if (s.s_type == SentenceType::ACTION) {
                sentence_cats.insert("ACTION");
                st.labeled_words += static_cast<int64_t>(s.word_tags.size());
                for (WordTag t : s.word_tags) word_cats.insert(t);
            } else {
                sentence_cats.insert(to_string(*s.s_semantic));
            }
        }
    st.sentence_categories_used = static_cast<int>(sentence_cats.size());
    st.word_categories_used = static_cast<int>(word_cats.size());
    return st;
}

static std::string with_thousands(int64_t v) {
    std::string raw = std::to_string(v);
    std::string out;
    int c = 0;
    for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
        if (c && c % 3 == 0) out.push_back(',');
        out.push_back(*it);
        ++c;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::string stats_table(const CorpusStats& s, const std::string& label) {
    std::ostringstream os;
    os << "Corpus: " << label << "\n";
    os << "  # Documents                  " << with_thousands(s.documents) << "\n";
    os << "  # Labeled Sentences          " << with_thousands(s.sentences) << "\n";
    os << "  # Labeled Words              " << with_thousands(s.labeled_words) << "\n";
    os << "  # Sentence-Level Categories  " << s.sentence_categories_used << "\n";
    os << "  # Word-Level Categories      " << s.word_categories_used << "\n";
    return os.str();
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    };
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            flush();
        } else if (std::ispunct(c) && c != '\'' && c != '-') {
            flush();
            out.push_back(std::string(1, ch));
        } else {
            cur.push_back(static_cast<char>(std::tolower(c)));
        }
    }
    flush();
    return out;
}

uint64_t Vocab::hash() const {
    uint64_t h = 1469598103934665603ull;  // FNV-1a
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 1099511628211ull;
    };
    for (const auto& t : tokens) {
        for (char c : t) mix(static_cast<unsigned char>(c));
        mix(0);
    }
    return h;
}

Vocab build_vocab(const std::vector<Document>& docs, int min_freq) {
    std::map<std::string, int64_t> freq;
    for (const auto& d : docs)
        for (const auto& s : d.sentences)
            for (const auto& t : s.tokens) ++freq[t];

    std::vector<std::pair<std::string, int64_t>> items(freq.begin(), freq.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocab v;
    v.tokens = {"<pad>", "<unk>"};
    for (const auto& [tok, n] : items) {
        if (n < min_freq) continue;
        v.tokens.push_back(tok);
    }
    for (int i = 0; i < static_cast<int>(v.tokens.size()); ++i) v.index[v.tokens[static_cast<size_t>(i)]] = i;
    return v;
}

std::vector<int> token_ids(const Vocab& vocab, const std::vector<std::string>& tokens) {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(vocab.id(t));
    return ids;
}

Split split_corpus(const std::vector<Document>& docs, const SplitSpec& spec) {
    if (docs.size() < 2) throw ValidationError("split: need at least 2 documents");
    if (spec.mode != SplitSpec::Mode::Ratio82) throw ValidationError("split: use kfold_split for folds");
    std::vector<size_t> order(docs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(spec.seed);
    rng.shuffle(order);
    size_t n_test = static_cast<size_t>(static_cast<double>(docs.size()) * 0.2 + 0.5);
    n_test = std::max<size_t>(1, std::min(n_test, docs.size() - 1));
    Split out;
    for (size_t i = 0; i < order.size(); ++i) {
        if (i < n_test)
            out.test.push_back(docs[order[i]]);
        else
            out.train.push_back(docs[order[i]]);
    }
    return out;
}

std::vector<std::vector<Document>> kfold_split(const std::vector<Document>& docs, int folds, uint64_t seed) {
    if (folds < 2 || folds > static_cast<int>(docs.size()))
        throw ValidationError("kfold: N must be in [2, #documents], got " + std::to_string(folds));
    std::vector<size_t> order(docs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    std::vector<std::vector<Document>> out(static_cast<size_t>(folds));
    for (size_t i = 0; i < order.size(); ++i) out[i % static_cast<size_t>(folds)].push_back(docs[order[i]]);
    return out;
}

}  // namespace mgtc
