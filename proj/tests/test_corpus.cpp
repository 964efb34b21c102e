#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <set>

#include "doctest.h"
#include "mgtc/corpus.hpp"
#include "mgtc/embeddings.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace mgtc;

namespace {

Sentence action(std::vector<std::string> tokens, std::vector<WordTag> tags) {
    Sentence s;
    s.tokens = std::move(tokens);
    s.word_tags = std::move(tags);
    s.s_type = SentenceType::ACTION;
    for (const auto& t : s.tokens) s.text += (s.text.empty() ? "" : " ") + t;
    return s;
}

Sentence statement(std::vector<std::string> tokens, SentenceSemantic sem) {
    Sentence s;
    s.tokens = std::move(tokens);
    s.s_type = SentenceType::STATEMENT;
    s.s_semantic = sem;
    for (const auto& t : s.tokens) s.text += (s.text.empty() ? "" : " ") + t;
    return s;
}

}  // namespace

TEST_CASE("sentence invariants") {
    Sentence ok_action = action({"chill", "the", "mixture"},
                                {WordTag::ACTION_NAME, WordTag::OTHER, WordTag::OBJECT});
    CHECK(ok_action.validate().empty());

    Sentence bad = ok_action;
    bad.s_semantic = SentenceSemantic::CONCURRENT;
    CHECK_FALSE(bad.validate().empty());

    Sentence stmt = statement({"finish", "two", "steps"}, SentenceSemantic::CONCURRENT);
    CHECK(stmt.validate().empty());
    stmt.word_tags = {WordTag::OTHER, WordTag::OTHER, WordTag::OTHER};
    CHECK(stmt.validate().find("word_tags") != std::string::npos);

    Sentence no_sem = statement({"hello"}, SentenceSemantic::CONCURRENT);
    no_sem.s_semantic.reset();
    CHECK_FALSE(no_sem.validate().empty());

    Sentence wrong_count = action({"a", "b"}, {WordTag::OTHER});
    CHECK_FALSE(wrong_count.validate().empty());
}

TEST_CASE("jsonl load: the worked example sentence loads cleanly") {
    // "chill the mixture for about 20 minutes until it thickens"
    const std::string line =
        R"({"id":"r1","domain":"COR","sentences":[{"tokens":["chill","the","mixture","for","about","20","minutes","until","it","thickens"],"s_type":"ACTION","word_tags":["ACTION_NAME","OTHER","OBJECT","OTHER","OTHER","OTHER","OTHER","OTHER","OTHER","OTHER"]}]})";
    Document d = document_from_json(line);
    CHECK(d.id == "r1");
    CHECK(d.sentences.size() == 1);
    CHECK(d.sentences[0].word_tags[0] == WordTag::ACTION_NAME);
    CHECK(d.sentences[0].tokens[2] == "mixture");
    CHECK(d.sentences[0].text == "chill the mixture for about 20 minutes until it thickens");
}

TEST_CASE("jsonl load: STATEMENT with word_tags is rejected naming the field") {
    const std::string line =
        R"({"id":"bad","sentences":[{"tokens":["do","it"],"s_type":"STATEMENT","s_semantic":"SUCCESSIVE","word_tags":["OTHER","OTHER"]}]})";
    try {
        document_from_json(line);
        FAIL("expected validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("word_tags") != std::string::npos);
    }
}

TEST_CASE("jsonl: empty file is an empty corpus; lenient mode collects warnings") {
    CHECK(parse_corpus_jsonl("", true, nullptr).empty());
    CHECK(parse_corpus_jsonl("\n  \n", true, nullptr).empty());

    const std::string mixed =
        R"({"id":"ok","sentences":[{"tokens":["a"],"s_type":"ACTION","word_tags":["ACTION_NAME"]}]})"
        "\nnot json\n";
    CHECK_THROWS_AS(parse_corpus_jsonl(mixed, true, nullptr), ValidationError);
    std::vector<std::string> warnings;
    auto docs = parse_corpus_jsonl(mixed, false, &warnings);
    CHECK(docs.size() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("line 2") != std::string::npos);
}

TEST_CASE("round trip: load -> serialize -> load is identity") {
    Document d;
    d.id = "doc1";
    d.domain = "MAM";
    d.sentences = {statement({"two", "steps"}, SentenceSemantic::CONCURRENT),
                   action({"chill", "mixture"}, {WordTag::ACTION_NAME, WordTag::OBJECT})};
    std::string json1 = document_to_json(d);
    Document d2 = document_from_json(json1);
    CHECK(document_to_json(d2) == json1);
    CHECK(d2.domain == "MAM");
    CHECK(d2.sentences[0].s_semantic == SentenceSemantic::CONCURRENT);
}

TEST_CASE("semantic spellings: names and symbols both accepted") {
    CHECK(semantic_from_string("+") == SentenceSemantic::CONCURRENT);
    CHECK(semantic_from_string("CONCURRENT") == SentenceSemantic::CONCURRENT);
    CHECK(semantic_from_string("x") == SentenceSemantic::OPTIONAL);
    CHECK(semantic_from_string("|>") == SentenceSemantic::BLOCK_BEGIN);
    CHECK(semantic_from_string("<|") == SentenceSemantic::BLOCK_END);
    CHECK(semantic_from_string(".") == SentenceSemantic::SUCCESSIVE);
    CHECK_THROWS_AS(semantic_from_string("??"), ValidationError);
}

TEST_CASE("corpus stats: counts and categories") {
    Document d1;
    d1.id = "a";
    d1.sentences = {action({"chill", "mixture"}, {WordTag::ACTION_NAME, WordTag::OBJECT}),
                    statement({"steps"}, SentenceSemantic::CONCURRENT)};
    Document d2;
    d2.id = "b";
    d2.sentences = {action({"you", "bake", "bread"},
                           {WordTag::ROLE, WordTag::ACTION_NAME, WordTag::OBJECT})};
    auto st = corpus_stats({d1, d2});
    CHECK(st.documents == 2);
    CHECK(st.sentences == 3);
    CHECK(st.labeled_words == 5);
    CHECK(st.sentence_categories_used == 2);  // ACTION + CONCURRENT
    CHECK(st.word_categories_used == 3);      // no OTHER used

    auto single = corpus_stats({d2});
    CHECK(single.sentences == 1);
    CHECK(single.labeled_words == 3);

    std::string table = stats_table(st, "toy");
    CHECK(table.find("# Labeled Sentences") != std::string::npos);
}

TEST_CASE("stats formats thousands like the reference tables") {
    CorpusStats st;
    st.sentences = 2636;
    st.labeled_words = 14260;
    std::string table = stats_table(st, "cor");
    CHECK(table.find("2,636") != std::string::npos);
    CHECK(table.find("14,260") != std::string::npos);
}

TEST_CASE("vocab: order, specials, tie-break, min_freq") {
    Document d;
    d.id = "v";
    d.sentences = {action({"b", "a", "a", "c"},
                          {WordTag::OTHER, WordTag::OTHER, WordTag::OTHER, WordTag::OTHER})};
    SUBCASE("empty corpus keeps only specials") {
        Vocab v = build_vocab({});
        REQUIRE(v.size() == 2);
        CHECK(v.tokens[0] == "<pad>");
        CHECK(v.tokens[1] == "<unk>");
    }
    SUBCASE("frequency then lexicographic") {
        Vocab v = build_vocab({d});
        REQUIRE(v.size() == 5);
        CHECK(v.tokens[2] == "a");  // freq 2
        CHECK(v.tokens[3] == "b");  // freq 1, tie with c -> lexicographic
        CHECK(v.tokens[4] == "c");
        CHECK(v.id("a") == 2);
        CHECK(v.id("zzz") == Vocab::kOov);
    }
    SUBCASE("min_freq drops hapax tokens to oov") {
        Vocab v = build_vocab({d}, 2);
        REQUIRE(v.size() == 3);
        CHECK(v.id("b") == Vocab::kOov);
        CHECK(v.id("a") == 2);
    }
    SUBCASE("hash changes with content") {
        Vocab v1 = build_vocab({d});
        Vocab v2 = build_vocab({});
        CHECK(v1.hash() != v2.hash());
        CHECK(v1.hash() == build_vocab({d}).hash());
    }
}

TEST_CASE("split: 8:2 document-level, deterministic, partitioning") {
    std::vector<Document> docs;
    for (int i = 0; i < 10; ++i) {
        Document d;
        d.id = "d" + std::to_string(i);
        d.sentences = {action({"a"}, {WordTag::ACTION_NAME})};
        docs.push_back(d);
    }
    SplitSpec spec;
    spec.seed = 42;
    Split s1 = split_corpus(docs, spec);
    CHECK(s1.train.size() == 8);
    CHECK(s1.test.size() == 2);

    Split s2 = split_corpus(docs, spec);
    for (size_t i = 0; i < s1.train.size(); ++i) CHECK(s1.train[i].id == s2.train[i].id);

    std::set<std::string> seen;
    for (const auto& d : s1.train) seen.insert(d.id);
    for (const auto& d : s1.test) CHECK(seen.insert(d.id).second);
    CHECK(seen.size() == 10);

    std::vector<Document> one(docs.begin(), docs.begin() + 1);
    CHECK_THROWS_AS(split_corpus(one, spec), ValidationError);
}

TEST_CASE("kfold: disjoint exhaustive folds, deterministic under seed") {
    std::vector<Document> docs;
    for (int i = 0; i < 10; ++i) {
        Document d;
        d.id = "d" + std::to_string(i);
        d.sentences = {action({"a"}, {WordTag::ACTION_NAME})};
        docs.push_back(d);
    }
    auto folds = kfold_split(docs, 5, 7);
    REQUIRE(folds.size() == 5);
    std::set<std::string> seen;
    for (const auto& f : folds) {
        CHECK(f.size() == 2);
        for (const auto& d : f) CHECK(seen.insert(d.id).second);
    }
    CHECK(seen.size() == 10);

    auto folds2 = kfold_split(docs, 5, 7);
    for (size_t i = 0; i < folds.size(); ++i)
        for (size_t j = 0; j < folds[i].size(); ++j) CHECK(folds[i][j].id == folds2[i][j].id);

    CHECK_THROWS_AS(kfold_split(docs, 1, 0), ValidationError);
    CHECK_THROWS_AS(kfold_split(docs, 11, 0), ValidationError);

    std::vector<Document> four(docs.begin(), docs.begin() + 4);
    auto two = kfold_split(four, 2, 3);
    CHECK(two[0].size() == 2);
    CHECK(two[1].size() == 2);
}

TEST_CASE("tokenize fallback") {
    auto toks = tokenize("Chill the mixture, then bake!");
    REQUIRE(toks.size() == 7);
    CHECK(toks[0] == "chill");
    CHECK(toks[3] == ",");
    CHECK(toks[6] == "!");
    CHECK(tokenize("  ").empty());
}

TEST_CASE("embedding loader: header detection, oov handling, dim check") {
    namespace fs = std::filesystem;
    Document d;
    d.id = "e";
    d.sentences = {action({"alpha", "beta"}, {WordTag::ACTION_NAME, WordTag::OBJECT})};
    Vocab vocab = build_vocab({d});

    const std::string path = (fs::temp_directory_path() / "mgtc_vec_test.txt").string();
    {
        std::ofstream f(path);
        f << "3 4\n";
        f << "alpha 1 2 3 4\n";
        f << "unseen 9 9 9 9\n";
        f << "beta 0.5 0.5 0.5 0.5\n";
    }
    Tensor matrix({vocab.size(), 4});
    auto rep = load_text_embeddings(path, vocab, matrix);
    CHECK(rep.loaded == 2);
    CHECK(rep.missing == 0);
    CHECK(matrix.at(vocab.id("alpha"), 0) == 1.0f);
    CHECK(matrix.at(vocab.id("beta"), 3) == 0.5f);

    {
        std::ofstream f(path);
        f << "alpha 1 2 3\n";  // wrong dim, no header
    }
    CHECK_THROWS_AS(load_text_embeddings(path, vocab, matrix), FormatError);
    std::remove(path.c_str());
}
