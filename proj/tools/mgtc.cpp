#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mgtc/assembler.hpp"
#include "mgtc/corpus.hpp"
#include "mgtc/evaluator.hpp"
#include "mgtc/gradcheck.hpp"
#include "mgtc/model.hpp"
#include "mgtc/trainer.hpp"

namespace fs = std::filesystem;
using namespace mgtc;
using nlohmann::json;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot write " + path);
    f << content;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

std::vector<int> parse_windows(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw ValidationError("--windows: no window sizes given");
    return out;
}

struct CommonTrainFlags {
    std::string corpus, out, log_path, embeddings, split = "none";
    uint64_t seed = 0, split_seed = 0;
    int iterations = 1000, batch = 32, hid = 64, filters = 32, mlp_layers = 2, mlp_hidden = 64,
        embed_dim = 100, eval_every = 50;
    double lr = 1e-4, lambda1 = 0.5, dev_fraction = 0.1;
    std::string windows = "1,2,3", summary = "final";
    bool timing = false, train_embeddings = false;
};

void add_train_flags(CLI::App* cmd, CommonTrainFlags& f, bool coarse) {
    cmd->add_option("--corpus", f.corpus, "corpus file (JSON lines)")->required();
    cmd->add_option("--out", f.out, "output checkpoint path")->required();
    cmd->add_option("--seed", f.seed, "run seed");
    cmd->add_option("--iterations", f.iterations, "mini-batch steps");
    cmd->add_option("--batch", f.batch, "mini-batch size");
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--eval-every", f.eval_every, "dev evaluation interval");
    cmd->add_option("--dev-fraction", f.dev_fraction, "dev slice carved from the train documents");
    cmd->add_option("--log", f.log_path, "write the training log CSV here");
    cmd->add_option("--split", f.split, "none | ratio (8:2 document split; train side is used)");
    cmd->add_option("--split-seed", f.split_seed, "seed for --split ratio");
    cmd->add_flag("--timing", f.timing, "include wall-clock millis in the log CSV");
    if (coarse) {
        cmd->add_option("--lambda1", f.lambda1, "ST1 loss weight; ST2 gets 1-lambda1");
        cmd->add_option("--windows", f.windows, "conv window sizes, e.g. 1,2,3");
        cmd->add_option("--hid", f.hid, "Bi-LSTM hidden size per direction");
        cmd->add_option("--filters", f.filters, "conv filters per window size");
        cmd->add_option("--mlp-layers", f.mlp_layers, "linear layers per head");
        cmd->add_option("--mlp-hidden", f.mlp_hidden, "hidden width of the heads");
        cmd->add_option("--embed-dim", f.embed_dim, "word vector size");
        cmd->add_option("--summary", f.summary, "sentence summary: final | mean");
        cmd->add_option("--embeddings", f.embeddings, "pretrained text vectors (loaded rows are frozen)");
        cmd->add_flag("--train-embeddings", f.train_embeddings, "keep pretrained embeddings trainable");
    }
}

HyperParams hp_from_flags(const CommonTrainFlags& f) {
    HyperParams hp;
    hp.embed_dim = f.embed_dim;
    hp.hid = f.hid;
    hp.window_sizes = parse_windows(f.windows);
    hp.filters_per_size = f.filters;
    hp.mlp_layers = f.mlp_layers;
    hp.mlp_hidden = f.mlp_hidden;
    hp.lambda1 = f.lambda1;
    hp.lambda2 = 1.0 - f.lambda1;
    hp.batch = f.batch;
    hp.lr = f.lr;
    hp.iterations = f.iterations;
    hp.seed = f.seed;
    if (f.summary == "final")
        hp.summary = SummaryMode::FinalStates;
    else if (f.summary == "mean")
        hp.summary = SummaryMode::MeanHidden;
    else
        throw ValidationError("--summary must be final or mean");
    hp.validate();
    return hp;
}

std::vector<Document> load_split_side(const std::string& corpus, const std::string& split,
                                      uint64_t split_seed, bool test_side, bool strict) {
    std::vector<std::string> warnings;
    auto docs = load_corpus(corpus, strict, strict ? nullptr : &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (split == "none") return docs;
    if (split != "ratio") throw ValidationError("--split must be none or ratio");
    SplitSpec spec;
    spec.mode = SplitSpec::Mode::Ratio82;
    spec.seed = split_seed;
    Split s = split_corpus(docs, spec);
    return test_side ? s.test : s.train;
}

void save_model(const std::string& path, const ParamStore& store, const ModelConfig& cfg) {
    save_checkpoint(store, path);
    save_model_config(path + ".json", cfg);
}

std::pair<ModelConfig, ParamStore> load_model(const std::string& path) {
    ParamStore store = load_checkpoint(path);
    ModelConfig cfg = load_model_config(path + ".json");
    return {std::move(cfg), std::move(store)};
}

// ---- converter for raw annotated dumps ----
//
// Input format: documents begin with "# doc: <id> [domain]"; each following
// non-empty line is "<sentence-label>\t<token>[/<word-label>] ...". The
// mapping file translates dump labels into the canonical schema:
//   {"sentence_labels": {"A":  {"s_type": "ACTION"},
//                        "C+": {"s_type": "STATEMENT", "s_semantic": "CONCURRENT"}},
//    "word_labels": {"B-V": "ACTION_NAME", "O": "OTHER"}}

int run_convert(const std::string& in_path, const std::string& map_path, const std::string& out_path,
                const std::string& default_domain) {
    json mapping;
    try {
        mapping = json::parse(read_file(map_path));
    } catch (const json::exception& e) {
        throw FormatError(std::string("mapping file: ") + e.what());
    }
    const auto& sent_map = mapping.at("sentence_labels");
    const auto& word_map = mapping.at("word_labels");

    std::istringstream in(read_file(in_path));
    std::vector<Document> docs;
    Document cur;
    bool open = false;
    auto flush = [&] {
        if (open && !cur.sentences.empty()) docs.push_back(cur);
        cur = Document{};
        open = false;
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# doc:", 0) == 0) {
            flush();
            std::istringstream hs(line.substr(6));
            hs >> cur.id >> cur.domain;
            if (cur.domain.empty()) cur.domain = default_domain;
            open = true;
            continue;
        }
        if (!open) throw FormatError("line " + std::to_string(lineno) + ": sentence before any '# doc:' header");
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw FormatError("line " + std::to_string(lineno) + ": expected '<label>\\t<tokens>'");
        const std::string label = line.substr(0, tab);
        if (!sent_map.contains(label))
            throw ValidationError("line " + std::to_string(lineno) + ": sentence label '" + label +
                                  "' missing from the mapping file");
        const auto& smap = sent_map.at(label);
        Sentence s;
        s.s_type = sentence_type_from_string(smap.at("s_type").get<std::string>());
        if (smap.contains("s_semantic"))
            s.s_semantic = semantic_from_string(smap.at("s_semantic").get<std::string>());
        std::istringstream ts(line.substr(tab + 1));
        std::string item;
        while (ts >> item) {
            if (s.s_type == SentenceType::ACTION) {
                auto slash = item.rfind('/');
                if (slash == std::string::npos)
                    throw FormatError("line " + std::to_string(lineno) + ": token '" + item +
                                      "' lacks a /word-label on an action sentence");
                const std::string wlabel = item.substr(slash + 1);
                if (!word_map.contains(wlabel))
                    throw ValidationError("line " + std::to_string(lineno) + ": word label '" + wlabel +
                                          "' missing from the mapping file");
                s.tokens.push_back(item.substr(0, slash));
                s.word_tags.push_back(word_tag_from_string(word_map.at(wlabel).get<std::string>()));
            } else {
                auto slash = item.rfind('/');
                s.tokens.push_back(slash == std::string::npos ? item : item.substr(0, slash));
            }
        }
        std::string err = s.validate();
        if (!err.empty()) throw ValidationError("line " + std::to_string(lineno) + ": " + err);
        cur.sentences.push_back(std::move(s));
    }
    flush();
    save_corpus(docs, out_path);
    std::cout << "converted " << docs.size() << " documents -> " << out_path << "\n";
    return 0;
}

// ---- gradcheck fixture: a small double-precision model on two sentences ----

int run_gradcheck(uint64_t seed, const std::string& out_path) {
    HyperParams hp;
    hp.embed_dim = 8;
    hp.hid = 6;
    hp.window_sizes = {1, 2};
    hp.filters_per_size = 4;
    hp.mlp_hidden = 8;
    hp.seed = seed;
    hp.iterations = 0;

    const std::vector<SentenceExample> batch = {
        {{2, 3, 4, 5}, SentenceType::ACTION, -1, {3, 1, 2, 3}},
        {{6, 7, 3}, SentenceType::STATEMENT, 4, {}},
    };
    const std::vector<SentenceExample> action_batch = {batch[0]};

    std::ostringstream out;
    double worst = 0.0;

    {
        auto coarse = CoarseModelT<double>::build(hp, 12);
        auto report = finite_diff_check<double>(
            coarse.store,
            [&](TapeT<double>& tape) { return coarse.coarse_loss(tape, batch); },
            1e-4, 1e-3, seed);
        out << "# coarse loss\n" << report.to_tsv();
        worst = std::max(worst, report.max_rel_err);
        if (!report.all_pass()) {
            std::cout << out.str();
            std::cerr << "gradcheck FAILED (coarse loss)\n";
            return 2;
        }
    }
    {
        auto fine = transfer_and_freeze(CoarseModelT<double>::build(hp, 12));
        auto report = finite_diff_check<double>(
            fine.store(),
            [&](TapeT<double>& tape) { return fine.fine_loss(tape, action_batch); },
            1e-4, 1e-3, seed);
        out << "# fine loss\n" << report.to_tsv();
        worst = std::max(worst, report.max_rel_err);
        if (!report.all_pass()) {
            std::cout << out.str();
            std::cerr << "gradcheck FAILED (fine loss)\n";
            return 2;
        }
    }
    out << "# max_rel_err " << worst << "\n";
    if (out_path.empty())
        std::cout << out.str();
    else
        write_file(out_path, out.str());
    std::cerr << "gradcheck passed, max relative error " << worst << "\n";
    return 0;
}

Pst extract_document_pst(const Document& doc, bool gold, const Vocab* vocab, CoarseModel* coarse,
                         FineModel* fine, bool strict, std::vector<Diagnostic>* diags) {
    std::vector<Sentence> labeled;
    if (gold) {
        labeled = doc.sentences;
    } else {
        for (const auto& s : doc.sentences) labeled.push_back(predict_labels(s, *vocab, *coarse, *fine));
    }
    ParseResult r = parse_labels(labeled, strict);
    if (diags) *diags = r.diagnostics;
    return r.root;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-grained text classification and process model extraction"};
    app.require_subcommand(1);

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "dataset statistics table");
    std::string stats_corpus;
    bool stats_lenient = false;
    stats_cmd->add_option("--corpus", stats_corpus, "corpus file")->required();
    stats_cmd->add_flag("--lenient", stats_lenient, "skip invalid documents with a warning");

    // convert
    auto* conv_cmd = app.add_subcommand("convert", "convert a raw annotated dump to the canonical format");
    std::string conv_in, conv_map, conv_out, conv_domain = "other";
    conv_cmd->add_option("--in", conv_in, "raw dump file")->required();
    conv_cmd->add_option("--map", conv_map, "label mapping JSON")->required();
    conv_cmd->add_option("--out", conv_out, "output corpus file")->required();
    conv_cmd->add_option("--domain", conv_domain, "default domain for documents without one");

    // train-coarse
    auto* tc_cmd = app.add_subcommand("train-coarse", "coarse phase: sentence-level tasks");
    CommonTrainFlags tc;
    add_train_flags(tc_cmd, tc, true);

    // train-fine
    auto* tf_cmd = app.add_subcommand("train-fine", "fine phase: word-level task on a coarse checkpoint");
    CommonTrainFlags tf;
    std::string tf_ckpt, tf_zw = "embed";
    bool tf_freeze_shared = false;
    add_train_flags(tf_cmd, tf, false);
    tf_cmd->add_option("--checkpoint", tf_ckpt, "coarse checkpoint to transfer from")->required();
    tf_cmd->add_option("--st3-feature", tf_zw, "word feature for ST3: embed | hidden");
    tf_cmd->add_flag("--freeze-shared", tf_freeze_shared, "freeze all transferred parameters");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "subtask accuracy and behavior similarity");
    std::string eval_corpus, eval_ckpt, eval_split = "none", eval_csv;
    uint64_t eval_split_seed = 0;
    bool eval_baseline = false;
    eval_cmd->add_option("--corpus", eval_corpus, "corpus file")->required();
    eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint (coarse or fine)")->required();
    eval_cmd->add_option("--split", eval_split, "none | ratio (evaluate the 8:2 test side)");
    eval_cmd->add_option("--split-seed", eval_split_seed, "seed for --split ratio");
    eval_cmd->add_option("--csv", eval_csv, "also write scores as CSV");
    eval_cmd->add_flag("--baseline", eval_baseline, "print the majority-class reference row");

    // extract
    auto* ex_cmd = app.add_subcommand("extract", "labels -> process structure tree -> DOT");
    std::string ex_corpus, ex_doc, ex_ckpt, ex_out, ex_pst;
    bool ex_gold = false, ex_strict = false;
    ex_cmd->add_option("--corpus", ex_corpus, "corpus file")->required();
    ex_cmd->add_option("--doc", ex_doc, "document id (default: all documents)");
    ex_cmd->add_flag("--gold", ex_gold, "use gold labels instead of model predictions");
    ex_cmd->add_option("--checkpoint", ex_ckpt, "fine checkpoint (required without --gold)");
    ex_cmd->add_option("--out", ex_out, "output DOT file, or prefix when extracting all documents")
        ->required();
    ex_cmd->add_option("--pst", ex_pst, "also write the PST as JSON (file or prefix)");
    ex_cmd->add_flag("--strict", ex_strict, "abort on parse errors instead of recovering");

    // render
    auto* render_cmd = app.add_subcommand("render", "PST JSON -> DOT");
    std::string render_pst, render_out;
    render_cmd->add_option("--pst", render_pst, "PST JSON file")->required();
    render_cmd->add_option("--out", render_out, "output DOT file")->required();

    // gradcheck
    auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of the model gradients");
    uint64_t gc_seed = 0;
    std::string gc_out;
    gc_cmd->add_option("--seed", gc_seed, "seed for init and coordinate sampling");
    gc_cmd->add_option("--out", gc_out, "write the TSV report here (default stdout)");

    // kfold
    auto* kf_cmd = app.add_subcommand("kfold", "N-fold cross validation");
    CommonTrainFlags kf;
    int kf_n = 5, kf_jobs = 1;
    bool kf_fine = true;
    kf_cmd->add_option("--corpus", kf.corpus, "corpus file")->required();
    kf_cmd->add_option("--n", kf_n, "number of folds")->required();
    kf_cmd->add_option("--seed", kf.seed, "run seed");
    kf_cmd->add_option("--jobs", kf_jobs, "parallel fold workers");
    kf_cmd->add_option("--iterations", kf.iterations, "mini-batch steps per phase");
    kf_cmd->add_option("--batch", kf.batch, "mini-batch size");
    kf_cmd->add_option("--lr", kf.lr, "learning rate");
    kf_cmd->add_option("--lambda1", kf.lambda1, "ST1 loss weight");
    kf_cmd->add_option("--windows", kf.windows, "conv window sizes");
    kf_cmd->add_option("--hid", kf.hid, "Bi-LSTM hidden size");
    kf_cmd->add_option("--filters", kf.filters, "conv filters per window size");
    kf_cmd->add_option("--mlp-layers", kf.mlp_layers, "linear layers per head");
    kf_cmd->add_option("--mlp-hidden", kf.mlp_hidden, "hidden width of the heads");
    kf_cmd->add_option("--embed-dim", kf.embed_dim, "word vector size");
    kf_cmd->add_flag("!--no-fine", kf_fine, "skip the fine phase (ST1/ST2 only)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") return app.exit(e);
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*stats_cmd) {
            std::vector<std::string> warnings;
            auto docs = load_corpus(stats_corpus, !stats_lenient, stats_lenient ? &warnings : nullptr);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            std::cout << stats_table(corpus_stats(docs), fs::path(stats_corpus).filename().string());
        } else if (*conv_cmd) {
            return run_convert(conv_in, conv_map, conv_out, conv_domain);
        } else if (*tc_cmd) {
            auto docs = load_split_side(tc.corpus, tc.split, tc.split_seed, false, true);
            Vocab vocab = build_vocab(docs);
            TrainConfig cfg;
            cfg.hp = hp_from_flags(tc);
            cfg.dev_fraction = tc.dev_fraction;
            cfg.eval_every = tc.eval_every;
            cfg.timing = tc.timing;
            cfg.embeddings = tc.embeddings;
            cfg.embeddings_trainable = tc.embeddings.empty() || tc.train_embeddings;
            auto res = train_coarse(docs, vocab, cfg);
            ModelConfig mc{cfg.hp, "coarse", cfg.embeddings_trainable, vocab.tokens, vocab.hash()};
            save_model(tc.out, res.model.store, mc);
            save_model(tc.out + ".best", res.best_params, mc);
            if (!tc.log_path.empty()) write_file(tc.log_path, train_log_csv(res.log, tc.timing));
            std::cout << "coarse training done; final loss " << res.log.rows.back().loss
                      << ", best dev " << res.best_dev << "\n";
        } else if (*tf_cmd) {
            auto [mc, weights] = load_model(tf_ckpt);
            if (mc.phase != "coarse")
                throw ValidationError("train-fine expects a coarse checkpoint, got phase=" + mc.phase);
            auto docs = load_split_side(tf.corpus, tf.split, tf.split_seed, false, true);
            Vocab vocab = vocab_from_config(mc);
            CoarseModel coarse = build_coarse_from(mc, weights);
            TrainConfig cfg;
            cfg.hp = mc.hp;
            cfg.hp.seed = tf.seed;
            cfg.hp.iterations = tf.iterations;
            cfg.hp.batch = tf.batch;
            cfg.hp.lr = tf.lr;
            cfg.hp.freeze_shared = tf_freeze_shared;
            if (tf_zw == "hidden")
                cfg.hp.st3_uses_hidden = true;
            else if (tf_zw != "embed")
                throw ValidationError("--st3-feature must be embed or hidden");
            cfg.dev_fraction = tf.dev_fraction;
            cfg.eval_every = tf.eval_every;
            cfg.timing = tf.timing;
            auto res = train_fine(docs, vocab, cfg, std::move(coarse));
            ModelConfig out_mc{cfg.hp, "fine", mc.embeddings_trainable, vocab.tokens, vocab.hash()};
            save_model(tf.out, res.model.store(), out_mc);
            save_model(tf.out + ".best", res.best_params, out_mc);
            if (!tf.log_path.empty()) write_file(tf.log_path, train_log_csv(res.log, tf.timing));
            std::cout << "fine training done; final loss " << res.log.rows.back().loss << ", best dev "
                      << res.best_dev << "\n";
        } else if (*eval_cmd) {
            auto [mc, weights] = load_model(eval_ckpt);
            auto docs = load_split_side(eval_corpus, eval_split, eval_split_seed, true, true);
            Vocab vocab = vocab_from_config(mc);
            SubtaskScores scores;
            if (mc.phase == "fine") {
                FineModel fine = build_fine_from(mc, weights);
                EvalMetrics m = evaluate(docs, vocab, fine.coarse, &fine);
                scores = {m.st1_acc, m.st2_acc, m.st3_acc,
                          pme_behavior_similarity(docs, vocab, fine.coarse, fine)};
            } else {
                CoarseModel coarse = build_coarse_from(mc, weights);
                EvalMetrics m = evaluate(docs, vocab, coarse);
                scores = {m.st1_acc, m.st2_acc, -1, -1};
            }
            SubtaskScores base;
            if (eval_baseline) {
                EvalMetrics b = majority_baseline(docs, docs);
                base = {b.st1_acc, b.st2_acc, b.st3_acc, -1};
            }
            std::cout << report_table(scores, eval_baseline ? &base : nullptr);
            if (!eval_csv.empty()) {
                std::ostringstream os;
                os << "st1,st2,st3,pme\n"
                   << scores.st1 << "," << scores.st2 << "," << scores.st3 << "," << scores.behavior
                   << "\n";
                write_file(eval_csv, os.str());
            }
        } else if (*ex_cmd) {
            auto docs = load_corpus(ex_corpus, false, nullptr);
            Vocab vocab;
            std::optional<ModelConfig> mc;
            ParamStore weights;
            std::optional<FineModel> fine;
            if (!ex_gold) {
                if (ex_ckpt.empty())
                    throw ValidationError("extract: --checkpoint is required without --gold");
                std::tie(mc, weights) = [&] {
                    auto [m, w] = load_model(ex_ckpt);
                    return std::make_pair(std::optional<ModelConfig>(std::move(m)), std::move(w));
                }();
                vocab = vocab_from_config(*mc);
                fine = build_fine_from(*mc, weights);
            }
            int emitted = 0;
            for (const auto& doc : docs) {
                if (!ex_doc.empty() && doc.id != ex_doc) continue;
                std::vector<Diagnostic> diags;
                Pst pst = extract_document_pst(doc, ex_gold, &vocab, fine ? &fine->coarse : nullptr,
                                               fine ? &*fine : nullptr, ex_strict, &diags);
                for (const auto& d : diags)
                    std::cerr << doc.id << " sentence " << d.sentence_index << ": "
                              << (d.severity == Diagnostic::Severity::Error ? "error: " : "warning: ")
                              << d.message << "\n";
                const bool single = !ex_doc.empty();
                const std::string dot_path = single ? ex_out : ex_out + doc.id + ".dot";
                write_file(dot_path, to_dot(pst_to_graph(pst)));
                if (!ex_pst.empty())
                    write_file(single ? ex_pst : ex_pst + doc.id + ".json", pst_to_json(pst) + "\n");
                ++emitted;
            }
            if (!ex_doc.empty() && emitted == 0)
                throw ValidationError("extract: document id not found: " + ex_doc);
            std::cout << "extracted " << emitted << " model(s)\n";
        } else if (*render_cmd) {
            Pst pst = pst_from_json(read_file(render_pst));
            write_file(render_out, to_dot(pst_to_graph(pst)));
        } else if (*gc_cmd) {
            return run_gradcheck(gc_seed, gc_out);
        } else if (*kf_cmd) {
            auto docs = load_corpus(kf.corpus, true, nullptr);
            TrainConfig cfg;
            cfg.hp = hp_from_flags(kf);
            cfg.dev_fraction = 0.0;
            cfg.eval_every = 0;
            TrainEvalFn fn = [&](const std::vector<Document>& train, const std::vector<Document>& test) {
                Vocab vocab = build_vocab(train);
                auto coarse_res = train_coarse(train, vocab, cfg);
                SubtaskScores s;
                if (kf_fine) {
                    auto fine_res = train_fine(train, vocab, cfg, std::move(coarse_res.model));
                    EvalMetrics m = evaluate(test, vocab, fine_res.model.coarse, &fine_res.model);
                    s = {m.st1_acc, m.st2_acc, m.st3_acc,
                         pme_behavior_similarity(test, vocab, fine_res.model.coarse, fine_res.model)};
                } else {
                    EvalMetrics m = evaluate(test, vocab, coarse_res.model);
                    s = {m.st1_acc, m.st2_acc, -1, -1};
                }
                return s;
            };
            KfoldResult res = kfold_evaluate(docs, kf_n, kf.seed, fn, kf_jobs);
            auto line = [](const char* name, double mean, double sd) {
                std::ostringstream os;
                if (mean < 0) return std::string();
                os << "  " << name << "  mean " << mean << "  std " << sd << "\n";
                return os.str();
            };
            std::cout << kf_n << "-fold cross validation\n"
                      << line("ST1", res.mean.st1, res.stddev.st1)
                      << line("ST2", res.mean.st2, res.stddev.st2)
                      << line("ST3", res.mean.st3, res.stddev.st3)
                      << line("PME", res.mean.behavior, res.stddev.behavior);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
