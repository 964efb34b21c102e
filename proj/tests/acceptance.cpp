// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL/SKIP line per criterion. Exit code 0 iff nothing
// failed (skips are conditional inputs that are absent).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mgtc/adam.hpp"
#include "mgtc/assembler.hpp"
#include "mgtc/evaluator.hpp"
#include "mgtc/gradcheck.hpp"
#include "mgtc/trainer.hpp"
#include "pst_testutil.hpp"
#include "toy_corpus.hpp"

using namespace mgtc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name;
    if (!detail.empty()) std::cout << "  [" << detail << "]";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

void report_skip(int id, const std::string& name, const std::string& why) {
    std::cout << "SKIP  criterion " << id << ": " << name << "  [" << why << "]" << std::endl;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

HyperParams overfit_hp(uint64_t seed, int iterations) {
    HyperParams hp;
    hp.embed_dim = 24;
    hp.hid = 24;
    hp.window_sizes = {1, 2, 3};
    hp.filters_per_size = 8;
    hp.mlp_hidden = 24;
    hp.lr = 0.01;
    hp.iterations = iterations;
    hp.seed = seed;
    return hp;
}

TrainConfig overfit_cfg(uint64_t seed, int iterations) {
    TrainConfig cfg;
    cfg.hp = overfit_hp(seed, iterations);
    cfg.dev_fraction = 0.0;
    cfg.eval_every = 100;
    return cfg;
}

bool stores_bitwise_equal(const ParamStore& a, const ParamStore& b, const char* prefix = "") {
    if (a.size() != b.size() && std::strlen(prefix) == 0) return false;
    for (const auto& pa : a.params()) {
        if (pa.name.rfind(prefix, 0) != 0) continue;
        if (!b.has(pa.name)) return false;
        const auto& pb = b.at(pa.name);
        if (pa.value.shape != pb.value.shape) return false;
        if (std::memcmp(pa.value.data.data(), pb.value.data.data(), pa.value.data.size() * 4) != 0)
            return false;
    }
    return true;
}

// ---- criterion 1: gradient suite ----

void criterion_gradients() {
    const auto t0 = Clock::now();
    double worst_layer = 0, worst_model = 0;
    bool ok = true;

    for (uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        // embedding
        {
            ParamStoreT<double> store;
            auto emb = EmbeddingTableT<double>::create(store, 6, 4, 1, true, rng);
            auto rep = finite_diff_check<double>(
                store,
                [&](TapeT<double>& t) {
                    auto rows = emb.embed(t, store, {0, 3, 5, 3});
                    return t.sum_all(t.mul(t.concat(rows), t.concat(rows)));
                },
                1e-5, 1e-4, seed);
            ok &= rep.all_pass();
            worst_layer = std::max(worst_layer, rep.max_rel_err);
        }
        // lstm chain
        {
            ParamStoreT<double> store;
            auto cell = LstmCellT<double>::create(store, "cell", 3, 4, rng);
            TensorT<double> x1({3}), x2({3});
            for (auto& v : x1.data) v = rng.uniform(-1, 1);
            for (auto& v : x2.data) v = rng.uniform(-1, 1);
            auto rep = finite_diff_check<double>(
                store,
                [&](TapeT<double>& t) {
                    auto g = cell.bind(t, store);
                    auto h = t.input(TensorT<double>({4}));
                    auto c = t.input(TensorT<double>({4}));
                    auto [h1, c1] = cell.step(t, g, t.input(x1), h, c);
                    auto [h2, c2] = cell.step(t, g, t.input(x2), h1, c1);
                    (void)c2;
                    return t.ce_loss(h2, 1);
                },
                1e-5, 1e-4, seed);
            ok &= rep.all_pass();
            worst_layer = std::max(worst_layer, rep.max_rel_err);
        }
        // bilstm
        {
            ParamStoreT<double> store;
            auto enc = BiLstmT<double>::create(store, "enc", 3, 3, rng);
            std::vector<TensorT<double>> seq(3, TensorT<double>({3}));
            for (auto& s : seq)
                for (auto& v : s.data) v = rng.uniform(-1, 1);
            auto rep = finite_diff_check<double>(
                store,
                [&](TapeT<double>& t) {
                    std::vector<Var<double>> xs;
                    for (auto& s : seq) xs.push_back(t.input(s));
                    auto out = enc.encode(t, store, xs);
                    return t.ce_loss(out.summary, 2);
                },
                1e-5, 1e-4, seed);
            ok &= rep.all_pass();
            worst_layer = std::max(worst_layer, rep.max_rel_err);
        }
        // conv bank
        {
            ParamStoreT<double> store;
            auto bank = ConvFilterBankT<double>::create(store, "conv", {1, 2, 3}, 3, 3, rng);
            std::vector<TensorT<double>> seq(4, TensorT<double>({3}));
            for (auto& s : seq)
                for (auto& v : s.data) v = rng.uniform(-1, 1);
            auto rep = finite_diff_check<double>(
                store,
                [&](TapeT<double>& t) {
                    std::vector<Var<double>> xs;
                    for (auto& s : seq) xs.push_back(t.input(s));
                    return t.ce_loss(bank.apply(t, store, xs), 0);
                },
                1e-5, 1e-4, seed);
            ok &= rep.all_pass();
            worst_layer = std::max(worst_layer, rep.max_rel_err);
        }
        // gate fusion
        {
            ParamStoreT<double> store;
            auto gate = GateFusionT<double>::create(store, "g", 5, rng);
            TensorT<double> z({5});
            for (auto& v : z.data) v = rng.uniform(-1, 1);
            auto rep = finite_diff_check<double>(
                store, [&](TapeT<double>& t) { return t.ce_loss(gate.apply(t, store, t.input(z)), 1); },
                1e-5, 1e-4, seed);
            ok &= rep.all_pass();
            worst_layer = std::max(worst_layer, rep.max_rel_err);
        }
        // mlp head
        {
            ParamStoreT<double> store;
            auto head = MlpHeadT<double>::create(store, "h", 4, {6}, 3, rng);
            TensorT<double> v({4});
            for (auto& x : v.data) x = rng.uniform(-1, 1);
            auto rep = finite_diff_check<double>(
                store,
                [&](TapeT<double>& t) { return t.ce_loss(head.forward(t, store, t.input(v)).logits, 2); },
                1e-5, 1e-4, seed);
            ok &= rep.all_pass();
            worst_layer = std::max(worst_layer, rep.max_rel_err);
        }

        // full model: coarse and fine losses on a 2-sentence batch
        const std::vector<SentenceExample> batch = {
            {{2, 3, 4}, SentenceType::ACTION, -1, {1, 3, 2}},
            {{5, 6}, SentenceType::STATEMENT, 4, {}},
        };
        HyperParams hp;
        hp.embed_dim = 6;
        hp.hid = 5;
        hp.window_sizes = {1, 2};
        hp.filters_per_size = 3;
        hp.mlp_hidden = 7;
        hp.seed = seed;
        auto coarse = CoarseModelT<double>::build(hp, 10);
        auto repc = finite_diff_check<double>(
            coarse.store, [&](TapeT<double>& t) { return coarse.coarse_loss(t, batch); }, 1e-4, 1e-3,
            seed);
        ok &= repc.all_pass();
        worst_model = std::max(worst_model, repc.max_rel_err);

        auto fine = transfer_and_freeze(std::move(coarse));
        auto repf = finite_diff_check<double>(
            fine.store(),
            [&](TapeT<double>& t) {
                return fine.fine_loss(t, {batch[0]});
            },
            1e-4, 1e-3, seed);
        ok &= repf.all_pass();
        worst_model = std::max(worst_model, repf.max_rel_err);
    }

    const double secs = seconds_since(t0);
    ok &= worst_layer < 1e-4 && worst_model < 1e-3 && secs < 60.0;
    std::ostringstream detail;
    detail << "layers max " << worst_layer << ", full model max " << worst_model << ", 5 seeds, "
           << secs << "s";
    report(1, "gradient suite (layers < 1e-4, full model < 1e-3)", ok, detail.str());
}

// ---- criterion 2: overfit suite ----

void criterion_overfit() {
    const auto t0 = Clock::now();
    auto docs = mgtc_test::toy_corpus_12();
    Vocab vocab = build_vocab(docs);

    auto coarse = train_coarse(docs, vocab, overfit_cfg(20, 500));
    EvalMetrics mc = evaluate(docs, vocab, coarse.model);
    auto fine = train_fine(docs, vocab, overfit_cfg(20, 500), std::move(coarse.model));
    EvalMetrics mf = evaluate(docs, vocab, fine.model.coarse, &fine.model);

    const double secs = seconds_since(t0);
    const bool ok =
        mc.st1_acc == 100.0 && mc.st2_acc == 100.0 && mf.st3_acc == 100.0 && secs < 120.0;
    std::ostringstream detail;
    detail << "train acc ST1 " << mc.st1_acc << ", ST2 " << mc.st2_acc << ", ST3 " << mf.st3_acc
           << ", " << secs << "s";
    report(2, "overfit suite (100% train acc within 500 iters/phase)", ok, detail.str());
}

// ---- criterion 3: freeze/transfer contract ----

void criterion_freeze_transfer() {
    auto docs = mgtc_test::toy_corpus_12();
    Vocab vocab = build_vocab(docs);
    auto coarse = train_coarse(docs, vocab, overfit_cfg(21, 60));
    ParamStore snapshot = coarse.model.store;  // the "coarse checkpoint"

    auto fine = transfer_and_freeze(std::move(coarse.model));
    // fine-step 0: every transferred parameter equals the checkpoint exactly
    bool transferred_exact = true;
    for (const auto& p : snapshot.params())
        transferred_exact &= stores_bitwise_equal(fine.store(), snapshot, p.name.c_str());

    // run a fine phase; the ST2 head must stay bitwise constant throughout
    std::vector<SentenceExample> actions;
    for (const auto& d : docs)
        for (const auto& s : d.sentences)
            if (s.s_type == SentenceType::ACTION) actions.push_back(make_example(s, vocab));
    AdamState adam;
    adam.lr = 0.01;
    bool st2_constant = true;
    for (int iter = 0; iter < 50; ++iter) {
        Tape tape;
        auto loss = fine.fine_loss(tape, actions);
        fine.store().zero_grads();
        tape.backward(loss);
        adam_step(fine.store(), adam);
        st2_constant &= stores_bitwise_equal(fine.store(), snapshot, "st2.");
    }
    report(3, "freeze/transfer contract (bitwise)", transferred_exact && st2_constant,
           transferred_exact ? (st2_constant ? "transfer exact, ST2 constant over 50 steps"
                                             : "ST2 moved during fine phase")
                             : "transferred values differ");
}

// ---- criterion 4: coarse-to-fine benefit ----

void criterion_transfer_benefit() {
    auto docs = mgtc_test::toy_corpus_12();
    Vocab vocab = build_vocab(docs);
    std::vector<SentenceExample> actions;
    for (const auto& d : docs)
        for (const auto& s : d.sentences)
            if (s.s_type == SentenceType::ACTION) actions.push_back(make_example(s, vocab));

    std::vector<double> with_transfer, with_random;
    for (uint64_t seed = 40; seed < 45; ++seed) {
        auto trained = train_coarse(docs, vocab, overfit_cfg(seed, 200));
        auto fine_t = transfer_and_freeze(std::move(trained.model));
        Tape t1;
        with_transfer.push_back(static_cast<double>(t1.scalar(fine_t.fine_loss(t1, actions))));

        auto fresh = CoarseModel::build(overfit_hp(seed, 0), vocab.size());
        auto fine_r = transfer_and_freeze(std::move(fresh));
        Tape t2;
        with_random.push_back(static_cast<double>(t2.scalar(fine_r.fine_loss(t2, actions))));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double mt = median(with_transfer), mr = median(with_random);
    std::ostringstream detail;
    detail << "median initial fine loss: transferred " << mt << " vs random " << mr;
    if (mt > mr)
        detail << "; known limitation: with a randomly initialized word head, step-0 loss "
                  "scales with feature magnitude, which coarse training increases; see "
                  "docs in the repository for the analysis";
    report(4, "coarse-to-fine benefit (5 seeds, directional)", mt <= mr, detail.str());
}

// ---- criterion 5: assembler goldens ----

void criterion_assembler() {
    bool ok = true;
    std::string detail;

    Document fig1 = mgtc_test::fig1_document();
    ParseResult r = parse_labels(fig1.sentences, true);
    ok &= r.root.children.size() == 1;
    if (ok) {
        const Pst& gw = r.root.children[0];
        ok &= gw.kind == Pst::Kind::And && gw.children.size() == 2;
        if (ok) {
            const ActionNode& chill = gw.children[0].action;
            const ActionNode& bake = gw.children[1].action;
            ok &= chill.role.empty() && chill.name == "chill" && chill.object == "mixture";
            ok &= bake.name == "bake";
        }
    }
    if (!ok) detail = "two-step concurrent recipe did not parse to And[chill, bake]";

    int round_trips = 0;
    for (uint64_t seed = 0; seed < 200; ++seed) {
        Pst pst = mgtc_test::random_pst(seed, 10);
        auto labels = mgtc_test::emit_labels(pst, seed * 13 + 5, true);
        ParseResult rr = parse_labels(labels, true);
        if (rr.root.same_structure(pst) && !rr.has_errors()) ++round_trips;
    }
    ok &= round_trips == 200;
    std::ostringstream os;
    os << (detail.empty() ? "golden parse exact" : detail) << "; " << round_trips
       << "/200 label streams round-tripped isomorphically";
    report(5, "assembler goldens", ok, os.str());
}

// ---- criterion 6: behavioral-profile oracle ----

void criterion_profile_oracle() {
    int checked = 0, agreed = 0;
    for (uint64_t seed = 0; checked < 150 && seed < 2000; ++seed) {
        Pst pst = mgtc_test::random_pst(seed, 6);
        if (pst.count_actions() > 6) continue;
        ++checked;
        if (mgtc_test::profile_oracle_mismatches(pst) == 0) ++agreed;
    }
    std::ostringstream detail;
    detail << agreed << "/" << checked << " PSTs agree with the trace-interleaving oracle";
    report(6, "behavioral profile vs exhaustive trace oracle", checked == 150 && agreed == checked,
           detail.str());
}

// ---- criterion 7: similarity properties ----

void criterion_similarity() {
    bool reflexive = true, symmetric = true;
    for (uint64_t seed = 0; seed < 50; ++seed) {
        Pst a = mgtc_test::random_pst(seed, 7);
        Pst b = mgtc_test::random_pst(seed + 500, 7);
        reflexive &= behavior_similarity(a, a).value == 1.0;
        symmetric &= std::fabs(behavior_similarity(a, b).value - behavior_similarity(b, a).value) <= 1e-12;
    }
    auto leaf = [](const char* n) {
        ActionNode a;
        a.name = n;
        return Pst::leaf(a);
    };
    Pst gold = Pst::seq({leaf("a"), leaf("b"), leaf("c")});
    Pst extracted = Pst::seq({leaf("a"), leaf("c")});
    const double f1 = behavior_similarity(extracted, gold).value;
    const bool hand_case = f1 == 0.5;

    std::ostringstream detail;
    detail << "reflexive " << (reflexive ? "exact" : "BROKEN") << ", symmetric "
           << (symmetric ? "<=1e-12" : "BROKEN") << ", Seq[a,b,c] vs Seq[a,c] = " << f1;
    report(7, "similarity properties", reflexive && symmetric && hand_case, detail.str());
}

// ---- criteria 8 and 9: released-data checks (conditional) ----

std::string released_dir() {
    if (const char* env = std::getenv("MGTC_RELEASED_DIR")) return env;
    return "";
}

void criterion_dataset_stats() {
    const std::string dir = released_dir();
    const std::string name = "dataset statistics (COR 2,636/14,260; MAM 2,172/20,612)";
    if (dir.empty() || !fs::exists(fs::path(dir) / "cor.jsonl") ||
        !fs::exists(fs::path(dir) / "mam.jsonl")) {
        report_skip(8, name,
                    "released data not present; set MGTC_RELEASED_DIR to a directory with "
                    "cor.jsonl and mam.jsonl produced by the convert subcommand");
        return;
    }
    auto cor = corpus_stats(load_corpus((fs::path(dir) / "cor.jsonl").string()));
    auto mam = corpus_stats(load_corpus((fs::path(dir) / "mam.jsonl").string()));
    const bool ok = cor.sentences == 2636 && cor.labeled_words == 14260 && mam.sentences == 2172 &&
                    mam.labeled_words == 20612;
    std::ostringstream detail;
    detail << "COR " << cor.sentences << "/" << cor.labeled_words << ", MAM " << mam.sentences << "/"
           << mam.labeled_words;
    report(8, name, ok, detail.str());
}

void criterion_learning_signal() {
    const std::string dir = released_dir();
    const std::string name = "desk-scale learning signal (ST1 >= majority + 10 points)";
    if (dir.empty() || !fs::exists(fs::path(dir) / "cor.jsonl")) {
        report_skip(9, name, "released data not present; see criterion 8");
        return;
    }
    const auto t0 = Clock::now();
    auto docs = load_corpus((fs::path(dir) / "cor.jsonl").string());
    SplitSpec spec;
    spec.seed = 13;
    Split split = split_corpus(docs, spec);
    Vocab vocab = build_vocab(split.train);
    TrainConfig cfg;
    cfg.hp.seed = 13;  // paper-protocol defaults otherwise (1000 iters, batch 32, lr 1e-4)
    auto res = train_coarse(split.train, vocab, cfg);
    EvalMetrics model = evaluate(split.test, vocab, res.model);
    EvalMetrics base = majority_baseline(split.train, split.test);
    const double secs = seconds_since(t0);
    std::ostringstream detail;
    detail << "ST1 " << model.st1_acc << " vs majority " << base.st1_acc << ", " << secs << "s";
    report(9, name, model.st1_acc >= base.st1_acc + 10.0 && secs < 1800.0, detail.str());
}

// ---- criterion 10: determinism ----

void criterion_determinism() {
    auto docs = mgtc_test::toy_corpus_12();
    Vocab vocab = build_vocab(docs);
    const fs::path tmp = fs::temp_directory_path();

    auto run_once = [&](const std::string& tag) {
        auto coarse = train_coarse(docs, vocab, overfit_cfg(50, 80));
        const std::string ckpt = (tmp / ("mgtc_acc_det_" + tag + ".ckpt")).string();
        save_checkpoint(coarse.model.store, ckpt);
        std::string csv = train_log_csv(coarse.log, false);
        Pst pst = parse_labels(mgtc_test::fig1_document().sentences, true).root;
        std::string dot = to_dot(pst_to_graph(pst));
        return std::make_tuple(ckpt, csv, dot);
    };
    auto [ckpt1, csv1, dot1] = run_once("a");
    auto [ckpt2, csv2, dot2] = run_once("b");

    auto file_bytes = [](const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    };
    const bool ckpt_same = file_bytes(ckpt1) == file_bytes(ckpt2);
    const bool csv_same = csv1 == csv2;
    const bool dot_same = dot1 == dot2;
    fs::remove(ckpt1);
    fs::remove(ckpt2);
    std::ostringstream detail;
    detail << "checkpoints " << (ckpt_same ? "bit-identical" : "DIFFER") << ", CSV "
           << (csv_same ? "byte-identical" : "DIFFER") << ", DOT "
           << (dot_same ? "byte-identical" : "DIFFER");
    report(10, "determinism under fixed seeds", ckpt_same && csv_same && dot_same, detail.str());
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    criterion_gradients();
    criterion_overfit();
    criterion_freeze_transfer();
    criterion_transfer_benefit();
    criterion_assembler();
    criterion_profile_oracle();
    criterion_similarity();
    criterion_dataset_stats();
    criterion_learning_signal();
    criterion_determinism();
    std::cout << "acceptance suite finished in " << seconds_since(t0) << "s, " << g_failures
              << " failure(s)" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
