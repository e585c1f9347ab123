// Command-line front end: data generation, denoiser/classifier training,
// covariate-shift attacks and studies, and certification reports.
#include "smoothcert/smoothcert.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smoothcert;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json default_config() {
    return json{
        {"seed", 1},
        {"out_dir", "out"},
        {"threads", 0},  // 0 = SMOOTHCERT_THREADS env or 1
        {"data",
         {{"kind", "synthetic"},
          {"n_per_class", 25},
          {"test_n_per_class", 25},
          {"classes", 2},
          {"side", 8},
          {"jitter", 0.1},
          {"train_images", ""},
          {"train_labels", ""},
          {"test_images", ""},
          {"test_labels", ""},
          {"max_items", 0}}},
        {"schedule", {{"T", 1000}, {"beta_start", 1e-4}, {"beta_end", 0.02}}},
        {"denoiser", {{"hidden", {128, 64}}, {"epochs", 100}, {"batch", 16}, {"lr", 1e-3}}},
        {"classifier",
         {{"regime", "clean"},
          {"sigma", 0.5},
          {"eta", 0.1},
          {"M", 1},
          {"r_adv", 0.0},  // <= 0 means unbounded
          {"hidden", {128, 64}},
          {"epochs", 100},
          {"batch", 16},
          {"lr", 1e-3},
          {"init", ""}}},
        {"attack", {{"sigma", 0.5}, {"eta", 0.1}, {"M", 1}, {"r_adv", 0.0}, {"count", 4}}},
        {"shift", {{"sigmas", {0.25, 0.5, 1.0}}, {"count", 0}}},  // 0 = whole test split
        {"certify",
         {{"sigma", 0.5},
          {"n0", 100},
          {"n", 1000},
          {"alpha", 0.001},
          {"max_samples", 0},
          {"use_denoiser", true},
          {"include_timings", false}}},
    };
}

void merge_into(json& base, const json& over) {
    for (auto it = over.begin(); it != over.end(); ++it) {
        if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
            merge_into(base[it.key()], *it);
        } else {
            base[it.key()] = *it;
        }
    }
}

json load_config(const std::string& path) {
    json cfg = default_config();
    if (path.empty()) return cfg;
    std::ifstream is(path);
    if (!is) throw ConfigError("config file not found: " + path);
    json file;
    try {
        is >> file;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    merge_into(cfg, file);
    return cfg;
}

std::size_t resolve_threads(const json& cfg) {
    long long t = cfg.value("threads", 0);
    if (t <= 0) {
        const char* env = std::getenv("SMOOTHCERT_THREADS");
        t = env != nullptr ? std::atoll(env) : 1;
    }
    return t >= 1 ? std::size_t(t) : 1;
}

std::string out_path(const json& cfg, const std::string& name) {
    return (fs::path(cfg.at("out_dir").get<std::string>()) / name).string();
}

void echo_config(const json& cfg, const std::string& subcommand) {
    fs::create_directories(cfg.at("out_dir").get<std::string>());
    std::ofstream os(out_path(cfg, subcommand + "_config.json"));
    os << cfg.dump(2) << "\n";
}

std::vector<std::size_t> hidden_of(const json& block) {
    std::vector<std::size_t> h;
    for (const auto& v : block.at("hidden")) h.push_back(v.get<std::size_t>());
    return h;
}

double r_adv_of(const json& block) {
    double r = block.at("r_adv").get<double>();
    return r > 0.0 ? r : kUnboundedRadius;
}

Regime regime_of(const std::string& name) {
    if (name == "clean") return Regime::kClean;
    if (name == "gauss_aug") return Regime::kGaussAug;
    if (name == "ntd_aug") return Regime::kNtdAug;
    if (name == "adv_eps") return Regime::kAdvEps;
    throw ConfigError("unknown regime: " + name +
                      " (expected clean|gauss_aug|ntd_aug|adv_eps)");
}

LabeledDataset load_split_of(const json& cfg, const char* which) {
    return load_split(out_path(cfg, std::string(which) + ".scd"));
}

Denoiser load_denoiser_of(const json& cfg) {
    return load_denoiser(out_path(cfg, "denoiser.scn"), out_path(cfg, "denoiser.sch"));
}

void write_loss_csv(const std::vector<double>& trace, const std::string& path) {
    std::ofstream os(path);
    os << "epoch,loss\n";
    for (std::size_t e = 0; e < trace.size(); ++e) {
        os << e << ',' << detail::fmt_double(trace[e]) << '\n';
    }
}

// ---- subcommands ----

int run_gen_data(const json& cfg) {
    echo_config(cfg, "gen-data");
    const json& d = cfg.at("data");
    LabeledDataset train, test;
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    if (d.at("kind") == "synthetic") {
        train = gen_synthetic(d.at("n_per_class").get<std::size_t>(),
                              d.at("classes").get<int>(), d.at("side").get<std::size_t>(), seed,
                              d.at("jitter").get<double>());
        test = gen_synthetic(d.at("test_n_per_class").get<std::size_t>(),
                             d.at("classes").get<int>(), d.at("side").get<std::size_t>(),
                             seed + 1, d.at("jitter").get<double>());
    } else if (d.at("kind") == "idx") {
        std::size_t cap = d.at("max_items").get<std::size_t>();
        train = load_idx(d.at("train_images").get<std::string>(),
                         d.at("train_labels").get<std::string>(), cap);
        test = load_idx(d.at("test_images").get<std::string>(),
                        d.at("test_labels").get<std::string>(), cap);
    } else {
        throw ConfigError("data.kind must be synthetic or idx");
    }
    save_split(train, out_path(cfg, "train.scd"));
    save_split(test, out_path(cfg, "test.scd"));
    std::cout << "wrote " << train.size() << " train and " << test.size()
              << " test samples (dim " << train.dim() << ", " << train.num_classes
              << " classes)\n";
    return 0;
}

int run_train_denoiser(const json& cfg) {
    echo_config(cfg, "train-denoiser");
    auto train = load_split_of(cfg, "train");
    const json& s = cfg.at("schedule");
    auto schedule = build_schedule(s.at("T").get<std::size_t>(), s.at("beta_start").get<double>(),
                                   s.at("beta_end").get<double>());
    const json& d = cfg.at("denoiser");
    DenoiserTrainConfig tc;
    tc.hidden = hidden_of(d);
    tc.epochs = d.at("epochs").get<std::size_t>();
    tc.batch = d.at("batch").get<std::size_t>();
    tc.lr = d.at("lr").get<double>();
    tc.seed = cfg.at("seed").get<std::uint64_t>();
    auto trained = train_denoiser(train, schedule, tc);
    save_denoiser(trained.denoiser, out_path(cfg, "denoiser.scn"), out_path(cfg, "denoiser.sch"));
    write_loss_csv(trained.epoch_loss, out_path(cfg, "denoiser_loss.csv"));
    std::cout << "denoiser trained for " << tc.epochs << " epochs, final loss "
              << (trained.epoch_loss.empty() ? 0.0 : trained.epoch_loss.back()) << "\n";
    return 0;
}

int run_train_classifier(const json& cfg) {
    echo_config(cfg, "train-classifier");
    auto train = load_split_of(cfg, "train");
    const json& c = cfg.at("classifier");
    TrainConfig tc;
    tc.regime = regime_of(c.at("regime").get<std::string>());
    tc.sigma = c.at("sigma").get<double>();
    tc.eta = c.at("eta").get<double>();
    tc.M = c.at("M").get<std::size_t>();
    tc.r_adv = r_adv_of(c);
    tc.hidden = hidden_of(c);
    tc.epochs = c.at("epochs").get<std::size_t>();
    tc.batch = c.at("batch").get<std::size_t>();
    tc.lr = c.at("lr").get<double>();
    tc.seed = cfg.at("seed").get<std::uint64_t>();

    std::optional<Denoiser> den;
    if (tc.regime == Regime::kNtdAug || tc.regime == Regime::kAdvEps) {
        den = load_denoiser_of(cfg);
    }

    // adv_eps fine-tunes from the clean classifier when no explicit
    // initializer is given and one is available.
    std::string init_path = c.at("init").get<std::string>();
    if (init_path.empty() && tc.regime == Regime::kAdvEps &&
        fs::exists(out_path(cfg, "classifier_clean.scn"))) {
        init_path = out_path(cfg, "classifier_clean.scn");
    }
    std::optional<FeedForwardNet> init;
    if (!init_path.empty()) init = load_net(init_path);

    auto trained = train_classifier(train, tc, den ? &*den : nullptr, init ? &*init : nullptr);
    std::string name = std::string("classifier_") + regime_name(tc.regime);
    save_net(trained.classifier.net, out_path(cfg, name + ".scn"));
    write_loss_csv(trained.epoch_loss, out_path(cfg, name + "_loss.csv"));
    std::cout << name << " trained, train accuracy "
              << train_accuracy(trained.classifier, train) << "\n";
    return 0;
}

int run_attack_dump(const json& cfg, const std::string& classifier_path) {
    echo_config(cfg, "attack-dump");
    auto test = load_split_of(cfg, "test");
    auto den = load_denoiser_of(cfg);
    std::string clf_path =
        classifier_path.empty() ? out_path(cfg, "classifier_clean.scn") : classifier_path;
    Classifier clf{load_net(clf_path)};

    const json& a = cfg.at("attack");
    AttackParams params;
    params.sigma = a.at("sigma").get<double>();
    params.eta = a.at("eta").get<double>();
    params.M = a.at("M").get<std::size_t>();
    params.r_adv = r_adv_of(a);
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    std::size_t count = std::min<std::size_t>(a.at("count").get<std::size_t>(), test.size());
    bool images = test.side * test.side == test.dim();

    std::ofstream losses(out_path(cfg, "attack_losses.csv"));
    losses << "index,label";
    for (std::size_t m = 0; m <= params.M; ++m) losses << ",loss_" << m;
    losses << '\n';
    AttackParams baseline = params;
    baseline.eta = 0.0;
    baseline.M = 1;
    for (std::size_t i = 0; i < count; ++i) {
        Rng eps_rng{seed, rng_ctx::kAttackInit, i};
        auto adv = find_extreme_shift(test.inputs[i], test.labels[i], clf, den, params, eps_rng);
        auto base = find_extreme_shift(test.inputs[i], test.labels[i], clf, den, baseline, eps_rng);
        losses << i << ',' << test.labels[i];
        for (double l : adv.loss_trace) losses << ',' << detail::fmt_double(l);
        losses << '\n';
        if (images) {
            std::string stem = "sample_" + std::to_string(i);
            write_pgm(test.inputs[i], test.side, out_path(cfg, stem + "_clean.pgm"));
            write_pgm(base.x_adv, test.side, out_path(cfg, stem + "_base.pgm"));
            write_pgm(adv.x_adv, test.side, out_path(cfg, stem + "_adv.pgm"));
        }
    }
    std::cout << "attacked " << count << " samples"
              << (images ? " (pgm dumps written)" : " (non-square data, no pgm dumps)") << "\n";
    return 0;
}

int run_shift_report(const json& cfg) {
    echo_config(cfg, "shift-report");
    auto test = load_split_of(cfg, "test");
    auto den = load_denoiser_of(cfg);
    const json& sh = cfg.at("shift");
    std::vector<double> sigmas;
    for (const auto& v : sh.at("sigmas")) sigmas.push_back(v.get<double>());
    std::size_t count = sh.at("count").get<std::size_t>();
    if (count == 0 || count > test.size()) count = test.size();

    auto report = shift_study(test, den, sigmas, count, cfg.at("seed").get<std::uint64_t>(),
                              resolve_threads(cfg));
    json summary = json::array();
    for (std::size_t si = 0; si < report.blocks.size(); ++si) {
        const auto& block = report.blocks[si];
        write_shift_csv(block, out_path(cfg, "shift_sigma" + std::to_string(si) + ".csv"));
        summary.push_back({{"sigma", block.sigma},
                           {"t_star", block.t_star},
                           {"mean_l2", block.mean},
                           {"stddev_l2", block.stddev},
                           {"count", block.count}});
        std::cout << "sigma " << block.sigma << ": t* " << block.t_star << ", mean l2 "
                  << block.mean << "\n";
    }
    std::ofstream os(out_path(cfg, "shift_summary.json"));
    os << json{{"split", "test"}, {"blocks", summary}}.dump(2) << "\n";
    return 0;
}

struct PipelineArgs {
    std::string classifier_path;
    std::string tag;
};

SmoothedPipeline build_pipeline(const json& cfg, const PipelineArgs& args, double sigma) {
    std::string clf_path =
        args.classifier_path.empty() ? out_path(cfg, "classifier_clean.scn") : args.classifier_path;
    Classifier clf{load_net(clf_path)};
    std::optional<Denoiser> den;
    if (cfg.at("certify").at("use_denoiser").get<bool>()) den = load_denoiser_of(cfg);
    return SmoothedPipeline::make(std::move(clf), std::move(den), sigma);
}

std::string tag_of(const json& cfg, const PipelineArgs& args) {
    if (!args.tag.empty()) return args.tag;
    if (args.classifier_path.empty()) return "classifier_clean";
    return fs::path(args.classifier_path).stem().string();
}

int run_certify(const json& cfg, const PipelineArgs& args) {
    echo_config(cfg, "certify");
    auto test = load_split_of(cfg, "test");
    const json& ct = cfg.at("certify");
    auto pipeline = build_pipeline(cfg, args, ct.at("sigma").get<double>());
    CertifyParams params;
    params.n0 = ct.at("n0").get<std::size_t>();
    params.n = ct.at("n").get<std::size_t>();
    params.alpha = ct.at("alpha").get<double>();
    params.seed = cfg.at("seed").get<std::uint64_t>();
    std::size_t max_samples = ct.at("max_samples").get<std::size_t>();

    auto report = evaluate_certification(pipeline, test, params, default_radius_grid(),
                                         resolve_threads(cfg), max_samples);
    std::string tag = tag_of(cfg, args);
    write_certification_csv(report, out_path(cfg, "cert_" + tag + ".csv"),
                            ct.at("include_timings").get<bool>());
    write_timing_log(report, out_path(cfg, "cert_" + tag + "_timing.csv"));
    json summary{{"tag", tag},
                 {"sigma", pipeline.sigma},
                 {"n0", params.n0},
                 {"n", params.n},
                 {"alpha", params.alpha},
                 {"seed", params.seed},
                 {"max_samples", max_samples},
                 {"samples", report.records.size()},
                 {"acr", report.acr},
                 {"radii", report.radii},
                 {"certified_accuracy", report.certified_accuracy}};
    std::ofstream os(out_path(cfg, "cert_" + tag + ".json"));
    os << summary.dump(2) << "\n";
    std::cout << "certified " << report.records.size() << " samples, ACR " << report.acr << "\n";
    return 0;
}

int run_predict(const json& cfg, const PipelineArgs& args) {
    echo_config(cfg, "predict");
    auto test = load_split_of(cfg, "test");
    const json& ct = cfg.at("certify");
    auto pipeline = build_pipeline(cfg, args, ct.at("sigma").get<double>());
    CertifyParams params;
    params.n = ct.at("n").get<std::size_t>();
    params.alpha = ct.at("alpha").get<double>();
    params.seed = cfg.at("seed").get<std::uint64_t>();
    std::size_t max_samples = ct.at("max_samples").get<std::size_t>();
    std::size_t n_samples = max_samples == 0 ? test.size() : std::min(max_samples, test.size());

    std::string tag = tag_of(cfg, args);
    std::ofstream os(out_path(cfg, "pred_" + tag + ".csv"));
    os << "index,label,prediction,correct\n";
    std::size_t correct = 0, abstain = 0;
    std::size_t threads = resolve_threads(cfg);
    for (std::size_t i = 0; i < n_samples; ++i) {
        Rng rng{params.seed, rng_ctx::kCertify + (i << 8) + 1, 0};
        int pred = predict_smoothed(pipeline, test.inputs[i], params, rng, threads);
        bool hit = pred == test.labels[i];
        correct += hit ? 1 : 0;
        abstain += pred == kAbstain ? 1 : 0;
        os << i << ',' << test.labels[i] << ',' << pred << ',' << (hit ? 1 : 0) << '\n';
    }
    std::cout << "predicted " << n_samples << " samples: accuracy "
              << double(correct) / double(n_samples) << ", abstain rate "
              << double(abstain) / double(n_samples) << "\n";
    return 0;
}

int run_report(const json& cfg, const std::vector<std::string>& inputs) {
    echo_config(cfg, "report");
    if (inputs.empty()) throw ConfigError("report: no input CSVs given (use --inputs)");
    auto radii = default_radius_grid();
    json entries = json::array();
    std::cout << "name";
    printf("%14s", "ACR");
    for (double r : radii) printf("  r>%.2f", r);
    std::cout << "\n";
    for (const auto& path : inputs) {
        auto report = summarize_records(read_certification_csv(path), radii);
        std::string name = fs::path(path).stem().string();
        entries.push_back({{"name", name},
                           {"source", path},
                           {"samples", report.records.size()},
                           {"acr", report.acr},
                           {"certified_accuracy", report.certified_accuracy}});
        printf("%s%14.6f", name.c_str(), report.acr);
        for (double v : report.certified_accuracy) printf("  %6.3f", v);
        printf("\n");
    }
    std::ofstream os(out_path(cfg, "report.json"));
    os << json{{"radii", radii}, {"entries", entries}}.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffusion-denoised randomized smoothing toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    long long seed = 0, threads = 0;
    auto* opt_config = app.add_option("--config", config_path, "JSON config file");
    auto* opt_out = app.add_option("--out", out_dir, "output directory");
    auto* opt_seed = app.add_option("--seed", seed, "global seed");
    auto* opt_threads = app.add_option("--threads", threads, "worker threads");

    auto* gen = app.add_subcommand("gen-data", "generate or import dataset splits");
    long long n_per_class = 0, test_n_per_class = 0, classes = 0, side = 0;
    double jitter = -1.0;
    auto* opt_npc = gen->add_option("--n-per-class", n_per_class);
    auto* opt_tnpc = gen->add_option("--test-n-per-class", test_n_per_class);
    auto* opt_classes = gen->add_option("--classes", classes);
    auto* opt_side = gen->add_option("--side", side);
    auto* opt_jitter = gen->add_option("--jitter", jitter);

    auto* tden = app.add_subcommand("train-denoiser", "train the noise-prediction net");
    long long den_epochs = 0;
    auto* opt_den_epochs = tden->add_option("--epochs", den_epochs);

    auto* tclf = app.add_subcommand("train-classifier", "train a base classifier");
    std::string regime, init_path;
    long long clf_epochs = 0, clf_M = 0;
    double clf_sigma = -1.0, clf_eta = -1.0, clf_r_adv = -1.0;
    auto* opt_regime = tclf->add_option("--regime", regime, "clean|gauss_aug|ntd_aug|adv_eps");
    auto* opt_clf_sigma = tclf->add_option("--sigma", clf_sigma);
    auto* opt_clf_eta = tclf->add_option("--eta", clf_eta);
    auto* opt_clf_M = tclf->add_option("--M", clf_M);
    auto* opt_clf_r_adv = tclf->add_option("--r-adv", clf_r_adv, "<= 0 means unbounded");
    auto* opt_clf_epochs = tclf->add_option("--epochs", clf_epochs);
    auto* opt_init = tclf->add_option("--init", init_path, "initial weights (SCN1)");

    auto* attack = app.add_subcommand("attack-dump", "run the shift attack and dump samples");
    PipelineArgs attack_args;
    long long attack_count = 0;
    double attack_eta = -1.0;
    attack->add_option("--classifier", attack_args.classifier_path);
    auto* opt_attack_count = attack->add_option("--count", attack_count);
    auto* opt_attack_eta = attack->add_option("--eta", attack_eta);

    auto* shift = app.add_subcommand("shift-report", "measure denoiser covariate shift");
    std::vector<double> sigmas;
    long long shift_count = 0;
    auto* opt_sigmas = shift->add_option("--sigmas", sigmas);
    auto* opt_shift_count = shift->add_option("--count", shift_count);

    auto* cert = app.add_subcommand("certify", "run CERTIFY over the test split");
    auto* pred = app.add_subcommand("predict", "run PREDICT over the test split");
    PipelineArgs cert_args, pred_args;
    double cert_sigma = -1.0, cert_alpha = -1.0;
    long long cert_n0 = 0, cert_n = 0, cert_max = -1;
    bool no_denoiser = false, include_timings = false;
    for (auto [sub, args] : {std::pair{cert, &cert_args}, std::pair{pred, &pred_args}}) {
        sub->add_option("--classifier", args->classifier_path);
        sub->add_option("--tag", args->tag, "output file tag");
    }
    auto* opt_cert_sigma = cert->add_option("--sigma", cert_sigma);
    auto* opt_cert_n0 = cert->add_option("--n0", cert_n0);
    auto* opt_cert_n = cert->add_option("--n", cert_n);
    auto* opt_cert_alpha = cert->add_option("--alpha", cert_alpha);
    auto* opt_cert_max = cert->add_option("--max-samples", cert_max);
    auto* opt_no_den = cert->add_flag("--no-denoiser", no_denoiser);
    auto* opt_timings = cert->add_flag("--include-timings", include_timings);
    auto* opt_pred_sigma = pred->add_option("--sigma", cert_sigma);
    auto* opt_pred_n = pred->add_option("--n", cert_n);
    auto* opt_pred_alpha = pred->add_option("--alpha", cert_alpha);
    auto* opt_pred_max = pred->add_option("--max-samples", cert_max);
    auto* opt_pred_no_den = pred->add_flag("--no-denoiser", no_denoiser);

    auto* rep = app.add_subcommand("report", "merge certification CSVs into a summary");
    std::vector<std::string> report_inputs;
    rep->add_option("--inputs", report_inputs, "certification CSV paths");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        json cfg = load_config(config_path);
        if (opt_out->count()) cfg["out_dir"] = out_dir;
        if (opt_seed->count()) cfg["seed"] = seed;
        if (opt_threads->count()) cfg["threads"] = threads;
        if (opt_npc->count()) cfg["data"]["n_per_class"] = n_per_class;
        if (opt_tnpc->count()) cfg["data"]["test_n_per_class"] = test_n_per_class;
        if (opt_classes->count()) cfg["data"]["classes"] = classes;
        if (opt_side->count()) cfg["data"]["side"] = side;
        if (opt_jitter->count()) cfg["data"]["jitter"] = jitter;
        if (opt_den_epochs->count()) cfg["denoiser"]["epochs"] = den_epochs;
        if (opt_regime->count()) cfg["classifier"]["regime"] = regime;
        if (opt_clf_sigma->count()) cfg["classifier"]["sigma"] = clf_sigma;
        if (opt_clf_eta->count()) cfg["classifier"]["eta"] = clf_eta;
        if (opt_clf_M->count()) cfg["classifier"]["M"] = clf_M;
        if (opt_clf_r_adv->count()) cfg["classifier"]["r_adv"] = clf_r_adv;
        if (opt_clf_epochs->count()) cfg["classifier"]["epochs"] = clf_epochs;
        if (opt_init->count()) cfg["classifier"]["init"] = init_path;
        if (opt_attack_count->count()) cfg["attack"]["count"] = attack_count;
        if (opt_attack_eta->count()) cfg["attack"]["eta"] = attack_eta;
        if (opt_sigmas->count()) cfg["shift"]["sigmas"] = sigmas;
        if (opt_shift_count->count()) cfg["shift"]["count"] = shift_count;
        if (opt_cert_sigma->count() || opt_pred_sigma->count()) {
            cfg["certify"]["sigma"] = cert_sigma;
        }
        if (opt_cert_n0->count()) cfg["certify"]["n0"] = cert_n0;
        if (opt_cert_n->count() || opt_pred_n->count()) cfg["certify"]["n"] = cert_n;
        if (opt_cert_alpha->count() || opt_pred_alpha->count()) {
            cfg["certify"]["alpha"] = cert_alpha;
        }
        if (opt_cert_max->count() || opt_pred_max->count()) {
            cfg["certify"]["max_samples"] = cert_max;
        }
        if (opt_no_den->count() || opt_pred_no_den->count()) {
            cfg["certify"]["use_denoiser"] = !no_denoiser;
        }
        if (opt_timings->count()) cfg["certify"]["include_timings"] = include_timings;

        if (gen->parsed()) return run_gen_data(cfg);
        if (tden->parsed()) return run_train_denoiser(cfg);
        if (tclf->parsed()) return run_train_classifier(cfg);
        if (attack->parsed()) return run_attack_dump(cfg, attack_args.classifier_path);
        if (shift->parsed()) return run_shift_report(cfg);
        if (cert->parsed()) return run_certify(cfg, cert_args);
        if (pred->parsed()) return run_predict(cfg, pred_args);
        if (rep->parsed()) return run_report(cfg, report_inputs);
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
