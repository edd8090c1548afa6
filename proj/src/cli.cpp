#include "sasv/cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "sasv/io.hpp"
#include "sasv/metrics.hpp"
#include "sasv/scoring.hpp"

namespace sasv::cli {

using ordered_json = nlohmann::ordered_json;

namespace {

void check_keys(const ordered_json& j,
                std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!j.is_object())
        throw std::invalid_argument("config section '" + where +
                                    "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok)
            throw std::invalid_argument("unknown config key '" + where + "." +
                                        it.key() + "'");
    }
}

template <class T>
void maybe(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

Priors priors_from_json(const ordered_json& j, const std::string& where) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 3)
        throw std::invalid_argument("config key '" + where +
                                    "' must be [pi_tar, pi_non, pi_spf]");
    return Priors(v[0], v[1], v[2]);
}

Priors parse_priors_arg(const std::string& s, const std::string& what) {
    std::vector<double> v;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t pos = s.find(',', start);
        const std::string tok =
            pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start);
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument("junk");
        } catch (const std::exception&) {
            throw std::invalid_argument("cannot parse " + what + " '" + s +
                                        "': expected pi_tar,pi_non,pi_spf");
        }
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (v.size() != 3)
        throw std::invalid_argument(what + " must have three components");
    return Priors(v[0], v[1], v[2]);
}

}  // namespace

RunConfig load_run_config(const std::optional<std::filesystem::path>& path) {
    RunConfig cfg;
    if (!path) return cfg;
    std::ifstream in(*path);
    if (!in)
        throw std::invalid_argument("cannot open config '" + path->string() +
                                    "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const std::exception& e) {
        throw std::invalid_argument("config '" + path->string() +
                                    "': " + e.what());
    }
    check_keys(j, {"synth", "trials", "encoder", "train", "scoring", "metrics"},
               "(root)");

    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        check_keys(s,
                   {"n_speakers", "utts_per_speaker", "dim", "speaker_scale",
                    "channel_scale", "n_attacks", "spoof_fidelity",
                    "artifact_scale", "seed"},
                   "synth");
        maybe(s, "n_speakers", cfg.synth.n_speakers);
        maybe(s, "utts_per_speaker", cfg.synth.utts_per_speaker);
        maybe(s, "dim", cfg.synth.dim);
        maybe(s, "speaker_scale", cfg.synth.speaker_scale);
        maybe(s, "channel_scale", cfg.synth.channel_scale);
        maybe(s, "n_attacks", cfg.synth.n_attacks);
        maybe(s, "spoof_fidelity", cfg.synth.spoof_fidelity);
        maybe(s, "artifact_scale", cfg.synth.artifact_scale);
        maybe(s, "seed", cfg.synth.seed);
    }
    if (j.contains("trials")) {
        const auto& s = j.at("trials");
        check_keys(s, {"n_per_class", "k_enroll", "strategy", "seed"}, "trials");
        maybe(s, "n_per_class", cfg.trials.n_per_class);
        maybe(s, "k_enroll", cfg.trials.k_enroll);
        if (s.contains("strategy"))
            cfg.trials.strategy =
                strategy_from_string(s.at("strategy").get<std::string>());
        maybe(s, "seed", cfg.trials.seed);
    }
    if (j.contains("encoder")) {
        const auto& s = j.at("encoder");
        check_keys(s, {"aggregation", "dim", "n_heads", "seed"}, "encoder");
        if (s.contains("aggregation"))
            cfg.encoder.aggregation =
                aggregation_from_string(s.at("aggregation").get<std::string>());
        maybe(s, "dim", cfg.encoder.dim);
        maybe(s, "n_heads", cfg.encoder.n_heads);
        maybe(s, "seed", cfg.encoder.seed);
    }
    if (j.contains("train")) {
        const auto& s = j.at("train");
        check_keys(s,
                   {"epochs", "batch_size", "learning_rate", "optimizer",
                    "adam_beta1", "adam_beta2", "adam_epsilon", "seed",
                    "shuffle"},
                   "train");
        maybe(s, "epochs", cfg.train.epochs);
        maybe(s, "batch_size", cfg.train.batch_size);
        maybe(s, "learning_rate", cfg.train.learning_rate);
        if (s.contains("optimizer"))
            cfg.train.optimizer =
                optimizer_from_string(s.at("optimizer").get<std::string>());
        maybe(s, "adam_beta1", cfg.train.adam_beta1);
        maybe(s, "adam_beta2", cfg.train.adam_beta2);
        maybe(s, "adam_epsilon", cfg.train.adam_epsilon);
        maybe(s, "seed", cfg.train.seed);
        maybe(s, "shuffle", cfg.train.shuffle);
    }
    if (j.contains("scoring")) {
        const auto& s = j.at("scoring");
        check_keys(s, {"pi_eval", "calib_iterations", "calib_learning_rate"},
                   "scoring");
        if (s.contains("pi_eval"))
            cfg.scoring.pi_eval =
                priors_from_json(s.at("pi_eval"), "scoring.pi_eval");
        maybe(s, "calib_iterations", cfg.scoring.calib_iterations);
        maybe(s, "calib_learning_rate", cfg.scoring.calib_learning_rate);
    }
    if (j.contains("metrics")) {
        const auto& s = j.at("metrics");
        check_keys(s,
                   {"pi_eval", "c_miss", "c_fa_non", "c_fa_spf", "normalize",
                    "n_bins"},
                   "metrics");
        if (s.contains("pi_eval"))
            cfg.metrics.pi_eval =
                priors_from_json(s.at("pi_eval"), "metrics.pi_eval");
        maybe(s, "c_miss", cfg.metrics.c_miss);
        maybe(s, "c_fa_non", cfg.metrics.c_fa_non);
        maybe(s, "c_fa_spf", cfg.metrics.c_fa_spf);
        maybe(s, "normalize", cfg.metrics.normalize);
        maybe(s, "n_bins", cfg.metrics.n_bins);
    }
    return cfg;
}

std::string canonical_config_json(const RunConfig& cfg) {
    ordered_json j;
    j["synth"] = {{"n_speakers", cfg.synth.n_speakers},
                  {"utts_per_speaker", cfg.synth.utts_per_speaker},
                  {"dim", cfg.synth.dim},
                  {"speaker_scale", cfg.synth.speaker_scale},
                  {"channel_scale", cfg.synth.channel_scale},
                  {"n_attacks", cfg.synth.n_attacks},
                  {"spoof_fidelity", cfg.synth.spoof_fidelity},
                  {"artifact_scale", cfg.synth.artifact_scale},
                  {"seed", cfg.synth.seed}};
    j["trials"] = {{"n_per_class", cfg.trials.n_per_class},
                   {"k_enroll", cfg.trials.k_enroll},
                   {"strategy", to_string(cfg.trials.strategy)},
                   {"seed", cfg.trials.seed}};
    j["encoder"] = {{"aggregation", to_string(cfg.encoder.aggregation)},
                    {"dim", cfg.encoder.dim},
                    {"n_heads", cfg.encoder.n_heads},
                    {"seed", cfg.encoder.seed}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"optimizer", to_string(cfg.train.optimizer)},
                  {"adam_beta1", cfg.train.adam_beta1},
                  {"adam_beta2", cfg.train.adam_beta2},
                  {"adam_epsilon", cfg.train.adam_epsilon},
                  {"seed", cfg.train.seed},
                  {"shuffle", cfg.train.shuffle}};
    j["scoring"] = {
        {"pi_eval",
         {cfg.scoring.pi_eval.tar(), cfg.scoring.pi_eval.non(),
          cfg.scoring.pi_eval.spf()}},
        {"calib_iterations", cfg.scoring.calib_iterations},
        {"calib_learning_rate", cfg.scoring.calib_learning_rate}};
    j["metrics"] = {{"pi_eval",
                     {cfg.metrics.pi_eval.tar(), cfg.metrics.pi_eval.non(),
                      cfg.metrics.pi_eval.spf()}},
                    {"c_miss", cfg.metrics.c_miss},
                    {"c_fa_non", cfg.metrics.c_fa_non},
                    {"c_fa_spf", cfg.metrics.c_fa_spf},
                    {"normalize", cfg.metrics.normalize},
                    {"n_bins", cfg.metrics.n_bins}};
    return j.dump();
}

namespace {

io::Provenance make_prov(std::vector<std::string> inputs,
                         std::optional<std::uint64_t> seed,
                         const RunConfig& cfg) {
    io::Provenance p;
    p.inputs = std::move(inputs);
    p.seed = seed;
    p.config_hash = io::fnv1a64_hex(canonical_config_json(cfg));
    return p;
}

void check_refs(const std::vector<UtteranceRecord>& manifest,
                const EmbeddingStore& store) {
    for (const auto& rec : manifest)
        if (rec.embedding_ref >= store.size())
            throw std::invalid_argument(
                "utterance '" + rec.utt_id + "' references embedding row " +
                std::to_string(rec.embedding_ref) + " beyond store size " +
                std::to_string(store.size()));
}

ordered_json json_number_or_inf(double x) {
    if (std::isfinite(x)) return x;
    return x > 0 ? "inf" : "-inf";
}

struct ScoreOutputs {
    std::vector<ScoreRecord> scores;
    std::vector<io::LogitRecord> logit_rows;
};

ScoreOutputs score_trials(const std::vector<Trial>& trials,
                          const ManifestIndex& index,
                          const EmbeddingStore& store,
                          const EncoderParams& model,
                          const std::optional<TrainPriors>& pi_train,
                          const Priors& pi_eval,
                          const std::optional<CalibrationParams>& calib) {
    ScoreOutputs out;
    out.scores.reserve(trials.size());
    out.logit_rows.reserve(trials.size());
    EncoderScratch scratch;
    std::vector<std::span<const double>> rows;
    for (const auto& trial : trials) {
        rows.clear();
        for (const auto& id : trial.enroll_ids)
            rows.push_back(store.row(index.embedding_ref(id)));
        const auto e_t = store.row(index.embedding_ref(trial.test_id));
        const ClassLogits logits = forward_rows(e_t, rows, model, scratch);
        double llr;
        if (calib) {
            llr = calibrated_llr(logits, *calib);
        } else {
            llr = llr_from_logits(adjust_logits(logits, *pi_train), pi_eval);
        }
        std::string attack;
        if (trial.label == TrialClass::Spoof)
            attack = index.record(trial.test_id).attack_label;
        out.scores.push_back({trial.trial_id, trial.label, attack, llr});
        out.logit_rows.push_back({trial.trial_id, trial.label, attack, logits});
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"spoofing-robust speaker verification toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool have_seed = false;

    auto add_common = [&](CLI::App* sub, bool with_seed) {
        sub->add_option("--config", config_path,
                        "JSON experiment config (defaults when omitted)");
        if (with_seed)
            sub->add_option("--seed", seed_override, "override the stage seed")
                ->each([&](const std::string&) { have_seed = true; });
    };

    // synth
    auto* synth = app.add_subcommand(
        "synth", "generate a synthetic population (manifest + embeddings)");
    std::string synth_out_dir;
    add_common(synth, true);
    synth->add_option("--out-dir", synth_out_dir, "output directory")
        ->required();

    // trials
    auto* trials_cmd =
        app.add_subcommand("trials", "build a balanced three-class trial set");
    std::string tr_manifest, tr_embeddings, tr_out;
    add_common(trials_cmd, true);
    trials_cmd->add_option("--manifest", tr_manifest, "manifest JSONL")
        ->required();
    trials_cmd->add_option("--embeddings", tr_embeddings, "embedding store")
        ->required();
    trials_cmd->add_option("--out", tr_out, "output trials JSONL")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "train the cross-encoder");
    std::string tn_trials, tn_manifest, tn_embeddings, tn_model, tn_losscurve;
    add_common(train_cmd, true);
    train_cmd->add_option("--trials", tn_trials, "training trials JSONL")
        ->required();
    train_cmd->add_option("--manifest", tn_manifest, "manifest JSONL")
        ->required();
    train_cmd->add_option("--embeddings", tn_embeddings, "embedding store")
        ->required();
    train_cmd->add_option("--out-model", tn_model, "output model JSON")
        ->required();
    train_cmd->add_option("--out-losscurve", tn_losscurve,
                          "output per-epoch loss CSV");

    // score
    auto* score_cmd =
        app.add_subcommand("score", "score trials with a trained model");
    std::string sc_trials, sc_manifest, sc_embeddings, sc_model, sc_train_trials,
        sc_pi_train, sc_pi_eval, sc_calib, sc_out_scores, sc_out_logits;
    add_common(score_cmd, false);
    score_cmd->add_option("--trials", sc_trials, "trials JSONL")->required();
    score_cmd->add_option("--manifest", sc_manifest, "manifest JSONL")
        ->required();
    score_cmd->add_option("--embeddings", sc_embeddings, "embedding store")
        ->required();
    score_cmd->add_option("--model", sc_model, "model JSON")->required();
    score_cmd->add_option(
        "--train-trials", sc_train_trials,
        "training trials JSONL; training priors are measured from it");
    score_cmd->add_option("--pi-train", sc_pi_train,
                          "explicit training priors pi_tar,pi_non,pi_spf");
    score_cmd->add_option("--pi-eval", sc_pi_eval,
                          "evaluation priors pi_tar,pi_non,pi_spf");
    score_cmd->add_option("--calib", sc_calib,
                          "calibration JSON; scores use the calibrated LLR");
    score_cmd->add_option("--out-scores", sc_out_scores, "output scores TSV")
        ->required();
    score_cmd->add_option("--out-logits", sc_out_logits, "output logits TSV");

    // calibrate
    auto* calib_cmd = app.add_subcommand(
        "calibrate", "fit calibration parameters on a dev logit dump");
    std::string cb_logits, cb_pi_eval, cb_out;
    add_common(calib_cmd, false);
    calib_cmd->add_option("--logits", cb_logits, "dev logits TSV")->required();
    calib_cmd->add_option("--pi-eval", cb_pi_eval,
                          "evaluation priors pi_tar,pi_non,pi_spf");
    calib_cmd->add_option("--out", cb_out, "output calibration JSON")
        ->required();

    // eval
    auto* eval_cmd =
        app.add_subcommand("eval", "a-DCF evaluation of one or more score files");
    std::vector<std::string> ev_scores;
    std::string ev_pi_eval, ev_out;
    add_common(eval_cmd, false);
    eval_cmd->add_option("--scores", ev_scores, "scores TSV (repeatable)")
        ->required();
    eval_cmd->add_option("--pi-eval", ev_pi_eval,
                         "evaluation priors pi_tar,pi_non,pi_spf");
    eval_cmd->add_option("--out", ev_out, "output report JSON")->required();

    // hist
    auto* hist_cmd = app.add_subcommand(
        "hist", "score histograms as plot-ready CSV");
    std::string hs_scores, hs_out;
    std::size_t hs_bins = 0;
    bool hs_by_attack = false;
    add_common(hist_cmd, false);
    hist_cmd->add_option("--scores", hs_scores, "scores TSV")->required();
    hist_cmd->add_option("--bins", hs_bins, "number of bins");
    hist_cmd->add_flag("--by-attack", hs_by_attack,
                       "also emit per-attack spoof histograms");
    hist_cmd->add_option("--out", hs_out, "output histogram CSV")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "E_VALIDATION: " << e.what() << "\n";
        return 2;
    }

    try {
        RunConfig cfg = load_run_config(
            config_path.empty()
                ? std::nullopt
                : std::optional<std::filesystem::path>(config_path));

        if (synth->parsed()) {
            if (have_seed) cfg.synth.seed = seed_override;
            const Population pop = generate_population(cfg.synth);
            const std::filesystem::path dir(synth_out_dir);
            io::write_manifest(dir / "manifest.jsonl", pop.manifest);
            io::write_embeddings(dir / "embeddings.bin", pop.embeddings);
            out << "wrote " << (dir / "manifest.jsonl").string() << " ("
                << pop.manifest.size() << " utterances) and "
                << (dir / "embeddings.bin").string() << "\n";
            return 0;
        }

        if (trials_cmd->parsed()) {
            if (have_seed) cfg.trials.seed = seed_override;
            const auto manifest = io::read_manifest(tr_manifest);
            const auto store = io::read_embeddings(tr_embeddings);
            check_refs(manifest, store);
            const auto trials = build_trials(manifest, store, cfg.trials);
            io::write_trials(tr_out, trials);
            out << "wrote " << tr_out << " (" << trials.size() << " trials)\n";
            return 0;
        }

        if (train_cmd->parsed()) {
            if (have_seed) cfg.train.seed = seed_override;
            const auto manifest = io::read_manifest(tn_manifest);
            const auto store = io::read_embeddings(tn_embeddings);
            check_refs(manifest, store);
            const auto trials = io::read_trials(tn_trials);
            if (cfg.encoder.dim != store.dim())
                throw std::invalid_argument(
                    "encoder dim " + std::to_string(cfg.encoder.dim) +
                    " does not match embedding dim " +
                    std::to_string(store.dim()));
            const ManifestIndex index(manifest);
            const EncoderParams init = init_encoder_params(
                cfg.encoder.aggregation, cfg.encoder.dim, cfg.encoder.n_heads,
                cfg.encoder.seed);
            const TrainResult result =
                train(trials, index, store, init, cfg.train);
            io::write_model(tn_model, result.params,
                            make_prov({tn_trials, tn_manifest, tn_embeddings},
                                      cfg.train.seed, cfg));
            if (!tn_losscurve.empty())
                io::write_loss_curve(tn_losscurve, result.loss_curve);
            out << "wrote " << tn_model << " (final mean loss "
                << io::format_double(result.loss_curve.back()) << ")\n";
            return 0;
        }

        if (score_cmd->parsed()) {
            const auto manifest = io::read_manifest(sc_manifest);
            const auto store = io::read_embeddings(sc_embeddings);
            check_refs(manifest, store);
            const auto trials = io::read_trials(sc_trials);
            const auto model = io::read_model(sc_model);
            const ManifestIndex index(manifest);

            std::optional<CalibrationParams> calib;
            if (!sc_calib.empty()) calib = io::read_calibration(sc_calib);

            std::optional<TrainPriors> pi_train;
            if (!sc_pi_train.empty()) {
                const Priors p = parse_priors_arg(sc_pi_train, "--pi-train");
                pi_train = TrainPriors(p.tar(), p.non(), p.spf());
            } else if (!sc_train_trials.empty()) {
                pi_train = TrainPriors::from_trials(
                    io::read_trials(sc_train_trials));
            } else if (!calib) {
                throw std::invalid_argument(
                    "score needs --train-trials or --pi-train (training "
                    "priors are measured, not assumed) unless --calib is "
                    "given");
            }
            Priors pi_eval = cfg.scoring.pi_eval;
            if (!sc_pi_eval.empty())
                pi_eval = parse_priors_arg(sc_pi_eval, "--pi-eval");

            const ScoreOutputs so = score_trials(trials, index, store, model,
                                                 pi_train, pi_eval, calib);
            io::write_scores(sc_out_scores, so.scores);
            if (!sc_out_logits.empty()) io::write_logits(sc_out_logits, so.logit_rows);
            out << "wrote " << sc_out_scores << " (" << so.scores.size()
                << " trials)\n";
            return 0;
        }

        if (calib_cmd->parsed()) {
            const auto rows = io::read_logits(cb_logits);
            std::vector<std::pair<ClassLogits, TrialClass>> dev;
            dev.reserve(rows.size());
            for (const auto& r : rows) dev.emplace_back(r.logits, r.label);
            Priors pi_eval = cfg.scoring.pi_eval;
            if (!cb_pi_eval.empty())
                pi_eval = parse_priors_arg(cb_pi_eval, "--pi-eval");
            CalibFitConfig fit_cfg;
            fit_cfg.iterations = cfg.scoring.calib_iterations;
            fit_cfg.learning_rate = cfg.scoring.calib_learning_rate;
            const CalibrationParams calib =
                fit_calibration(dev, pi_eval, fit_cfg);
            io::write_calibration(cb_out, calib,
                                  make_prov({cb_logits}, std::nullopt, cfg));
            out << "wrote " << cb_out << "\n";
            return 0;
        }

        if (eval_cmd->parsed()) {
            Priors pi_eval = cfg.metrics.pi_eval;
            if (!ev_pi_eval.empty())
                pi_eval = parse_priors_arg(ev_pi_eval, "--pi-eval");
            ADCFConfig adcf;
            adcf.priors = pi_eval;
            adcf.c_miss = cfg.metrics.c_miss;
            adcf.c_fa_non = cfg.metrics.c_fa_non;
            adcf.c_fa_spf = cfg.metrics.c_fa_spf;
            adcf.normalize = cfg.metrics.normalize;

            ordered_json sets = ordered_json::array();
            double macro = 0.0;
            for (const auto& path : ev_scores) {
                const auto scores = io::read_scores(path);
                const MinADCF mres = min_a_dcf(scores, adcf);
                const double tau_b = bayes_threshold(pi_eval);
                const double cost_b = a_dcf(scores, tau_b, adcf);
                const ErrorRates er = error_rates(scores, mres.tau_star);
                std::size_t counts[3] = {0, 0, 0};
                for (const auto& s : scores)
                    ++counts[static_cast<std::size_t>(s.label)];
                ordered_json js;
                js["scores"] = path;
                js["n_target"] = counts[0];
                js["n_nontarget"] = counts[1];
                js["n_spoof"] = counts[2];
                js["min_a_dcf"] = mres.min_cost;
                js["tau_star"] = json_number_or_inf(mres.tau_star);
                js["bayes_threshold"] = tau_b;
                js["cost_at_bayes_threshold"] = cost_b;
                js["error_rates_at_tau_star"] = {{"p_miss", er.p_miss},
                                                 {"p_fa_nontarget", er.p_fa_non},
                                                 {"p_fa_spoof", er.p_fa_spf}};
                sets.push_back(js);
                macro += mres.min_cost;
            }
            macro /= static_cast<double>(ev_scores.size());

            ordered_json report;
            report["format"] = "sasv-report";
            report["version"] = 1;
            report["priors"] = {pi_eval.tar(), pi_eval.non(), pi_eval.spf()};
            report["costs"] = {{"c_miss", adcf.c_miss},
                               {"c_fa_non", adcf.c_fa_non},
                               {"c_fa_spf", adcf.c_fa_spf},
                               {"normalize", adcf.normalize}};
            if (ev_scores.size() == 1) {
                for (auto& [key, value] : sets[0].items())
                    if (key != "scores") report[key] = value;
            } else {
                report["macro_min_a_dcf"] = macro;
            }
            report["sets"] = sets;
            report["provenance"] = ordered_json::object();
            {
                const io::Provenance prov =
                    make_prov(ev_scores, std::nullopt, cfg);
                report["provenance"] = {{"tool", "sasv"},
                                        {"version", io::kToolVersion},
                                        {"inputs", prov.inputs},
                                        {"seed", nullptr},
                                        {"config_hash", prov.config_hash}};
            }
            io::atomic_write(ev_out, [&](std::ostream& o) {
                o << report.dump(2) << '\n';
            });
            out << "wrote " << ev_out << " (min a-DCF "
                << io::format_double(ev_scores.size() == 1
                                         ? sets[0]["min_a_dcf"].get<double>()
                                         : macro)
                << ")\n";
            return 0;
        }

        if (hist_cmd->parsed()) {
            const auto scores = io::read_scores(hs_scores);
            const std::size_t bins = hs_bins == 0 ? cfg.metrics.n_bins : hs_bins;
            const auto rows = score_histograms(scores, bins, hs_by_attack);
            io::atomic_write(hs_out, [&](std::ostream& o) {
                o << "class,attack,bin_lo,bin_hi,count\n";
                for (const auto& r : rows) {
                    o << to_string(r.cls) << ','
                      << (r.attack.empty() ? "-" : r.attack) << ','
                      << io::format_double(r.bin_lo) << ','
                      << io::format_double(r.bin_hi) << ',' << r.count << '\n';
                }
            });
            out << "wrote " << hs_out << " (" << rows.size() << " rows)\n";
            return 0;
        }

        err << "E_VALIDATION: no subcommand given\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "E_VALIDATION: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "E_RUNTIME: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace sasv::cli
