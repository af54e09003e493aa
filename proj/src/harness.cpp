#include "sscl/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sscl/pl_baselines.hpp"
#include "sscl/rng.hpp"
#include "sscl/svg.hpp"

namespace sscl {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) ok = true;
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
}

StreamType parse_stream_type(const std::string& s) {
    if (s == "transform-permutation") return StreamType::TransformPermutation;
    if (s == "transform-rotation") return StreamType::TransformRotation;
    if (s == "split") return StreamType::Split;
    throw std::invalid_argument("config: unknown stream type '" + s + "'");
}

std::string stream_type_name(StreamType t) {
    switch (t) {
        case StreamType::TransformPermutation: return "transform-permutation";
        case StreamType::TransformRotation: return "transform-rotation";
        default: return "split";
    }
}

Strategy parse_strategy(const std::string& s) {
    if (s == "plain") return Strategy::Plain;
    if (s == "gem") return Strategy::Gem;
    if (s == "dcl") return Strategy::Dcl;
    throw std::invalid_argument("config: unknown strategy '" + s + "'");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Plain: return "plain";
        case Strategy::Gem: return "gem";
        default: return "dcl";
    }
}

Method parse_method(const std::string& s) {
    if (s == "none") return Method::None;
    if (s == "grad-learner") return Method::GradLearner;
    if (s == "1-pl") return Method::OnePL;
    if (s == "p-pl") return Method::ProbPL;
    if (s == "noise-uniform") return Method::NoiseUniform;
    if (s == "noise-normal") return Method::NoiseNormal;
    if (s == "noise-uniform-normalized") return Method::NoiseUniformNormalized;
    if (s == "noise-normal-normalized") return Method::NoiseNormalNormalized;
    throw std::invalid_argument("config: unknown method '" + s + "'");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::None: return "none";
        case Method::GradLearner: return "grad-learner";
        case Method::OnePL: return "1-pl";
        case Method::ProbPL: return "p-pl";
        case Method::NoiseUniform: return "noise-uniform";
        case Method::NoiseNormal: return "noise-normal";
        case Method::NoiseUniformNormalized: return "noise-uniform-normalized";
        default: return "noise-normal-normalized";
    }
}

std::size_t env_threads() {
    if (const char* s = std::getenv("SSCL_THREADS")) {
        const long n = std::atol(s);
        if (n > 0) return static_cast<std::size_t>(n);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    reject_unknown(j, {"stream", "model_hidden", "strategy", "method", "learner", "policy",
                       "pool", "eta", "memory_budget", "gem", "dcl_gamma", "seeds", "out_dir",
                       "trace"},
                   "root");
    if (j.contains("stream")) {
        const json& s = j.at("stream");
        reject_unknown(s, {"type", "num_tasks", "num_classes", "dim", "samples_per_class",
                           "test_per_class", "mean_radius", "batch_size", "data_seed"},
                       "stream");
        if (s.contains("type")) cfg.stream.type = parse_stream_type(s.at("type"));
        if (s.contains("num_tasks")) cfg.stream.num_tasks = s.at("num_tasks");
        if (s.contains("num_classes")) cfg.stream.num_classes = s.at("num_classes");
        if (s.contains("dim")) cfg.stream.dim = s.at("dim");
        if (s.contains("samples_per_class")) cfg.stream.samples_per_class = s.at("samples_per_class");
        if (s.contains("test_per_class")) cfg.stream.test_per_class = s.at("test_per_class");
        if (s.contains("mean_radius")) cfg.stream.mean_radius = s.at("mean_radius");
        if (s.contains("batch_size")) cfg.stream.batch_size = s.at("batch_size");
        if (s.contains("data_seed")) cfg.stream.data_seed = s.at("data_seed").get<std::uint64_t>();
    }
    if (j.contains("model_hidden"))
        cfg.model_hidden = j.at("model_hidden").get<std::vector<std::size_t>>();
    if (j.contains("strategy")) cfg.strategy = parse_strategy(j.at("strategy"));
    if (j.contains("method")) cfg.method = parse_method(j.at("method"));
    cfg.learner.eta = cfg.eta;
    if (j.contains("learner")) {
        const json& l = j.at("learner");
        reject_unknown(l, {"arch", "alpha", "lambda", "eta_hat", "warmup", "straight_through"},
                       "learner");
        if (l.contains("arch")) cfg.learner.hidden = l.at("arch").get<std::vector<std::size_t>>();
        if (l.contains("alpha")) cfg.learner.alpha = l.at("alpha");
        if (l.contains("lambda")) cfg.learner.lambda = l.at("lambda");
        if (l.contains("eta_hat")) cfg.learner.eta_hat = l.at("eta_hat");
        if (l.contains("warmup")) cfg.learner.warmup = l.at("warmup");
        if (l.contains("straight_through")) cfg.learner.straight_through = l.at("straight_through");
    }
    if (j.contains("policy")) {
        const json& p = j.at("policy");
        reject_unknown(p, {"p", "unlabeled_batch"}, "policy");
        if (p.contains("p")) cfg.policy_p = p.at("p");
        if (p.contains("unlabeled_batch")) cfg.unlabeled_batch = p.at("unlabeled_batch");
    }
    if (j.contains("pool")) {
        const json& p = j.at("pool");
        reject_unknown(p, {"size", "overlap", "novel_classes"}, "pool");
        if (p.contains("size")) cfg.pool.size = p.at("size");
        if (p.contains("overlap")) cfg.pool.overlap = p.at("overlap");
        if (p.contains("novel_classes")) cfg.pool.novel_classes = p.at("novel_classes");
    }
    if (j.contains("eta")) cfg.eta = j.at("eta");
    if (j.contains("memory_budget")) cfg.memory_budget = j.at("memory_budget");
    if (j.contains("gem")) {
        const json& g = j.at("gem");
        reject_unknown(g, {"margin", "max_iters", "tolerance"}, "gem");
        if (g.contains("margin")) cfg.gem.margin = g.at("margin");
        if (g.contains("max_iters")) cfg.gem.qp_max_iters = g.at("max_iters");
        if (g.contains("tolerance")) cfg.gem.qp_tolerance = g.at("tolerance");
    }
    if (j.contains("dcl_gamma")) cfg.dcl_gamma = j.at("dcl_gamma");
    if (j.contains("seeds")) {
        cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (cfg.seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    }
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir");
    if (j.contains("trace")) cfg.keep_trace = j.at("trace");

    // Mirror eta into the fitness loss unless eta_hat was pinned separately.
    if (!j.contains("learner") || !j.at("learner").contains("eta_hat"))
        cfg.learner.eta_hat = cfg.eta;
    cfg.learner.eta = cfg.eta;

    if (cfg.policy_p < 0.0 || cfg.policy_p > 1.0)
        throw std::invalid_argument("config: policy.p outside [0,1]");
    if (cfg.eta <= 0.0) throw std::invalid_argument("config: eta must be > 0");
    if (cfg.stream.num_tasks < 2) throw std::invalid_argument("config: num_tasks must be >= 2");
    if (cfg.stream.type == StreamType::Split &&
        cfg.stream.num_classes % cfg.stream.num_tasks != 0)
        throw std::invalid_argument("config: num_classes not divisible by num_tasks for split");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["stream"] = {{"type", stream_type_name(cfg.stream.type)},
                   {"num_tasks", cfg.stream.num_tasks},
                   {"num_classes", cfg.stream.num_classes},
                   {"dim", cfg.stream.dim},
                   {"samples_per_class", cfg.stream.samples_per_class},
                   {"test_per_class", cfg.stream.test_per_class},
                   {"mean_radius", cfg.stream.mean_radius},
                   {"batch_size", cfg.stream.batch_size}};
    if (cfg.stream.data_seed) j["stream"]["data_seed"] = *cfg.stream.data_seed;
    j["model_hidden"] = cfg.model_hidden;
    j["strategy"] = strategy_name(cfg.strategy);
    j["method"] = method_name(cfg.method);
    j["learner"] = {{"arch", cfg.learner.hidden},
                    {"alpha", cfg.learner.alpha},
                    {"lambda", cfg.learner.lambda},
                    {"eta_hat", cfg.learner.eta_hat},
                    {"warmup", cfg.learner.warmup},
                    {"straight_through", cfg.learner.straight_through}};
    j["policy"] = {{"p", cfg.policy_p}, {"unlabeled_batch", cfg.unlabeled_batch}};
    j["pool"] = {{"size", cfg.pool.size},
                 {"overlap", cfg.pool.overlap},
                 {"novel_classes", cfg.pool.novel_classes}};
    j["eta"] = cfg.eta;
    j["memory_budget"] = cfg.memory_budget;
    j["gem"] = {{"margin", cfg.gem.margin},
                {"max_iters", cfg.gem.qp_max_iters},
                {"tolerance", cfg.gem.qp_tolerance}};
    j["dcl_gamma"] = cfg.dcl_gamma;
    j["seeds"] = cfg.seeds;
    j["out_dir"] = cfg.out_dir;
    j["trace"] = cfg.keep_trace;
    // Run metadata notes, not tunables: draws are with replacement; the DCL
    // rule is a reconstruction from its published objective.
    j["notes"] = {{"unlabeled_sampling", "with-replacement"},
                  {"dcl_rule", "reconstructed-single-constraint-alignment"}};
    return j;
}

RunRecord run_experiment(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.seed = seed;

    const std::uint64_t data_seed = cfg.stream.data_seed.value_or(mix_seed(seed, 10));
    const Dataset train_ds =
        make_synthetic_dataset(cfg.stream.num_classes, cfg.stream.dim,
                               cfg.stream.samples_per_class, data_seed, cfg.stream.mean_radius, 0);
    const Dataset test_ds =
        make_synthetic_dataset(cfg.stream.num_classes, cfg.stream.dim, cfg.stream.test_per_class,
                               data_seed, cfg.stream.mean_radius, 1);
    Continuum continuum;
    switch (cfg.stream.type) {
        case StreamType::TransformPermutation:
            continuum = make_transform_tasks(train_ds, test_ds, cfg.stream.num_tasks,
                                             TransformKind::FeaturePermutation, data_seed);
            break;
        case StreamType::TransformRotation:
            continuum = make_transform_tasks(train_ds, test_ds, cfg.stream.num_tasks,
                                             TransformKind::OrthogonalRotation, data_seed);
            break;
        case StreamType::Split:
            continuum = make_split_tasks(train_ds, test_ds, cfg.stream.num_tasks, data_seed);
            break;
    }
    const bool mask = continuum.split_protocol;
    const std::size_t T = continuum.tasks.size();
    const std::size_t K = static_cast<std::size_t>(continuum.num_classes);

    std::vector<std::size_t> model_dims;
    model_dims.push_back(static_cast<std::size_t>(continuum.dim));
    model_dims.insert(model_dims.end(), cfg.model_hidden.begin(), cfg.model_hidden.end());
    model_dims.push_back(K);
    MlpModel model = make_mlp(model_dims, mix_seed(seed, 1));

    std::optional<GradientLearner> learner;
    if (cfg.method == Method::GradLearner) {
        LearnerConfig lc = cfg.learner;
        lc.eta = cfg.eta;
        learner.emplace(K, lc, mix_seed(seed, 2));
    }
    std::optional<TeacherModel> teacher;
    if (cfg.method == Method::OnePL || cfg.method == Method::ProbPL) {
        std::vector<std::size_t> bb(model_dims.begin(), model_dims.end() - 1);
        teacher.emplace(bb, cfg.eta, mix_seed(seed, 7));
    }

    std::vector<UnlabeledSample> pool;
    std::optional<SamplingPolicy> policy;
    if (cfg.method != Method::None) {
        pool = make_unlabeled_pool(train_ds, cfg.pool.size, mix_seed(seed, 4), cfg.pool.overlap,
                                   cfg.pool.novel_classes);
        policy.emplace(cfg.policy_p, cfg.unlabeled_batch, mix_seed(seed, 3));
    }

    EpisodicMemory memory(cfg.memory_budget);
    AccumulatorState acc_state;
    acc_state.decay = cfg.dcl_gamma;
    std::mt19937_64 shuffle_rng(mix_seed(seed, 5));
    std::mt19937_64 noise_rng(mix_seed(seed, 6));

    rec.R = ResultMatrix(T);
    rec.R.b_bar = evaluate_all_tasks(model, continuum, mask);

    double tau_prev = -1.0;
    std::size_t global_step = 0;
    const double warmup = static_cast<double>(cfg.learner.warmup);

    for (std::size_t t = 0; t < T; ++t) {
        const Task& task = continuum.tasks[t];
        const auto batches =
            make_batches(task.train.size(), static_cast<std::size_t>(cfg.stream.batch_size),
                         shuffle_rng);
        double task_loss = 0.0;
        for (const auto& idx : batches) {
            std::vector<LabeledSample> batch;
            batch.reserve(idx.size());
            for (std::size_t i : idx) batch.push_back(task.train[i]);

            LabeledStepRecord lrec = observe_labeled(cfg.strategy, model, batch, memory,
                                                     acc_state, cfg.eta, cfg.gem);
            ++rec.labeled_steps;
            ++global_step;
            task_loss += lrec.loss;
            tau_prev = lrec.tau;

            double fit = 0.0;
            double cos = 0.0;
            bool have_cos = false;
            if (learner) {
                const auto lrs = learner->observe_batch(lrec.sample_logits, lrec.sample_labels);
                for (const auto& r : lrs) fit += r.fit_loss;
                fit /= static_cast<double>(lrs.size());
                rec.fit_losses.push_back(fit);
                // Diagnostic: alignment of the predicted direction with the
                // vanilla gradient on the first sample of the batch.
                const Matrix g = learner->predict_raw(lrec.sample_logits.front());
                const Matrix v = grad_cross_entropy(lrec.sample_logits.front(),
                                                    lrec.sample_labels.front());
                if (l2_norm(g) > kNormEps && l2_norm(v) > 0.0) {
                    cos = cosine_similarity(g, v);
                    have_cos = true;
                }
            }
            if (teacher) teacher->train_step(batch, task.classes);

            if (cfg.keep_trace) {
                json e = {{"step", global_step},
                          {"task", t},
                          {"kind", "labeled"},
                          {"loss", lrec.loss},
                          {"tau", lrec.tau}};
                if (learner) {
                    e["fit_loss"] = fit;
                    if (have_cos) e["cos_sim"] = cos;
                }
                if (cfg.strategy == Strategy::Gem) e["gem_projected"] = lrec.gem_projected;
                rec.trace.push_back(std::move(e));
            }

            if (!policy) continue;
            auto drawn = policy->draw(pool);
            ++rec.policy_draws;
            if (drawn.empty()) continue;
            ++rec.unlabeled_draws;
            if (static_cast<double>(rec.labeled_steps) < warmup) continue;

            ParamGrads total = zero_grads(model);
            std::size_t used = 0;
            for (const UnlabeledSample& u : drawn) {
                ForwardTape tape;
                const Matrix z = mlp_forward(model, u.x, &tape);
                Matrix upstream;
                switch (cfg.method) {
                    case Method::GradLearner: {
                        auto gbar = learner->predict_for_unlabeled(z);
                        if (!gbar) continue;
                        upstream = std::move(*gbar);
                        break;
                    }
                    case Method::NoiseUniform:
                        upstream = noise_gradient(NoiseKind::Uniform, K, noise_rng);
                        break;
                    case Method::NoiseNormal:
                        upstream = noise_gradient(NoiseKind::Normal, K, noise_rng);
                        break;
                    case Method::NoiseUniformNormalized:
                        upstream = GradientLearner::normalize(
                            noise_gradient(NoiseKind::Uniform, K, noise_rng), tau_prev,
                            cfg.learner.alpha);
                        break;
                    case Method::NoiseNormalNormalized:
                        upstream = GradientLearner::normalize(
                            noise_gradient(NoiseKind::Normal, K, noise_rng), tau_prev,
                            cfg.learner.alpha);
                        break;
                    case Method::OnePL:
                        upstream = grad_cross_entropy(
                            z, static_cast<std::size_t>(
                                   teacher->predict_label(u.x, static_cast<int>(t))));
                        break;
                    case Method::ProbPL:
                        upstream = soft_upstream(
                            z, task.classes, teacher->predict_distribution(u.x, static_cast<int>(t)));
                        break;
                    case Method::None:
                        continue;
                }
                accumulate(total, mlp_backward(model, tape, upstream));
                ++used;
            }
            if (used == 0) continue;
            scale_grads(total, 1.0 / static_cast<double>(used));
            // Pseudo updates obey the same continual constraint as labeled
            // ones: the strategy acts at the optimizer level, whatever the
            // upstream gradient came from.
            if (cfg.strategy == Strategy::Gem) {
                const auto rows = memory_gradients(model, memory, static_cast<int>(t));
                if (!rows.empty()) {
                    const GemResult pr = gem_project(flatten_grads(total), rows, cfg.gem);
                    if (pr.projected) total = unflatten_grads(pr.grad, model);
                }
            } else if (cfg.strategy == Strategy::Dcl) {
                total = unflatten_grads(dcl_align(flatten_grads(total), acc_state), model);
            }
            sgd_step(model, total, cfg.eta);
            ++rec.unlabeled_applied;
            ++global_step;
            if (cfg.keep_trace) {
                rec.trace.push_back({{"step", global_step},
                                     {"task", t},
                                     {"kind", "unlabeled"},
                                     {"batch", used},
                                     {"tau_prev", tau_prev}});
            }
        }
        rec.task_train_loss.push_back(task_loss / static_cast<double>(batches.size()));

        const auto row = evaluate_all_tasks(model, continuum, mask);
        for (std::size_t j = 0; j < T; ++j) rec.R.at(t, j) = row[j];
    }

    rec.acc = acc(rec.R);
    rec.bwt = bwt(rec.R);
    rec.fwt = fwt(rec.R);
    rec.wall_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::vector<RunRecord> run_seeds(const ExperimentConfig& cfg) {
    const std::size_t n = cfg.seeds.size();
    std::vector<RunRecord> records(n);
    const std::size_t workers = std::min(env_threads(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) records[i] = run_experiment(cfg, cfg.seeds[i]);
        return records;
    }
    std::vector<std::thread> threads;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                records[i] = run_experiment(cfg, cfg.seeds[i]);
        });
    }
    for (auto& th : threads) th.join();
    return records;
}

namespace {

std::vector<std::size_t> parse_arch(const std::string& s) {
    std::vector<std::size_t> dims;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, 'x')) dims.push_back(std::stoul(part));
    if (dims.empty()) throw std::invalid_argument("sweep: bad arch value '" + s + "'");
    return dims;
}

ExperimentConfig apply_axis(const ExperimentConfig& base, const std::string& axis,
                            const std::string& value) {
    ExperimentConfig cfg = base;
    if (axis == "p")
        cfg.policy_p = std::stod(value);
    else if (axis == "alpha")
        cfg.learner.alpha = std::stod(value);
    else if (axis == "lambda")
        cfg.learner.lambda = std::stod(value);
    else if (axis == "arch")
        cfg.learner.hidden = parse_arch(value);
    else if (axis == "batch")
        cfg.unlabeled_batch = std::stoul(value);
    else
        throw std::invalid_argument("sweep: unknown axis '" + axis + "'");
    return cfg;
}

}  // namespace

SweepReport run_sweep(const ExperimentConfig& base, const std::string& axis,
                      const std::vector<std::string>& values) {
    if (values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
    SweepReport report;
    report.axis = axis;
    for (const std::string& v : values) {
        SweepPoint point;
        point.label = v;
        try {
            const ExperimentConfig cfg = apply_axis(base, axis, v);
            point.runs = run_seeds(cfg);
            std::vector<double> accs, bwts, fwts;
            for (const auto& r : point.runs) {
                accs.push_back(r.acc);
                bwts.push_back(r.bwt);
                fwts.push_back(r.fwt);
            }
            point.mean_acc = mean_of(accs);
            point.std_acc = std_of(accs);
            point.mean_bwt = mean_of(bwts);
            point.mean_fwt = mean_of(fwts);
        } catch (const std::exception& e) {
            point.failed = true;
            point.error = e.what();
        }
        report.points.push_back(std::move(point));
    }
    return report;
}

std::string metrics_csv(const std::vector<RunRecord>& records) {
    std::string out = "seed,acc,bwt,fwt\n";
    for (const auto& r : records) {
        out += std::to_string(r.seed) + "," + format_double(r.acc) + "," + format_double(r.bwt) +
               "," + format_double(r.fwt) + "\n";
    }
    return out;
}

void emit_report(const ExperimentConfig& cfg, const std::vector<RunRecord>& records,
                 const std::string& out_dir) {
    if (records.empty()) throw std::invalid_argument("emit_report: no records");
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    {  // fail before compute-heavy serialization if the directory is unusable
        std::ofstream probe(out_dir + "/.probe", std::ios::binary);
        if (!probe) throw std::runtime_error("emit_report: cannot write to " + out_dir);
    }
    fs::remove(out_dir + "/.probe", ec);

    const json cfg_json = config_to_json(cfg);
    std::ostringstream hash_hex;
    hash_hex << std::hex << std::hash<std::string>{}(cfg_json.dump());

    json summary;
    summary["config"] = cfg_json;
    summary["config_hash"] = hash_hex.str();
    std::vector<double> accs, bwts, fwts;
    for (const auto& r : records) {
        json jr = {{"seed", r.seed},
                   {"acc", r.acc},
                   {"bwt", r.bwt},
                   {"fwt", r.fwt},
                   {"labeled_steps", r.labeled_steps},
                   {"policy_draws", r.policy_draws},
                   {"unlabeled_draws", r.unlabeled_draws},
                   {"unlabeled_applied", r.unlabeled_applied},
                   {"wall_sec", r.wall_sec}};
        summary["runs"].push_back(jr);
        accs.push_back(r.acc);
        bwts.push_back(r.bwt);
        fwts.push_back(r.fwt);
    }
    summary["aggregate"] = {{"mean_acc", mean_of(accs)}, {"std_acc", std_of(accs)},
                            {"mean_bwt", mean_of(bwts)}, {"std_bwt", std_of(bwts)},
                            {"mean_fwt", mean_of(fwts)}, {"std_fwt", std_of(fwts)}};
    std::ofstream(out_dir + "/summary.json", std::ios::binary) << summary.dump(2) << "\n";
    std::ofstream(out_dir + "/metrics.csv", std::ios::binary) << metrics_csv(records);

    for (const auto& r : records) {
        export_confusion(r.R, out_dir + "/R_matrix_" + std::to_string(r.seed) + ".csv");
        if (!r.trace.empty()) {
            std::ofstream tf(out_dir + "/trace_" + std::to_string(r.seed) + ".jsonl",
                             std::ios::binary);
            for (const auto& e : r.trace) tf << e.dump() << "\n";
        }
    }

    const RunRecord& first = records.front();
    std::vector<Series> series;
    Series loss{"train loss", {}, {}};
    Series accuracy{"mean accuracy", {}, {}};
    for (std::size_t t = 0; t < first.R.T; ++t) {
        loss.xs.push_back(static_cast<double>(t));
        loss.ys.push_back(first.task_train_loss[t]);
        double a = 0.0;
        for (std::size_t j = 0; j < first.R.T; ++j) a += first.R.at(t, j);
        accuracy.xs.push_back(static_cast<double>(t));
        accuracy.ys.push_back(a / static_cast<double>(first.R.T));
    }
    series.push_back(std::move(loss));
    series.push_back(std::move(accuracy));
    if (!first.fit_losses.empty()) {
        // Fitness loss averaged per task so it shares the task axis.
        Series fit{"fitness loss", {}, {}};
        const std::size_t per_task = first.fit_losses.size() / first.R.T;
        for (std::size_t t = 0; t < first.R.T && per_task > 0; ++t) {
            double s = 0.0;
            for (std::size_t i = 0; i < per_task; ++i) s += first.fit_losses[t * per_task + i];
            fit.xs.push_back(static_cast<double>(t));
            fit.ys.push_back(s / static_cast<double>(per_task));
        }
        series.push_back(std::move(fit));
    }
    write_line_chart(out_dir + "/curves.svg", "training curves (seed " +
                         std::to_string(first.seed) + ")",
                     "task", "value", series);
}

void emit_sweep_report(const ExperimentConfig& base, const SweepReport& report,
                       const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    json j;
    j["axis"] = report.axis;
    j["config"] = config_to_json(base);
    std::string csv = "value,mean_acc,std_acc,mean_bwt,mean_fwt,runs,failed\n";
    Series curve{"mean ACC", {}, {}};
    double x = 0.0;
    for (const auto& p : report.points) {
        json pj = {{"value", p.label},       {"failed", p.failed},
                   {"mean_acc", p.mean_acc}, {"std_acc", p.std_acc},
                   {"mean_bwt", p.mean_bwt}, {"mean_fwt", p.mean_fwt},
                   {"runs", p.runs.size()}};
        if (p.failed) pj["error"] = p.error;
        j["points"].push_back(pj);
        csv += p.label + "," + format_double(p.mean_acc) + "," + format_double(p.std_acc) + "," +
               format_double(p.mean_bwt) + "," + format_double(p.mean_fwt) + "," +
               std::to_string(p.runs.size()) + "," + (p.failed ? "1" : "0") + "\n";
        if (!p.failed) {
            double xv = x;
            try {
                xv = std::stod(p.label);
            } catch (...) {
            }
            curve.xs.push_back(xv);
            curve.ys.push_back(p.mean_acc);
        }
        x += 1.0;
    }
    std::ofstream(out_dir + "/sweep.json", std::ios::binary) << j.dump(2) << "\n";
    std::ofstream(out_dir + "/sweep.csv", std::ios::binary) << csv;
    write_line_chart(out_dir + "/sweep.svg", "sweep over " + report.axis, report.axis,
                     "mean ACC", {curve});
}

nlohmann::json analyze_trace(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("analyze: cannot open " + path);
    std::vector<double> fit, cos;
    std::size_t labeled = 0, unlabeled = 0;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        const json e = json::parse(line);
        const std::string kind = e.value("kind", "");
        if (kind == "labeled") {
            ++labeled;
            if (e.contains("fit_loss")) fit.push_back(e["fit_loss"]);
            if (e.contains("cos_sim")) cos.push_back(e["cos_sim"]);
        } else if (kind == "unlabeled") {
            ++unlabeled;
        }
    }
    json out;
    out["labeled_steps"] = labeled;
    out["unlabeled_steps"] = unlabeled;
    if (!fit.empty()) {
        const std::size_t w = std::max<std::size_t>(1, fit.size() / 5);
        out["fit_loss"] = {
            {"count", fit.size()},
            {"mean", mean_of(fit)},
            {"first_window_mean", mean_of({fit.begin(), fit.begin() + w})},
            {"last_window_mean", mean_of({fit.end() - w, fit.end()})}};
    }
    if (!cos.empty())
        out["cosine_similarity"] = {{"count", cos.size()}, {"mean", mean_of(cos)}};
    return out;
}

}  // namespace sscl
