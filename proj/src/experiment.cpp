#include "binode/experiment.hpp"

#include <chrono>

#include <json.hpp>

#include "binode/rng.hpp"

namespace binode {

using nlohmann::json;

namespace {

json parse_checked(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
}

void check_version(const json& j) {
    int v = 0;
    try {
        v = j.at("version").get<int>();
    } catch (const json::exception&) {
        throw ConfigError("config: missing required field 'version'");
    }
    if (v != kConfigVersion)
        throw ConfigError("config: unsupported version " + std::to_string(v));
}

template <class T>
T require(const json& j, const std::string& field) {
    if (!j.contains(field))
        throw ConfigError("config: missing required field '" + field + "'");
    try {
        return j.at(field).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad field '" + field + "': " + e.what());
    }
}

IntegratorConfig integrator_from_json(const json& j) {
    IntegratorConfig cfg;
    cfg.dt = j.value("dt", cfg.dt);
    const std::string method = j.value("method", std::string("rk4"));
    if (method == "rk4")
        cfg.method = IntegratorConfig::Method::rk4;
    else if (method == "euler")
        cfg.method = IntegratorConfig::Method::euler;
    else
        throw ConfigError("config: unknown integrator method '" + method + "'");
    cfg.validate();
    return cfg;
}

TrainConfig train_from_json(const json& j, double dt) {
    TrainConfig cfg;
    cfg.dt = dt;
    cfg.batch_size = require<int>(j, "batch_size");
    cfg.horizon = require<int>(j, "horizon");
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.max_epochs = require<int>(j, "epochs");
    cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("batch_schedule"))
        cfg.batch_schedule = j.at("batch_schedule").get<std::vector<std::pair<int, int>>>();
    cfg.validate();
    return cfg;
}

RateLaw law_from_json(const json& j) {
    const RateLawId id = rate_law_id_from_string(require<std::string>(j, "law"));
    auto params = require<std::map<std::string, double>>(j, "params");
    const int arity = require<int>(j, "arity");
    return make_rate_law(id, std::move(params), arity);
}

DomainBox box_from_json(const json& j) {
    DomainBox box;
    box.lo = require<std::vector<double>>(j, "lo");
    box.hi = require<std::vector<double>>(j, "hi");
    box.validate();
    return box;
}

NnpSpec spec_from_json_cfg(const json& j, int input_dim) {
    NnpSpec s;
    s.input_mask.assign(input_dim, true);
    s.hidden_layers = require<int>(j, "hidden_layers");
    s.hidden_width = require<int>(j, "hidden_width");
    const std::string ha = j.value("hidden_activation", std::string("elu"));
    if (ha == "elu")
        s.hidden_activation = Activation::elu;
    else if (ha == "relu")
        s.hidden_activation = Activation::relu;
    else
        throw ConfigError("config: unknown hidden_activation '" + ha + "'");
    const std::string oa = j.value("output_activation", std::string("softplus"));
    if (oa == "softplus")
        s.output_activation = OutputActivation::softplus;
    else if (oa == "relu")
        s.output_activation = OutputActivation::relu;
    else if (oa == "identity")
        s.output_activation = OutputActivation::identity;
    else
        throw ConfigError("config: unknown output_activation '" + oa + "'");
    if (j.contains("monotone_constraint"))
        s.monotone_constraint = j.at("monotone_constraint").get<std::vector<bool>>();
    s.validate();
    return s;
}

}  // namespace

RateLaw rate_law_from_json_text(const std::string& json_text) {
    return law_from_json(parse_checked(json_text));
}

Dataset sample_law_dataset(const RateLaw& law, const DomainBox& box,
                           std::span<const double> fixed_tail, int count,
                           std::uint64_t seed) {
    if (fixed_tail.empty()) return sample_dataset(law, box, count, seed);
    box.validate();
    if (box.dim() + static_cast<int>(fixed_tail.size()) != law.arity)
        throw ConfigError("sample_law_dataset: box + fixed_inputs must match arity");
    if (count < 1) throw ConfigError("sample_law_dataset: count must be >= 1");
    Dataset d;
    Rng rng(seed);
    std::vector<double> full(law.arity);
    for (std::size_t i = 0; i < fixed_tail.size(); ++i)
        full[box.dim() + i] = fixed_tail[i];
    for (int i = 0; i < count; ++i) {
        std::vector<double> x(box.dim());
        for (int j = 0; j < box.dim(); ++j) {
            x[j] = rng.uniform(box.lo[j], box.hi[j]);
            full[j] = x[j];
        }
        d.targets.push_back(eval(law, full));
        d.inputs.push_back(std::move(x));
    }
    return d;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

TrainExperiment parse_train_experiment(const std::string& json_text) {
    const json j = parse_checked(json_text);
    check_version(j);
    TrainExperiment e;
    e.system = system_id_from_string(require<std::string>(j, "system"));
    e.model_seed = j.value("model_seed", std::uint64_t{0});
    e.integrator = j.contains("integrator") ? integrator_from_json(j.at("integrator"))
                                            : IntegratorConfig{};
    if (!j.contains("integrator")) e.integrator.dt = system_defaults(e.system).dt;
    e.train = train_from_json(
        j.contains("train") ? j.at("train")
                            : throw ConfigError("config: missing required field 'train'"),
        e.integrator.dt);
    e.out_dir = j.value("out_dir", std::string("out"));
    e.config_text = json_text;
    return e;
}

TrainArtifacts run_train_experiment(const TrainExperiment& cfg) {
    BinodeModel model;
    switch (cfg.system) {
        case SystemId::monod: model = build_monod_binode(cfg.model_seed); break;
        case SystemId::lv: model = build_lv_binode(cfg.model_seed); break;
        case SystemId::pk: model = build_pk_binode(cfg.model_seed); break;
        case SystemId::ultradian: model = build_ultradian_binode(cfg.model_seed); break;
    }
    const std::vector<Trajectory> data = generate_training_set(cfg.system);

    const auto start = std::chrono::steady_clock::now();
    TrainResult result = train(std::move(model), data, cfg.train);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::string tag = to_string(cfg.system);
    TrainArtifacts art;
    art.model_path = cfg.out_dir / (tag + "_model.json");
    art.loss_path = cfg.out_dir / (tag + "_loss.csv");
    art.report_path = cfg.out_dir / (tag + "_report.json");

    save_model(result.model, art.model_path);
    write_loss_csv(result.loss_history, art.loss_path);

    json report;
    report["final_loss"] = result.best_loss;
    report["best_epoch"] = result.best_epoch;
    report["epochs_run"] = result.loss_history.size();
    report["rejected_steps"] = result.rejected_steps;
    report["diverged"] = result.diverged;
    if (result.diverged) report["diverged_epoch"] = result.diverged_epoch;
    report["wall_time_s"] = wall;
    report["config"] = parse_checked(cfg.config_text);
    report["input_hash"] = git_blob_sha1(cfg.config_text);
    atomic_write(art.report_path, report.dump(2) + "\n");

    art.result = std::move(result);
    return art;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

SweepExperiment parse_sweep_experiment(const std::string& json_text) {
    const json j = parse_checked(json_text);
    check_version(j);
    SweepExperiment e;
    if (!j.contains("target")) throw ConfigError("config: missing required field 'target'");
    e.spec.target = law_from_json(j.at("target"));
    if (!j.contains("domain")) throw ConfigError("config: missing required field 'domain'");
    e.spec.domain = box_from_json(j.at("domain"));
    e.spec.samples = j.value("samples", e.spec.samples);
    e.spec.data_seed = j.value("data_seed", std::uint64_t{0});
    if (j.contains("grid")) {
        e.spec.max_layers = j.at("grid").value("max_layers", 7);
        e.spec.max_width = j.at("grid").value("max_width", 7);
    }
    e.spec.restarts = j.value("restarts", e.spec.restarts);
    e.spec.iterations = j.value("iterations", e.spec.iterations);
    e.spec.learning_rate = j.value("learning_rate", e.spec.learning_rate);
    const std::string oa = j.value("output_activation", std::string("softplus"));
    if (oa == "softplus")
        e.spec.output_activation = OutputActivation::softplus;
    else if (oa == "relu")
        e.spec.output_activation = OutputActivation::relu;
    else if (oa == "identity")
        e.spec.output_activation = OutputActivation::identity;
    else
        throw ConfigError("config: unknown output_activation '" + oa + "'");
    e.spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("fixed_inputs"))
        e.fixed_inputs = j.at("fixed_inputs").get<std::vector<double>>();
    e.out = j.value("out", std::string("sweep.csv"));
    e.config_text = json_text;
    return e;
}

std::vector<SweepCell> run_sweep_experiment(const SweepExperiment& cfg, int jobs) {
    const Dataset data = sample_law_dataset(cfg.spec.target, cfg.spec.domain,
                                            cfg.fixed_inputs, cfg.spec.samples,
                                            cfg.spec.data_seed);
    return run_sweep_with_data(cfg.spec, data, jobs);
}

// ---------------------------------------------------------------------------
// fit-surface
// ---------------------------------------------------------------------------

FitSurfaceExperiment parse_fit_surface_experiment(const std::string& json_text) {
    const json j = parse_checked(json_text);
    check_version(j);
    FitSurfaceExperiment e;
    if (!j.contains("target")) throw ConfigError("config: missing required field 'target'");
    e.law = law_from_json(j.at("target"));
    if (!j.contains("domain")) throw ConfigError("config: missing required field 'domain'");
    e.domain = box_from_json(j.at("domain"));
    if (j.contains("fixed_inputs"))
        e.fixed_inputs = j.at("fixed_inputs").get<std::vector<double>>();
    e.samples = j.value("samples", e.samples);
    e.data_seed = j.value("data_seed", std::uint64_t{0});
    if (!j.contains("spec")) throw ConfigError("config: missing required field 'spec'");
    e.spec = spec_from_json_cfg(j.at("spec"), e.domain.dim());
    e.train.dt = 1.0;  // unused by surface fits
    e.train.max_epochs = j.value("iterations", 2000);
    e.train.learning_rate = j.value("learning_rate", 1e-2);
    e.seed = j.value("seed", std::uint64_t{0});
    e.out_dir = j.value("out_dir", std::string("out"));
    e.config_text = json_text;
    return e;
}

FitSurfaceArtifacts run_fit_surface_experiment(const FitSurfaceExperiment& cfg) {
    const Dataset data = sample_law_dataset(cfg.law, cfg.domain, cfg.fixed_inputs,
                                            cfg.samples, cfg.data_seed);
    const Nnp start = init_nnp(cfg.spec, cfg.seed);
    const auto t0 = std::chrono::steady_clock::now();
    FitResult fit = fit_surface(start, data, cfg.train);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    FitSurfaceArtifacts art;
    const std::string tag = to_string(cfg.law.id);
    art.model_path = cfg.out_dir / (tag + "_nnp.json");
    art.loss_path = cfg.out_dir / (tag + "_fit_loss.csv");
    art.report_path = cfg.out_dir / (tag + "_fit_report.json");
    save_nnp(fit.model, art.model_path);
    write_loss_csv(fit.history, art.loss_path);

    json report;
    report["final_loss"] = fit.best_loss;
    report["best_iteration"] = fit.best_iteration;
    report["iterations"] = fit.history.size();
    report["wall_time_s"] = wall;
    report["config"] = parse_checked(cfg.config_text);
    report["input_hash"] = git_blob_sha1(cfg.config_text);
    atomic_write(art.report_path, report.dump(2) + "\n");
    art.result = std::move(fit);
    return art;
}

}  // namespace binode
