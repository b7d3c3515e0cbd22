#include "mctl/experiment.hpp"

#include "mctl/error.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace mctl {

using nlohmann::json;

std::optional<ClassifierMode> parse_mode(const std::string& text) {
    if (text == "source-only")
        return ClassifierMode::SourceOnly;
    if (text == "augmented")
        return ClassifierMode::Augmented;
    return std::nullopt;
}

std::string to_string(ClassifierMode mode) {
    return mode == ClassifierMode::SourceOnly ? "source-only" : "augmented";
}

void ExperimentConfig::validate() const {
    solver.validate();
    if (seeds < 1)
        throw ConfigError("--seeds must be >= 1");
    if (!(classifier_ridge >= 0.0))
        throw ConfigError("classifier ridge must be >= 0");
    if (data.synthetic) {
        data.synthetic->validate();
        if (!(data.target_train_fraction > 0.0 && data.target_train_fraction < 1.0))
            throw ConfigError("target_train_fraction must lie in (0, 1)");
    } else if (data.source.empty() || data.target_train.empty() || data.target_test.empty()) {
        throw ConfigError("need --synthetic KIND or all of --source, --target-train, --target-test");
    }
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < seeds; ++i)
        out.push_back(seed + static_cast<std::uint64_t>(i));
    return out;
}

namespace {

template <class T>
void read(const json& j, const char* key, T& into) {
    if (j.contains(key) && !j.at(key).is_null())
        into = j.at(key).get<T>();
}

bool csv_has_column(const std::filesystem::path& path, const std::string& column) {
    std::ifstream in(path);
    std::string header;
    if (!in || !std::getline(in, header))
        return false;
    std::stringstream cells(header);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
            cell.pop_back();
        while (!cell.empty() && cell.front() == ' ')
            cell.erase(0, 1);
        if (cell == column)
            return true;
    }
    return false;
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace

json to_json(const ExperimentConfig& cfg) {
    const auto& s = cfg.solver;
    json j;
    if (cfg.data.synthetic) {
        const auto& syn = *cfg.data.synthetic;
        j["synthetic"] = to_string(syn.kind);
        j["rotation"] = syn.rotation_deg;
        j["noise"] = syn.noise_sigma;
        j["n_per_class"] = syn.n_per_class;
        j["classes"] = syn.classes;
        j["target_train_fraction"] = cfg.data.target_train_fraction;
    } else {
        j["source"] = cfg.data.source.string();
        j["target_train"] = cfg.data.target_train.string();
        j["target_test"] = cfg.data.target_test.string();
    }
    j["label_col"] = cfg.data.label_col;
    j["mode"] = to_string(cfg.mode);
    j["classifier_ridge"] = cfg.classifier_ridge;
    j["standardize"] = cfg.standardize;
    j["kernel"] = to_string(s.kernel.kind);
    j["sigma"] = s.kernel.sigma;
    j["tau"] = s.tau;
    j["lambda1"] = s.lambda1;
    j["k"] = s.k_neighbors;
    j["dim"] = s.subspace_dim ? json(*s.subspace_dim) : json(nullptr);
    j["alpha"] = s.step_alpha;
    j["inner_z_steps"] = s.inner_z_steps;
    j["mu0"] = s.mu0;
    j["mu_max"] = s.mu_max;
    j["mu_growth"] = s.mu_growth;
    j["iters"] = s.max_outer_iters;
    j["tol_rel"] = s.tol_rel;
    j["variant"] = to_string(s.variant);
    j["drop"] = s.ablation.any() ? s.ablation.label() : "none";
    j["eig_ridge"] = optional_json(s.eig_ridge);
    j["recompute_affinity"] = s.recompute_affinity;
    j["seed"] = cfg.seed;
    j["seeds"] = cfg.seeds;
    j["out"] = cfg.out_dir.string();
    return j;
}

ExperimentConfig from_json(const json& input, ExperimentConfig cfg) {
    const json& j = input.contains("config") && input.at("config").is_object() ? input.at("config") : input;
    if (!j.is_object())
        throw ConfigError("config file must hold a JSON object");
    try {
        if (j.contains("synthetic") && !j.at("synthetic").is_null()) {
            const auto kind = parse_synthetic_kind(j.at("synthetic").get<std::string>());
            if (!kind)
                throw ConfigError("unknown synthetic task '" + j.at("synthetic").get<std::string>() + "'");
            SyntheticSpec spec = cfg.data.synthetic.value_or(SyntheticSpec{});
            spec.kind = *kind;
            cfg.data.synthetic = spec;
        }
        if (cfg.data.synthetic) {
            auto& syn = *cfg.data.synthetic;
            read(j, "rotation", syn.rotation_deg);
            read(j, "noise", syn.noise_sigma);
            read(j, "n_per_class", syn.n_per_class);
            read(j, "classes", syn.classes);
            read(j, "target_train_fraction", cfg.data.target_train_fraction);
        }
        if (j.contains("source") && !j.at("source").is_null()) {
            cfg.data.source = j.at("source").get<std::string>();
            cfg.data.synthetic.reset();
        }
        if (j.contains("target_train") && !j.at("target_train").is_null())
            cfg.data.target_train = j.at("target_train").get<std::string>();
        if (j.contains("target_test") && !j.at("target_test").is_null())
            cfg.data.target_test = j.at("target_test").get<std::string>();
        read(j, "label_col", cfg.data.label_col);
        if (j.contains("mode")) {
            const auto mode = parse_mode(j.at("mode").get<std::string>());
            if (!mode)
                throw ConfigError("unknown mode '" + j.at("mode").get<std::string>() + "'");
            cfg.mode = *mode;
        }
        read(j, "classifier_ridge", cfg.classifier_ridge);
        read(j, "standardize", cfg.standardize);

        auto& s = cfg.solver;
        if (j.contains("kernel")) {
            const auto kind = parse_kernel_kind(j.at("kernel").get<std::string>());
            if (!kind)
                throw ConfigError("unknown kernel '" + j.at("kernel").get<std::string>() + "'");
            s.kernel.kind = *kind;
        }
        read(j, "sigma", s.kernel.sigma);
        read(j, "tau", s.tau);
        read(j, "lambda1", s.lambda1);
        read(j, "k", s.k_neighbors);
        if (j.contains("dim"))
            s.subspace_dim = j.at("dim").is_null() ? std::nullopt : std::optional<int>(j.at("dim").get<int>());
        read(j, "alpha", s.step_alpha);
        read(j, "inner_z_steps", s.inner_z_steps);
        read(j, "mu0", s.mu0);
        read(j, "mu_max", s.mu_max);
        read(j, "mu_growth", s.mu_growth);
        read(j, "iters", s.max_outer_iters);
        read(j, "tol_rel", s.tol_rel);
        if (j.contains("variant")) {
            const auto variant = parse_variant(j.at("variant").get<std::string>());
            if (!variant)
                throw ConfigError("unknown variant '" + j.at("variant").get<std::string>() + "'");
            s.variant = *variant;
        }
        if (j.contains("drop")) {
            const auto drop = parse_ablation(j.at("drop").get<std::string>());
            if (!drop)
                throw ConfigError("unknown ablation '" + j.at("drop").get<std::string>() + "'");
            s.ablation = *drop;
        }
        if (j.contains("eig_ridge"))
            s.eig_ridge = j.at("eig_ridge").is_null() ? std::nullopt
                                                      : std::optional<double>(j.at("eig_ridge").get<double>());
        read(j, "recompute_affinity", s.recompute_affinity);
        read(j, "seed", cfg.seed);
        read(j, "seeds", cfg.seeds);
        if (j.contains("out"))
            cfg.out_dir = j.at("out").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

Task load_task(const ExperimentConfig& cfg, std::uint64_t seed) {
    Task task;
    if (cfg.data.synthetic) {
        SyntheticSpec spec = *cfg.data.synthetic;
        spec.seed = seed;
        DomainPair pair = generate(spec);
        // The split stream is decorrelated from the generator stream.
        Split parts = split(pair.target, cfg.data.target_train_fraction, seed ^ 0x9E3779B97F4A7C15ULL);
        task.name = to_string(spec.kind);
        task.source = std::move(pair.source);
        task.target_train = std::move(parts.first);
        task.target_test = std::move(parts.second);
    } else {
        task.source = load_csv(cfg.data.source, cfg.data.label_col);
        // Target-train labels are optional unless the classifier needs them.
        const bool train_labels = cfg.mode == ClassifierMode::Augmented ||
                                  csv_has_column(cfg.data.target_train, cfg.data.label_col);
        task.target_train = load_csv(cfg.data.target_train,
                                     train_labels ? std::optional<std::string>(cfg.data.label_col) : std::nullopt);
        task.target_test = load_csv(cfg.data.target_test, cfg.data.label_col);
        task.name = task.source.name + "->" + task.target_test.name;
    }
    task.source.require_labels("source domain");
    task.target_test.require_labels("target test set");
    if (task.source.dim() != task.target_train.dim() || task.source.dim() != task.target_test.dim())
        throw InputError("source, target-train and target-test must share the feature dimension");
    task.source.validate();
    task.target_train.validate();
    task.target_test.validate();

    if (cfg.standardize) {
        const Dataset fit_on = concat(task.source, task.target_train, "fit");
        auto z = standardize(fit_on, {task.source, task.target_train, task.target_test});
        task.source = std::move(z[0]);
        task.target_train = std::move(z[1]);
        task.target_test = std::move(z[2]);
    }
    return task;
}

std::string variant_label(const MctlConfig& solver) {
    std::string label = to_string(solver.variant);
    if (solver.ablation.any())
        label += "/" + solver.ablation.label();
    return label;
}

RunResult run_adaptation(const Task& task, const ExperimentConfig& cfg, std::uint64_t seed,
                         const MctlConfig& solver, const IterationSink& sink) {
    const auto start = std::chrono::steady_clock::now();
    const AdaptationModel model = fit(task.source, task.target_train, solver, sink);

    Matrix train = project(model, task.source, Projection::Source);
    std::vector<int> labels = task.source.require_labels("source domain");
    if (cfg.mode == ClassifierMode::Augmented) {
        const auto& target_labels = task.target_train.require_labels("augmented mode (target-train labels)");
        const Matrix generated = project(model, task.target_train, Projection::GeneratedTarget);
        Matrix both(train.rows(), train.cols() + generated.cols());
        both << train, generated;
        train = std::move(both);
        labels.insert(labels.end(), target_labels.begin(), target_labels.end());
    }
    const ClassifierModel clf = train_classifier(train, labels, cfg.classifier_ridge);
    const Matrix test = project(model, task.target_test, Projection::NewTarget);

    RunResult out;
    out.task = task.name;
    out.variant = variant_label(solver);
    out.seed = seed;
    out.accuracy = evaluate(clf, test, *task.target_test.labels);
    out.iterations = model.iterations;
    out.history = model.history;
    out.warnings = model.warnings;
    out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

double run_baseline(const Task& task, const ExperimentConfig& cfg) {
    Matrix train = task.source.features;
    std::vector<int> labels = task.source.require_labels("source domain");
    if (cfg.mode == ClassifierMode::Augmented) {
        const auto& target_labels = task.target_train.require_labels("augmented mode (target-train labels)");
        Matrix both(train.rows(), train.cols() + task.target_train.size());
        both << train, task.target_train.features;
        train = std::move(both);
        labels.insert(labels.end(), target_labels.begin(), target_labels.end());
    }
    const ClassifierModel clf = train_classifier(train, labels, cfg.classifier_ridge);
    return evaluate(clf, task.target_test.features, *task.target_test.labels);
}

int thread_count() {
    if (const char* env = std::getenv("MCTL_THREADS")) {
        char* end = nullptr;
        const long value = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && value > 0)
            return static_cast<int>(std::min(value, 1024L));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

std::vector<MctlConfig> ablation_variants(const MctlConfig& base) {
    MctlConfig full = base;
    full.ablation = {};
    MctlConfig no_lgdm = full;
    no_lgdm.ablation.drop_lgdm = true;
    MctlConfig no_ggdm = full;
    no_ggdm.ablation.drop_ggdm = true;
    MctlConfig no_lrc = full;
    no_lrc.ablation.drop_lrc = true;
    return {full, no_lgdm, no_ggdm, no_lrc};
}

} // namespace mctl
