#include "prpo/cli_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prpo/error.hpp"
#include "prpo/eval_metrics.hpp"
#include "prpo/response_format.hpp"
#include "prpo/reward_aggregator.hpp"
#include "prpo/reward_oracle.hpp"
#include "prpo/toy_policy.hpp"

namespace prpo {

using Json = nlohmann::ordered_json;

namespace {

// Visits every configuration key with a reference to its field.
template <class Config, class Visitor>
void visit_config(Config& c, Visitor&& v)
{
    v("alpha", c.alpha);
    v("beta1", c.beta1);
    v("beta2", c.beta2);
    v("gamma", c.gamma);
    v("k_stage1", c.k_stage1);
    v("k_stage2", c.k_stage2);
    v("batch_size", c.batch_size);
    v("prompt_count", c.prompt_count);
    v("delta_min", c.delta_min);
    v("lambda_std", c.lambda_std);
    v("clip_eps", c.clip_eps);
    v("kl_beta", c.kl_beta);
    v("learning_rate", c.learning_rate);
    v("weight_decay", c.weight_decay);
    v("adv_eps", c.adv_eps);
    v("pair_eps", c.pair_eps);
    v("seed", c.seed);
    v("stage1_steps", c.stage1_steps);
    v("stage2_steps", c.stage2_steps);
    v("inner_epochs", c.inner_epochs);
    v("dataset_size", c.dataset_size);
    v("feature_dim", c.feature_dim);
    v("dataset_noise", c.dataset_noise);
    v("init_log_sigma", c.init_log_sigma);
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <class T>
bool parse_number(std::string_view text, T& out)
{
    if (text.empty())
        return false;
    if constexpr (std::is_floating_point_v<T>) {
        // from_chars accepts "inf"/"nan"; config values must be finite.
        if (text.front() == '+')
            text.remove_prefix(1);
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
    } else {
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        return ec == std::errc() && ptr == text.data() + text.size();
    }
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    return out;
}

Json config_to_json(const RunConfig& cfg)
{
    Json j;
    visit_config(cfg, [&](const char* key, const auto& field) { j[key] = field; });
    return j;
}

RunConfig config_from_json(const Json& j)
{
    RunConfig cfg;
    visit_config(cfg, [&](const char* key, auto& field) {
        if (!j.contains(key))
            throw Error(ErrorCode::RecordError, std::string("config record lacks '") + key + "'");
        field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    });
    return cfg;
}

Stage parse_stage(const std::string& s)
{
    if (s == "explore")
        return Stage::Explore;
    if (s == "stabilize")
        return Stage::Stabilize;
    throw Error(ErrorCode::InvalidValue, "stage '" + s + "'");
}

TaskKind parse_task(const std::string& s)
{
    if (s == "iqa")
        return TaskKind::Iqa;
    if (s == "vqa")
        return TaskKind::Vqa;
    throw Error(ErrorCode::InvalidValue, "task '" + s + "'");
}

std::string line_label(std::size_t line)
{
    return "line " + std::to_string(line);
}

}  // namespace

RunConfig parse_config(std::string_view text)
{
    RunConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::ParseError, line_label(line_no));
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw Error(ErrorCode::ParseError, line_label(line_no));

        bool known = false;
        visit_config(cfg, [&](const char* name, auto& field) {
            if (key != name)
                return;
            known = true;
            if (!parse_number(value, field))
                throw Error(ErrorCode::InvalidValue, name);
        });
        if (!known)
            throw Error(ErrorCode::UnknownKey, std::string(key));
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    auto in = open_input(path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_config(const RunConfig& cfg)
{
    std::string out;
    visit_config(cfg, [&](const char* key, const auto& field) {
        out.append(key).append(" = ");
        if constexpr (std::is_floating_point_v<std::remove_cvref_t<decltype(field)>>)
            out.append(format_double(field));
        else
            out.append(std::to_string(field));
        out.push_back('\n');
    });
    return out;
}

std::vector<SampleGroup> ingest_responses(std::istream& in, TaskKind task_kind)
{
    struct Pending {
        double mos = 0.0;
        std::vector<Generation> generations;
    };
    std::vector<std::string> order;
    std::map<std::string, Pending> by_id;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        Json rec;
        try {
            rec = Json::parse(line);
        } catch (const Json::parse_error&) {
            throw Error(ErrorCode::RecordError, line_label(line_no) + ": not a JSON record");
        }
        std::string sample_id, text;
        double mos = 0.0;
        int prompt_id = 1;
        try {
            sample_id = rec.at("sample_id").get<std::string>();
            mos = rec.at("mos").get<double>();
            prompt_id = rec.at("prompt_id").get<int>();
            text = rec.at("response_text").get<std::string>();
            if (rec.contains("mos_min") || rec.contains("mos_max"))
                mos = normalize_mos(mos, rec.at("mos_min").get<double>(), rec.at("mos_max").get<double>());
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::RecordError, line_label(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::RecordError, line_label(line_no) + ": " + e.what());
        }

        auto [it, inserted] = by_id.try_emplace(sample_id);
        if (inserted) {
            order.push_back(sample_id);
            it->second.mos = mos;
        } else if (it->second.mos != mos) {
            throw Error(ErrorCode::RecordError, line_label(line_no) + ": conflicting MOS for sample '" + sample_id + "'");
        }

        const auto parsed = parse_response(text, task_kind);
        if (const auto* ok = std::get_if<ParsedResponse>(&parsed)) {
            it->second.generations.push_back(
                Generation::valid(ScoreVector::validate(ok->answer_scores, dims_for(task_kind)), 0.0, prompt_id, text));
        } else {
            it->second.generations.push_back(Generation::malformed(text, prompt_id));
        }
    }

    std::vector<SampleGroup> groups;
    groups.reserve(order.size());
    for (const auto& id : order) {
        auto& p = by_id.at(id);
        groups.push_back(make_sample_group(id, p.mos, {}, std::move(p.generations)));
    }
    return groups;
}

std::vector<SampleGroup> ingest_responses(const std::string& path, TaskKind task_kind)
{
    auto in = open_input(path);
    return ingest_responses(in, task_kind);
}

void write_run_report(std::ostream& out, const RunReport& report)
{
    Json cfg = config_to_json(report.config_echo);
    Json head;
    head["record"] = "config";
    head.update(cfg);
    out << head.dump() << '\n';

    for (const auto& s : report.per_step) {
        Json j;
        j["record"] = "step";
        j["step"] = s.step;
        j["stage"] = to_string(s.stage);
        j["k"] = s.k;
        j["objective"] = s.objective;
        j["mean_reward"] = s.mean_reward;
        j["reward_std"] = s.reward_std;
        j["mean_kl"] = s.mean_kl;
        j["clip_fraction"] = s.clip_fraction;
        j["mean_generation_std"] = s.mean_generation_std;
        j["mean_cot_answer_std"] = s.mean_cot_answer_std;
        out << j.dump() << '\n';
    }

    Json m;
    m["record"] = "final_metrics";
    m["srcc"] = report.final_metrics.srcc;
    m["plcc"] = report.final_metrics.plcc;
    m["n"] = report.final_metrics.n;
    Json hist = Json::array();
    for (const auto& bin : report.final_metrics.error_histogram)
        hist.push_back(Json::array({bin.center, bin.proportion}));
    m["error_histogram"] = hist;
    out << m.dump() << '\n';
}

RunReport read_run_report(std::istream& in)
{
    RunReport report;
    bool have_config = false, have_metrics = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        try {
            const Json j = Json::parse(line);
            const auto kind = j.at("record").get<std::string>();
            if (kind == "config") {
                report.config_echo = config_from_json(j);
                have_config = true;
            } else if (kind == "step") {
                StepRecord s;
                s.step = j.at("step").get<int>();
                s.stage = parse_stage(j.at("stage").get<std::string>());
                s.k = j.at("k").get<int>();
                s.objective = j.at("objective").get<double>();
                s.mean_reward = j.at("mean_reward").get<double>();
                s.reward_std = j.at("reward_std").get<double>();
                s.mean_kl = j.at("mean_kl").get<double>();
                s.clip_fraction = j.at("clip_fraction").get<double>();
                s.mean_generation_std = j.at("mean_generation_std").get<double>();
                s.mean_cot_answer_std = j.at("mean_cot_answer_std").get<double>();
                report.per_step.push_back(s);
            } else if (kind == "final_metrics") {
                auto& m = report.final_metrics;
                m.srcc = j.at("srcc").get<double>();
                m.plcc = j.at("plcc").get<double>();
                m.n = j.at("n").get<std::size_t>();
                for (const auto& bin : j.at("error_histogram"))
                    m.error_histogram.push_back({bin.at(0).get<double>(), bin.at(1).get<double>()});
                have_metrics = true;
            } else {
                throw Error(ErrorCode::RecordError, line_label(line_no) + ": unknown record '" + kind + "'");
            }
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::RecordError, line_label(line_no) + ": " + e.what());
        }
    }
    if (!have_config || !have_metrics)
        throw Error(ErrorCode::RecordError, "run report is missing its config or final_metrics record");
    return report;
}

void write_step_csv(std::ostream& out, const std::vector<StepRecord>& steps)
{
    out << "step,stage,k,objective,mean_reward,reward_std,mean_kl,clip_fraction,mean_generation_std,"
           "mean_cot_answer_std\n";
    for (const auto& s : steps) {
        out << s.step << ',' << to_string(s.stage) << ',' << s.k << ',' << format_double(s.objective) << ','
            << format_double(s.mean_reward) << ',' << format_double(s.reward_std) << ','
            << format_double(s.mean_kl) << ',' << format_double(s.clip_fraction) << ','
            << format_double(s.mean_generation_std) << ',' << format_double(s.mean_cot_answer_std) << '\n';
    }
}

namespace {

struct TrainArgs {
    std::string config, out, csv;
    std::optional<std::uint64_t> seed;
};

struct ScoreArgs {
    std::string responses, config, out, stage = "explore", task = "iqa";
};

struct EvalArgs {
    std::string pred, truth, out;
    double bin_width = 0.25;
};

struct OracleArgs {
    std::string instance;
    double tolerance = 1e-9;
};

int run_train(const TrainArgs& args)
{
    RunConfig cfg = args.config.empty() ? RunConfig{} : load_config(args.config);
    if (args.seed)
        cfg.seed = *args.seed;
    cfg.validate();
    const auto dataset = generate_dataset(cfg.dataset_size, cfg.feature_dim, cfg.dataset_noise, cfg.seed);
    const auto report = run_training(cfg, dataset);

    if (!args.out.empty()) {
        auto out = open_output(args.out);
        write_run_report(out, report);
    } else {
        write_run_report(std::cout, report);
    }
    if (!args.csv.empty()) {
        auto out = open_output(args.csv);
        write_step_csv(out, report.per_step);
    }

    auto& summary = args.out.empty() ? std::cerr : std::cout;
    summary << "train: " << report.per_step.size() << " steps (explore " << cfg.stage1_steps << ", stabilize "
            << cfg.stage2_steps << "), seed " << cfg.seed << '\n'
            << "  final SRCC " << report.final_metrics.srcc << ", PLCC " << report.final_metrics.plcc << " over "
            << report.final_metrics.n << " samples\n"
            << "  wall time " << report.wall_time_seconds << " s\n";
    return 0;
}

int run_score(const ScoreArgs& args)
{
    const RunConfig cfg = args.config.empty() ? RunConfig{} : load_config(args.config);
    const TaskKind task = parse_task(args.task);
    const Stage stage = parse_stage(args.stage);
    const auto groups = ingest_responses(args.responses, task);
    const auto rewards = score_batch(groups, cfg, stage, dims_for(task));

    std::ofstream file;
    if (!args.out.empty())
        file = open_output(args.out);
    std::ostream& records = args.out.empty() ? std::cout : file;

    std::size_t total = 0, malformed = 0;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        for (std::size_t i = 0; i < groups[j].generations.size(); ++i) {
            const auto& g = groups[j].generations[i];
            const auto& r = rewards[j][i];
            Json rec;
            rec["sample_id"] = groups[j].sample_id;
            rec["generation"] = i;
            rec["prompt_id"] = g.prompt_id;
            rec["format_valid"] = g.format_valid;
            rec["r_format"] = r.r_format;
            rec["r_loc"] = r.r_loc;
            rec["r_pair"] = r.r_pair;
            rec["r_tri"] = r.r_tri;
            rec["r_std_penalty"] = r.r_std_penalty;
            rec["r_total"] = r.r_total;
            rec["advantage"] = r.advantage;
            records << rec.dump() << '\n';
            ++total;
            malformed += g.format_valid ? 0 : 1;
        }
    }
    auto& summary = args.out.empty() ? std::cerr : std::cout;
    summary << "score: " << groups.size() << " samples, " << total << " generations (" << malformed
            << " malformed), task " << to_string(task) << ", stage " << to_string(stage) << '\n';
    return 0;
}

std::map<std::string, double> read_score_file(const std::string& path)
{
    auto in = open_input(path);
    std::map<std::string, double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        try {
            const Json j = Json::parse(line);
            const auto id = j.at("sample_id").get<std::string>();
            const double v = j.contains("score") ? j.at("score").get<double>() : j.at("mos").get<double>();
            if (!out.emplace(id, v).second)
                throw Error(ErrorCode::RecordError, path + " " + line_label(line_no) + ": duplicate sample '" + id + "'");
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::RecordError, path + " " + line_label(line_no) + ": " + e.what());
        }
    }
    return out;
}

int run_eval(const EvalArgs& args)
{
    const auto pred = read_score_file(args.pred);
    const auto truth = read_score_file(args.truth);
    if (pred.size() != truth.size())
        throw Error(ErrorCode::RecordError, "prediction and truth files cover different samples");
    std::vector<double> p, t;
    for (const auto& [id, v] : truth) {
        const auto it = pred.find(id);
        if (it == pred.end())
            throw Error(ErrorCode::RecordError, "no prediction for sample '" + id + "'");
        p.push_back(it->second);
        t.push_back(v);
    }
    const auto report = evaluate(p, t, args.bin_width);

    std::ofstream file;
    if (!args.out.empty())
        file = open_output(args.out);
    std::ostream& records = args.out.empty() ? std::cout : file;
    Json m;
    m["record"] = "metrics";
    m["srcc"] = report.srcc;
    m["plcc"] = report.plcc;
    m["n"] = report.n;
    records << m.dump() << '\n';
    for (const auto& bin : report.error_histogram) {
        Json b;
        b["record"] = "error_bin";
        b["center"] = bin.center;
        b["proportion"] = bin.proportion;
        records << b.dump() << '\n';
    }
    auto& summary = args.out.empty() ? std::cerr : std::cout;
    summary << "eval: n=" << report.n << " SRCC " << report.srcc << " PLCC " << report.plcc << '\n';
    return 0;
}

int run_oracle(const OracleArgs& args)
{
    auto in = open_input(args.instance);
    Json inst;
    try {
        inst = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::RecordError, args.instance + ": " + e.what());
    }

    RunConfig cfg;
    TaskKind task = TaskKind::Iqa;
    Stage stage = Stage::Explore;
    std::vector<SampleGroup> groups;
    try {
        if (inst.contains("config")) {
            std::string text;
            for (const auto& [key, value] : inst.at("config").items())
                text += key + " = " + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
            cfg = parse_config(text);
        }
        if (inst.contains("task"))
            task = parse_task(inst.at("task").get<std::string>());
        if (inst.contains("stage"))
            stage = parse_stage(inst.at("stage").get<std::string>());
        const std::size_t dims = dims_for(task);
        for (const auto& s : inst.at("samples")) {
            std::vector<Generation> gens;
            for (const auto& g : s.at("generations")) {
                if (g.is_null()) {
                    gens.push_back(Generation::malformed(std::nullopt));
                    continue;
                }
                const auto scores = g.get<std::vector<double>>();
                gens.push_back(Generation::valid(ScoreVector::validate(scores, dims), 0.0));
            }
            groups.push_back(make_sample_group(s.at("sample_id").get<std::string>(), s.at("mos").get<double>(), {},
                                               std::move(gens)));
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::RecordError, args.instance + ": " + e.what());
    }

    const std::size_t dims = dims_for(task);
    const auto fast = score_batch(groups, cfg, stage, dims);
    const auto slow = oracle_rewards(groups, cfg, stage, dims);
    const double diff = max_abs_difference(fast, slow);

    std::size_t count = 0;
    for (const auto& g : groups)
        count += g.generations.size();
    Json rec;
    rec["record"] = "oracle_diff";
    rec["samples"] = groups.size();
    rec["generations"] = count;
    rec["max_abs_diff"] = diff;
    rec["tolerance"] = args.tolerance;
    std::cout << rec.dump() << '\n';
    std::cout << "oracle: " << groups.size() << " samples, " << count << " generations, max |delta| = " << diff
              << (diff < args.tolerance ? " (ok)" : " (MISMATCH)") << '\n';
    return diff < args.tolerance ? 0 : 2;
}

}  // namespace

int cli_main(int argc, char** argv)
{
    CLI::App app{"Preference-response reward stack and GRPO simulation harness", "prpo"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Run the two-stage toy-policy simulation and write a run report");
    train_cmd->add_option("--config", train.config, "Configuration file (key = value)");
    train_cmd->add_option("--out", train.out, "Run report output (line-delimited records)");
    train_cmd->add_option("--csv", train.csv, "Per-step diagnostics CSV");
    train_cmd->add_option("--seed", train.seed, "Override the configured seed");

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Score ingested model responses and emit reward breakdowns");
    score_cmd->add_option("--responses", score.responses, "Response records")->required();
    score_cmd->add_option("--config", score.config, "Configuration file");
    score_cmd->add_option("--out", score.out, "Reward records output");
    score_cmd->add_option("--stage", score.stage, "explore | stabilize");
    score_cmd->add_option("--task", score.task, "iqa | vqa");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "SRCC, PLCC and error histogram of predictions against MOS");
    eval_cmd->add_option("--pred", eval.pred, "Prediction records {sample_id, score}")->required();
    eval_cmd->add_option("--truth", eval.truth, "Ground-truth records {sample_id, mos}")->required();
    eval_cmd->add_option("--bin-width", eval.bin_width, "Error histogram bin width");
    eval_cmd->add_option("--out", eval.out, "Metric records output");

    OracleArgs oracle;
    auto* oracle_cmd = app.add_subcommand("oracle", "Diff the reward fast path against the brute-force oracle");
    oracle_cmd->add_option("--instance", oracle.instance, "Instance file")->required();
    oracle_cmd->add_option("--tolerance", oracle.tolerance, "Maximum accepted |delta|");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*train_cmd)
            return run_train(train);
        if (*score_cmd)
            return run_score(score);
        if (*eval_cmd)
            return run_eval(eval);
        if (*oracle_cmd)
            return run_oracle(oracle);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_validation_error(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace prpo
