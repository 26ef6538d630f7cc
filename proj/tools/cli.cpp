#include "cli.hpp"

#include <CLI11.hpp>

#include <sicra/analytics.hpp>
#include <sicra/sim.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace sicra::cli {
namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- value formatting ----

std::string fmt(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

std::string fmt(long v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }
std::string fmt(std::uint64_t v) { return std::to_string(v); }

const char* policy_name(Policy policy) {
    switch (policy) {
        case Policy::SicRa: return "sicra";
        case Policy::Standard: return "standard";
        case Policy::Adra: return "adra";
    }
    return "?";
}

// ---- configuration model ----

struct SweepSpec {
    std::string axis;            // p | G | p_a | sigma_eps_sq | N
    std::vector<double> values;
    int runs_per_point = 0;      // 0: inherit scenario.n_runs
};

struct CompareSpec {
    bool strict = true;
    double z_bound = 4.0;
};

struct JobSpec {
    ScenarioConfig scenario;
    SweepSpec sweep;
    CompareSpec compare;
};

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long v = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "on") return true;
    if (value == "0" || value == "false" || value == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

Policy parse_policy(const std::string& key, const std::string& value) {
    if (value == "sicra") return Policy::SicRa;
    if (value == "standard") return Policy::Standard;
    if (value == "adra") return Policy::Adra;
    throw ConfigError(key + ": expected sicra|standard|adra, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> values;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ','))
        if (!item.empty()) values.push_back(parse_double(key, item));
    if (values.empty()) throw ConfigError(key + ": expected a comma-separated list");
    return values;
}

void apply_key(JobSpec& spec, const std::string& key, const std::string& value) {
    ScenarioConfig& s = spec.scenario;
    ChannelParams& c = s.channel;
    if (key == "scenario.n_nodes") s.n_nodes = int(parse_long(key, value));
    else if (key == "scenario.tx_prob") s.tx_prob = parse_double(key, value);
    else if (key == "scenario.arrival_prob") s.arrival_prob = parse_double(key, value);
    else if (key == "scenario.deadline_slots") s.deadline_slots = int(parse_long(key, value));
    else if (key == "scenario.policy") s.policy = parse_policy(key, value);
    else if (key == "scenario.adra_threshold") s.adra_threshold = parse_double(key, value);
    else if (key == "scenario.sigma_eps_sq") s.sigma_eps_sq = parse_double(key, value);
    else if (key == "scenario.equal_snr") s.equal_snr = parse_bool(key, value);
    else if (key == "scenario.snr_db") s.snr_db = parse_double(key, value);
    else if (key == "scenario.area_m") s.area_m = parse_double(key, value);
    else if (key == "scenario.min_distance_m") s.min_distance_m = parse_double(key, value);
    else if (key == "scenario.n_slots") s.n_slots = parse_long(key, value);
    else if (key == "scenario.n_runs") s.n_runs = int(parse_long(key, value));
    else if (key == "scenario.seed") s.seed = std::uint64_t(parse_long(key, value));
    else if (key == "scenario.drop_on_deadline") s.drop_on_deadline = parse_bool(key, value);
    else if (key == "channel.tx_power_dbm") c.tx_power_dbm = parse_double(key, value);
    else if (key == "channel.noise_power") c.noise_power = parse_double(key, value);
    else if (key == "channel.rate_threshold") c.rate_threshold = parse_double(key, value);
    else if (key == "channel.pathloss_ref_db") c.pathloss_ref_db = parse_double(key, value);
    else if (key == "channel.pathloss_exponent") c.pathloss_exponent = parse_double(key, value);
    else if (key == "sweep.axis") spec.sweep.axis = value;
    else if (key == "sweep.values") spec.sweep.values = parse_list(key, value);
    else if (key == "sweep.runs_per_point") spec.sweep.runs_per_point = int(parse_long(key, value));
    else if (key == "compare.strict") spec.compare.strict = parse_bool(key, value);
    else if (key == "compare.z_bound") spec.compare.z_bound = parse_double(key, value);
    else throw ConfigError("unknown configuration key '" + key + "'");
}

std::string trim(const std::string& text) {
    const auto begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r");
    return text.substr(begin, end - begin + 1);
}

void apply_assignment(JobSpec& spec, const std::string& text,
                      const std::string& origin) {
    const auto eq = text.find('=');
    if (eq == std::string::npos)
        throw ConfigError(origin + ": expected key=value, got '" + text + "'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty())
        throw ConfigError(origin + ": expected key=value, got '" + text + "'");
    apply_key(spec, key, value);
}

void load_config_file(JobSpec& spec, const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        apply_assignment(spec, line, path + ":" + std::to_string(line_no));
    }
}

// ---- common flags ----

struct Common {
    std::string config_path, out_path, trace_path;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    int jobs = 1;
    CLI::Option* seed_opt = nullptr;
    CLI::App* cmd = nullptr;
};

void add_common_flags(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config_path,
                    "flat key=value configuration file");
    cmd->add_option("--set", common.sets, "override one key (repeatable)")
        ->type_size(1);
    common.seed_opt =
        cmd->add_option("--seed", common.seed, "base RNG seed override");
    cmd->add_option("--jobs", common.jobs, "worker threads for runs")
        ->check(CLI::Range(1, 256));
    cmd->add_option("--out", common.out_path, "CSV output path (default stdout)");
    cmd->add_option("--trace", common.trace_path,
                    "per-slot trace CSV (simulate, first run only)");
    common.cmd = cmd;
}

JobSpec build_spec(const Common& common) {
    JobSpec spec;
    if (!common.config_path.empty()) load_config_file(spec, common.config_path);
    for (const std::string& text : common.sets)
        apply_assignment(spec, text, "--set");
    if (common.seed_opt && common.seed_opt->count()) spec.scenario.seed = common.seed;
    return spec;
}

// ---- sweep plumbing ----

const char* kAxes[] = {"p", "G", "p_a", "sigma_eps_sq", "N"};

ScenarioConfig at_point(const JobSpec& spec, double value) {
    ScenarioConfig config = spec.scenario;
    const std::string& axis = spec.sweep.axis;
    if (axis == "p") {
        config.tx_prob = value;
    } else if (axis == "G") {
        config.tx_prob = value / config.n_nodes;
    } else if (axis == "p_a") {
        config.arrival_prob = value;
    } else if (axis == "sigma_eps_sq") {
        config.sigma_eps_sq = value;
    } else if (axis == "N") {
        const int n = int(value);
        if (double(n) != value || n < 1)
            throw ConfigError("sweep.values: N must be a positive integer");
        config.n_nodes = n;
    } else {
        throw ConfigError("sweep.axis must be one of p|G|p_a|sigma_eps_sq|N");
    }
    if (spec.sweep.runs_per_point > 0) config.n_runs = spec.sweep.runs_per_point;
    return config;
}

std::vector<ScenarioConfig> sweep_points(const JobSpec& spec) {
    if (spec.sweep.axis.empty())
        throw ConfigError("this subcommand requires sweep.axis and sweep.values");
    bool known = false;
    for (const char* axis : kAxes) known = known || spec.sweep.axis == axis;
    if (!known) throw ConfigError("sweep.axis must be one of p|G|p_a|sigma_eps_sq|N");
    if (spec.sweep.values.empty())
        throw ConfigError("sweep.values must be a non-empty list");
    std::vector<ScenarioConfig> configs;
    configs.reserve(spec.sweep.values.size());
    for (double value : spec.sweep.values) configs.push_back(at_point(spec, value));
    return configs;
}

// ---- deterministic parallel execution ----

void parallel_for(int jobs, int n_tasks, const std::function<void(int)>& body) {
    if (jobs <= 1 || n_tasks <= 1) {
        for (int i = 0; i < n_tasks; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
        for (int i; (i = next.fetch_add(1)) < n_tasks;) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min(jobs, n_tasks);
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// every (point, run) pair is an independent task; reports are aggregated
// in point order afterwards, so output never depends on scheduling
std::vector<MetricsReport> run_grid(const std::vector<ScenarioConfig>& configs,
                                    int jobs) {
    std::vector<std::vector<RunMetrics>> runs(configs.size());
    std::vector<std::pair<int, int>> tasks;
    for (std::size_t pt = 0; pt < configs.size(); ++pt) {
        runs[pt].resize(configs[pt].n_runs);
        for (int r = 0; r < configs[pt].n_runs; ++r)
            tasks.emplace_back(int(pt), r);
    }
    for (const ScenarioConfig& config : configs) validate(config);
    parallel_for(jobs, int(tasks.size()), [&](int i) {
        const auto [pt, r] = tasks[i];
        runs[pt][r] = run_single(configs[pt], r);
    });
    std::vector<MetricsReport> reports;
    reports.reserve(configs.size());
    for (std::size_t pt = 0; pt < configs.size(); ++pt)
        reports.push_back(aggregate(configs[pt], std::move(runs[pt])));
    return reports;
}

// ---- analytic references ----

struct MetricRef {
    bool has_value = false;
    double value = 0.0;
    double se = 0.0;       // uncertainty of the reference itself
    bool comparable = false;
    std::string note;
};

struct Reference {
    MetricRef q_s, throughput, avg_aoi, deadline_violation;
};

LinkBudget budget_for(const ScenarioConfig& config) {
    return LinkBudget::equal_snr(config.snr_db, config.channel.gamma(),
                                 config.n_nodes, config.tx_prob,
                                 config.arrival_prob, config.deadline_slots,
                                 config.sigma_eps_sq);
}

// saturated-contention reference for a fixed heterogeneous geometry
void het_reference(const ScenarioConfig& config, Reference& ref) {
    const std::vector<NodeProfile> profiles = scenario_profiles(config);
    const int n = config.n_nodes;
    const double p = config.tx_prob;
    const int others = n - 1;
    // keep total work bounded as the subset count grows
    const long samples =
        std::max<long>(2000, 120000 / std::max(1, 1 << others));
    double q_sum = 0.0, q_var = 0.0;
    for (int tagged = 0; tagged < n; ++tagged) {
        Rng rng(stream_key(config.seed, 0x48455452454631ull,
                           std::uint64_t(tagged)));
        double success = 0.0, variance = 0.0;
        for (int mask = 0; mask < (1 << others); ++mask) {
            std::vector<double> lambdas{profiles[tagged].lambda};
            int bits = 0;
            for (int j = 0, k = 0; j < n; ++j) {
                if (j == tagged) continue;
                if (mask & (1 << k)) {
                    lambdas.push_back(profiles[j].lambda);
                    ++bits;
                }
                ++k;
            }
            const double weight =
                std::pow(p, bits) * std::pow(1.0 - p, others - bits);
            const MonteCarloEstimate outage =
                avg_outage_general(0, lambdas, config.channel, samples, rng);
            success += weight * (1.0 - outage.value);
            variance += weight * weight * outage.std_error * outage.std_error;
        }
        q_sum += p * success / n;
        q_var += p * p * variance / double(n) / double(n);
    }
    ref.q_s = {true, q_sum, std::sqrt(q_var), false,
               "saturated-contention reference for the fixed geometry"};
    ref.throughput = {true, double(n) * q_sum,
                      double(n) * std::sqrt(q_var), false, ref.q_s.note};
    const bool saturated = !(q_sum > config.arrival_prob);
    ref.q_s.comparable = saturated;
    ref.throughput.comparable = saturated;
    if (!saturated) {
        ref.q_s.note = "stable regime: contention below the saturated model";
        ref.throughput.note = ref.q_s.note;
    }
    ref.avg_aoi.note = "heterogeneous reference limited to q_s and throughput";
    ref.deadline_violation.note = ref.avg_aoi.note;
}

Reference make_reference(const ScenarioConfig& config) {
    Reference ref;
    if (config.equal_snr) {
        const AnalyticReport report = analytic_report(
            budget_for(config), config.sigma_eps_sq > 0.0);
        const bool saturated = report.unstable;
        const bool lone = config.n_nodes == 1;
        ref.q_s = {true, report.q_s, 0.0, lone || saturated, ""};
        ref.throughput = {true, report.throughput, 0.0, saturated, ""};
        if (!ref.throughput.comparable)
            ref.throughput.note =
                "stable regime: delivery rate tracks arrivals, not the saturated form";
        if (report.unstable) {
            ref.avg_aoi = {false, 0.0, 0.0, false,
                           "unstable queue: age diverges, comparison skipped"};
        } else {
            ref.avg_aoi = {true, report.avg_aoi, 0.0, lone, ""};
            if (!lone)
                ref.avg_aoi.note = "reference assumes saturated q_s";
        }
        ref.deadline_violation = {true, report.deadline_violation, 0.0,
                                  lone || saturated, ""};
        if (!ref.deadline_violation.comparable)
            ref.deadline_violation.note = "reference assumes saturated q_s";
        if (!ref.q_s.comparable)
            ref.q_s.note = "stable regime: contention below the saturated model";
        return ref;
    }
    if (config.n_nodes <= 8 && config.sigma_eps_sq == 0.0) {
        het_reference(config, ref);
        return ref;
    }
    const char* why = config.sigma_eps_sq > 0.0
                          ? "no analytic reference: heterogeneous imperfect CSI"
                          : "no analytic reference: heterogeneous with more than 8 nodes";
    ref.q_s.note = why;
    ref.throughput.note = why;
    ref.avg_aoi.note = why;
    ref.deadline_violation.note = why;
    return ref;
}

// ---- csv emission ----

std::string scenario_cells(const ScenarioConfig& c) {
    std::string row;
    row += policy_name(c.policy);
    row += ',';
    row += fmt(c.n_nodes) + ',' + fmt(c.tx_prob) + ',' + fmt(c.arrival_prob) +
           ',' + fmt(c.deadline_slots) + ',' + fmt(c.snr_db) + ',' +
           fmt(c.sigma_eps_sq);
    return row;
}

int cmd_analyze(const JobSpec& spec, std::ostream& out, std::ostream& err) {
    if (!spec.scenario.equal_snr)
        throw ConfigError(
            "analyze needs scenario.equal_snr=1; heterogeneous geometries have "
            "no closed forms (use compare, which samples a reference)");
    std::vector<ScenarioConfig> configs;
    std::vector<double> values;
    if (spec.sweep.axis.empty()) {
        configs.push_back(spec.scenario);
        values.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
        configs = sweep_points(spec);
        values = spec.sweep.values;
    }
    out << "policy,n_nodes,tx_prob,arrival_prob,deadline_slots,snr_db,"
           "sigma_eps_sq,gamma,axis,value,q_s,throughput,avg_aoi,"
           "deadline_violation,rho,unstable\n";
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const ScenarioConfig& config = configs[i];
        validate(config);
        const AnalyticReport report =
            analytic_report(budget_for(config), config.sigma_eps_sq > 0.0);
        out << scenario_cells(config) << ',' << fmt(config.channel.gamma())
            << ',' << spec.sweep.axis << ','
            << (std::isnan(values[i]) ? std::string() : fmt(values[i])) << ','
            << fmt(report.q_s) << ',' << fmt(report.throughput) << ','
            << (report.unstable ? std::string() : fmt(report.avg_aoi)) << ','
            << fmt(report.deadline_violation) << ',' << fmt(report.rho) << ','
            << fmt(report.unstable) << '\n';
        if (report.unstable)
            err << "warning: "
                << (spec.sweep.axis.empty()
                        ? std::string("the scenario")
                        : spec.sweep.axis + " = " + fmt(values[i]))
                << " is an unstable-queue point (q_s <= p_a)\n";
    }
    return 0;
}

int cmd_simulate(const JobSpec& spec, const Common& common, std::ostream& out,
                 std::ostream& err) {
    (void)err;
    const ScenarioConfig& config = spec.scenario;
    validate(config);

    std::string trace_rows;
    TraceSink sink;
    if (!common.trace_path.empty()) {
        sink = [&trace_rows](long slot, const SlotOutcome& outcome,
                             const std::vector<NodeState>& nodes) {
            trace_rows += fmt(0) + ',' + fmt(slot) + ',' +
                          fmt(int(outcome.transmitters.size())) + ',' +
                          fmt(outcome.decoded_count);
            for (const NodeState& node : nodes)
                trace_rows += ',' + fmt(node.instantaneous_aoi);
            trace_rows += '\n';
        };
    }

    std::vector<RunMetrics> per_run(config.n_runs);
    per_run[0] = run_single(config, 0, sink);
    parallel_for(common.jobs, config.n_runs - 1,
                 [&](int i) { per_run[i + 1] = run_single(config, i + 1); });
    const MetricsReport report = aggregate(config, std::move(per_run));

    if (!common.trace_path.empty()) {
        std::ofstream trace(common.trace_path);
        if (!trace)
            throw ConfigError("cannot open trace file '" + common.trace_path + "'");
        trace << "run,slot,n_transmitters,decoded_count";
        for (int i = 0; i < config.n_nodes; ++i) trace << ",aoi_" << i;
        trace << '\n' << trace_rows;
    }

    const std::string shared =
        scenario_cells(config) + ',' + fmt(config.equal_snr) + ',' +
        fmt(config.drop_on_deadline) + ',' + fmt(config.n_slots) + ',' +
        fmt(config.n_runs) + ',' + fmt(config.seed);
    out << "kind,run_index,policy,n_nodes,tx_prob,arrival_prob,deadline_slots,"
           "snr_db,sigma_eps_sq,equal_snr,drop_on_deadline,n_slots,n_runs,seed,"
           "avg_aoi,throughput,deadline_violation,drop_rate,q_s_empirical,"
           "avg_aoi_ci,throughput_ci,deadline_violation_ci,drop_rate_ci,"
           "q_s_empirical_ci,generated,delivered,dropped,queued_end\n";
    for (std::size_t r = 0; r < report.per_seed.size(); ++r) {
        const RunMetrics& m = report.per_seed[r];
        out << "run," << r << ',' << shared << ',' << fmt(m.avg_aoi) << ','
            << fmt(m.throughput) << ',' << fmt(m.deadline_violation) << ','
            << fmt(m.drop_rate) << ',' << fmt(m.q_s_empirical) << ",,,,,,"
            << fmt(m.generated) << ',' << fmt(m.delivered) << ','
            << fmt(m.dropped) << ',' << fmt(m.queued_end) << '\n';
    }
    out << "aggregate,," << shared << ',' << fmt(report.avg_aoi) << ','
        << fmt(report.throughput) << ',' << fmt(report.deadline_violation)
        << ',' << fmt(report.drop_rate) << ',' << fmt(report.q_s_empirical)
        << ',' << fmt(report.avg_aoi_ci) << ',' << fmt(report.throughput_ci)
        << ',' << fmt(report.deadline_violation_ci) << ','
        << fmt(report.drop_rate_ci) << ',' << fmt(report.q_s_empirical_ci)
        << ",,,,\n";
    return 0;
}

std::string point_cells(const std::string& axis, double value,
                        const ScenarioConfig& c) {
    return axis + ',' + fmt(value) + ',' + scenario_cells(c) + ',' +
           fmt(c.equal_snr) + ',' + fmt(c.drop_on_deadline) + ',' +
           fmt(c.n_slots) + ',' + fmt(c.seed) + ',' + fmt(c.n_runs);
}

int cmd_sweep(const JobSpec& spec, const Common& common, std::ostream& out,
              std::ostream& err) {
    (void)err;
    const std::vector<ScenarioConfig> configs = sweep_points(spec);
    const std::vector<MetricsReport> reports = run_grid(configs, common.jobs);
    out << "axis,value,policy,n_nodes,tx_prob,arrival_prob,deadline_slots,"
           "snr_db,sigma_eps_sq,equal_snr,drop_on_deadline,n_slots,seed,seeds,"
           "metric,sim_mean,ci95\n";
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const std::string cells =
            point_cells(spec.sweep.axis, spec.sweep.values[i], configs[i]);
        const MetricsReport& r = reports[i];
        const std::pair<const char*, std::pair<double, double>> rows[] = {
            {"avg_aoi", {r.avg_aoi, r.avg_aoi_ci}},
            {"throughput", {r.throughput, r.throughput_ci}},
            {"deadline_violation", {r.deadline_violation, r.deadline_violation_ci}},
            {"drop_rate", {r.drop_rate, r.drop_rate_ci}},
            {"q_s_empirical", {r.q_s_empirical, r.q_s_empirical_ci}},
        };
        for (const auto& [metric, vals] : rows)
            out << cells << ',' << metric << ',' << fmt(vals.first) << ','
                << fmt(vals.second) << '\n';
    }
    return 0;
}

int cmd_compare(const JobSpec& spec, const Common& common, std::ostream& out,
                std::ostream& err) {
    const std::vector<ScenarioConfig> configs = sweep_points(spec);
    const std::vector<MetricsReport> reports = run_grid(configs, common.jobs);

    out << "axis,value,policy,n_nodes,tx_prob,arrival_prob,deadline_slots,"
           "snr_db,sigma_eps_sq,equal_snr,drop_on_deadline,n_slots,seed,seeds,"
           "metric,analytic,sim_mean,ci95,z,note\n";

    double max_abs_z = 0.0;
    long compared = 0;
    bool exceeded = false;

    for (std::size_t i = 0; i < configs.size(); ++i) {
        const ScenarioConfig& config = configs[i];
        const MetricsReport& report = reports[i];
        const Reference ref = make_reference(config);
        const std::string cells =
            point_cells(spec.sweep.axis, spec.sweep.values[i], config);

        struct Row {
            const char* metric;
            const MetricRef* ref;
            double sim, ci;
        };
        const Row rows[] = {
            {"q_s", &ref.q_s, report.q_s_empirical, report.q_s_empirical_ci},
            {"throughput", &ref.throughput, report.throughput,
             report.throughput_ci},
            {"avg_aoi", &ref.avg_aoi, report.avg_aoi, report.avg_aoi_ci},
            {"deadline_violation", &ref.deadline_violation,
             report.deadline_violation, report.deadline_violation_ci},
        };
        for (const Row& row : rows) {
            out << cells << ',' << row.metric << ','
                << (row.ref->has_value ? fmt(row.ref->value) : std::string())
                << ',' << fmt(row.sim) << ',' << fmt(row.ci) << ',';
            std::string note = row.ref->note;
            if (row.ref->has_value && row.ref->comparable) {
                const double se_sim = row.ci / 1.96;
                const double se =
                    std::sqrt(se_sim * se_sim + row.ref->se * row.ref->se);
                const double diff = row.sim - row.ref->value;
                double z;
                if (se == 0.0)
                    z = diff == 0.0 ? 0.0
                                    : std::numeric_limits<double>::infinity();
                else
                    z = diff / se;
                out << fmt(z);
                max_abs_z = std::max(max_abs_z, std::abs(z));
                ++compared;
                if (std::abs(z) > spec.compare.z_bound) {
                    exceeded = true;
                    note = note.empty() ? "z exceeds bound" : note;
                }
            }
            out << ',' << note << '\n';
        }
    }

    err << "compare: " << compared << " comparisons, max |z| = "
        << fmt(max_abs_z) << ", bound " << fmt(spec.compare.z_bound) << " ("
        << (exceeded ? "exceeded" : "ok") << ", "
        << (spec.compare.strict ? "strict" : "report-only") << ")\n";
    return exceeded && spec.compare.strict ? 1 : 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"slot-synchronous IIoT uplink: closed forms and simulation",
                 "sicra"};
    app.require_subcommand(1);

    Common analyze_opts, simulate_opts, sweep_opts, compare_opts;
    add_common_flags(
        app.add_subcommand("analyze", "evaluate the closed-form metrics"),
        analyze_opts);
    add_common_flags(app.add_subcommand("simulate", "run one scenario"),
                     simulate_opts);
    add_common_flags(
        app.add_subcommand("sweep", "simulate along a parameter axis"),
        sweep_opts);
    add_common_flags(
        app.add_subcommand("compare",
                           "simulate and check against the analytics"),
        compare_opts);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    const Common* common = nullptr;
    for (const Common* candidate :
         {&analyze_opts, &simulate_opts, &sweep_opts, &compare_opts})
        if (candidate->cmd->parsed()) common = candidate;

    try {
        const JobSpec spec = build_spec(*common);
        std::ofstream file;
        std::ostream* sink = &out;
        if (!common->out_path.empty()) {
            file.open(common->out_path);
            if (!file)
                throw ConfigError("cannot open output file '" +
                                  common->out_path + "'");
            sink = &file;
        }
        if (!common->trace_path.empty() && common != &simulate_opts)
            err << "note: --trace is only used by simulate\n";
        if (common == &analyze_opts) return cmd_analyze(spec, *sink, err);
        if (common == &simulate_opts)
            return cmd_simulate(spec, *common, *sink, err);
        if (common == &sweep_opts) return cmd_sweep(spec, *common, *sink, err);
        return cmd_compare(spec, *common, *sink, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace sicra::cli
