#include "heatobs/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "heatobs/hs_analysis.hpp"
#include "heatobs/impulse_control.hpp"
#include "heatobs/observability.hpp"
#include "heatobs/weak_window.hpp"
#include "json.hpp"

namespace heatobs {

namespace {

constexpr int kTableVersion = 1;

// One CSV row plus its deterministic sort key; ties broken by task order.
struct Row {
    std::vector<double> key;
    std::string line;
    bool ok = true;
};

std::string join(const std::vector<std::string>& cells) {
    std::string out;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

// asserted direction: most reports assert measured <= rhs; the counterexample
// gap asserts a lower threshold instead and marks it in its policy string.
bool report_ok(const BoundReport& rep) {
    if (rep.policy.find("assert=lower") != std::string::npos)
        return rep.measured + rep.certificate >= rep.bound_rhs;
    return rep.holds();
}

std::vector<std::string> report_cells(const BoundReport& rep, const std::string& fp) {
    return {format17(rep.measured), format17(rep.bound_rhs), format17(rep.ratio()),
            format17(rep.certificate), rep.certified ? "1" : "0", fp, rep.policy};
}

template <typename Task>
std::vector<Row> run_pool(std::vector<Task>& tasks, int jobs) {
    std::vector<Row> rows(tasks.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            rows[i] = tasks[i]();
        }
    };
    int extra = std::max(0, std::min<int>(jobs, int(tasks.size())) - 1);
    std::vector<std::thread> pool;
    for (int t = 0; t < extra; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return rows;
}

void sort_rows(std::vector<Row>& rows) {
    std::vector<size_t> order(rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return rows[a].key < rows[b].key;
    });
    std::vector<Row> out;
    out.reserve(rows.size());
    for (size_t i : order) out.push_back(std::move(rows[i]));
    rows = std::move(out);
}

// compact fields for the constant-fitting sweeps (index 0 is very wide and
// only suits the closed-form routes)
std::vector<GaussianMixtureField> corpus(int d, bool include_wide) {
    std::vector<GaussianMixtureField> fields;
    for (int i = include_wide ? 0 : 1; i <= 4; ++i)
        fields.push_back(standard_trial_field(d, i, 1.0));
    return fields;
}

double fitted_max_ratio(const std::string& name, const std::vector<BoundReport>& reps,
                        const std::string& sweep) {
    return calibrate_constant(name, reps, sweep).fitted;
}

double fit_closed_loop_c1() {
    double T = 1.0, tau = 0.5, eps = 0.1;
    for (double c = 0.4; c < 2.65; c += 0.1) {
        bool ok = true;
        for (int i : {1, 2, 3}) {
            ClosedLoopRun run;
            run.y0 = standard_trial_field(1, i, T);
            run.T = T;
            run.tau = tau;
            run.eps = eps;
            run.C1 = c;
            run.N = c * std::sqrt((1.0 / (T - tau)) * (1 + std::log(1.0 / eps)));
            auto rep = closed_loop_final(run);
            if (!(rep.measured <= eps * run.y0.l2_norm() + rep.certificate)) {
                ok = false;
                break;
            }
        }
        if (ok) return c;
    }
    throw CertificationError("closed_loop_C1: no grid value reaches the target",
                             {2.7, 0.0, false});
}

}  // namespace

GaussianMixtureField ExperimentConfig::field() const {
    if (field_text.empty())
        return GaussianMixtureField::single(1.0, Vec::zero(d), 1.0);
    auto f = GaussianMixtureField::deserialize(field_text);
    if (f.dim() != d) throw InputError("config: field dimension does not match --dim");
    return f;
}

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

double CalibrationTable::constant(const std::string& id) const {
    if (!matches()) return 1.0;
    auto it = constants.find(id);
    return it == constants.end() ? 1.0 : it->second;
}

std::string CalibrationTable::sweep_description() {
    std::ostringstream os;
    os << "version=" << kTableVersion
       << ";corpus=standard_trial_field[0..4],d={1,2},T=1"
       << ";grids:residual,perturbed T={0.5,1}xN={1,2}"
       << ";window T={0.5,1}xN={1,2}xr={2,4}"
       << ";control_sobolev N={1,2}"
       << ";hs_residual s=d/2+0.5,N={1,2}"
       << ";local_sup,heat_local r={0.5,1},s=d/2+0.5"
       << ";closed_loop_C1 grid 0.4:0.1:2.6,eps=0.1,T=1,tau=0.5";
    return os.str();
}

std::string CalibrationTable::expected_fingerprint() {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(sweep_description())));
    return buf;
}

CalibrationTable CalibrationTable::load(const std::string& path) {
    CalibrationTable t;
    std::ifstream is(path);
    if (!is) return t;
    nlohmann::json j;
    try {
        is >> j;
        if (j.contains("version") && j["version"].is_number_integer())
            t.version = j["version"].get<int>();
        if (j.contains("fingerprint") && j["fingerprint"].is_string())
            t.fingerprint = j["fingerprint"].get<std::string>();
        if (j.contains("sweep") && j["sweep"].is_string())
            t.sweep = j["sweep"].get<std::string>();
        if (j.contains("constants") && j["constants"].is_object())
            for (auto& [k, v] : j["constants"].items())
                t.constants[k] = v.get<double>();
    } catch (const nlohmann::json::exception&) {
        return CalibrationTable{};
    }
    if (t.version != kTableVersion) return CalibrationTable{};
    return t;
}

void CalibrationTable::save(const std::string& path) const {
    namespace fs = std::filesystem;
    if (fs::path(path).has_parent_path())
        fs::create_directories(fs::path(path).parent_path());
    if (fs::exists(path))
        fs::copy_file(path, path + ".bak", fs::copy_options::overwrite_existing);
    nlohmann::json j;
    j["version"] = version;
    j["fingerprint"] = fingerprint;
    j["sweep"] = sweep;
    nlohmann::json c = nlohmann::json::object();
    for (const auto& [k, v] : constants) c[k] = v;
    j["constants"] = c;
    std::ofstream os(path);
    os << j.dump(2) << "\n";
}

std::vector<std::string> calibration_ids() {
    return {"residual:d=1",        "residual:d=2",        "perturbed:d=1",
            "window:d=1",          "control_sobolev:d=1", "control_sobolev:d=2",
            "hs_residual:d=1",     "hs_residual:d=2",     "local_sup:d=1",
            "local_sup:d=2",       "heat_local:d=1",      "heat_local:d=2",
            "closed_loop_C1:d=1"};
}

CalibrationTable run_calibration(const CalibrationTable& base,
                                 const std::vector<std::string>& ids) {
    if (ids.empty()) return base;
    CalibrationTable next = base;
    std::string sweep = CalibrationTable::sweep_description();
    std::map<std::string, double> fresh;  // staged; committed only if all succeed
    for (const auto& id : ids) {
        auto colon = id.find(":d=");
        if (colon == std::string::npos) throw InputError("calibrate: bad bound id " + id);
        std::string bound = id.substr(0, colon);
        int d = std::stoi(id.substr(colon + 3));
        std::vector<BoundReport> reps;
        if (bound == "residual" || bound == "perturbed") {
            for (const auto& u0 : corpus(d, true))
                for (double T : {0.5, 1.0})
                    for (double N : {1.0, 2.0})
                        reps.push_back(bound == "residual"
                                           ? residual(u0, T, N, 1.0, 1e-6)
                                           : perturbed_residual(u0, T, N, 0.1,
                                                                PerturbRule::alternating,
                                                                1.0, 17));
        } else if (bound == "window") {
            for (const auto& u0 : corpus(d, false))
                for (double T : {0.5, 1.0})
                    for (double N : {1.0, 2.0})
                        for (double r : {2.0, 4.0})
                            reps.push_back(windowed_residual({T, N, r, 1, u0}, 1.0));
        } else if (bound == "control_sobolev") {
            for (const auto& g : corpus(d, false))
                for (double N : {1.0, 2.0}) {
                    auto v = feedback_gain(g.heat_evolve(0.25), N);
                    reps.push_back(control_sobolev_norm(v, 0.5 * d + 0.51, 1.0));
                }
        } else if (bound == "hs_residual") {
            for (const auto& f : corpus(d, false))
                for (double N : {1.0, 2.0})
                    reps.push_back(hs_residual(f, N, 0.5 * d + 0.5, 1.0));
        } else if (bound == "local_sup") {
            for (const auto& f : corpus(d, false))
                for (double r : {0.5, 1.0})
                    reps.push_back(local_sup_report(f, r, 0.5 * d + 0.5, 1.0));
        } else if (bound == "heat_local") {
            for (const auto& u0 : corpus(d, false))
                for (double T : {0.5, 1.0})
                    for (double r : {0.5, 1.0})
                        reps.push_back(heat_local_bounds(u0, T, r, 1.0));
        } else if (bound == "closed_loop_C1") {
            fresh[id] = fit_closed_loop_c1();
            continue;
        } else {
            throw InputError("calibrate: unknown bound id " + id);
        }
        fresh[id] = fitted_max_ratio(id, reps, sweep);
    }
    for (const auto& [k, v] : fresh) next.constants[k] = v;
    next.version = kTableVersion;
    next.sweep = sweep;
    next.fingerprint = CalibrationTable::expected_fingerprint();
    return next;
}

RunResult run_experiment(const ExperimentConfig& cfg, const CalibrationTable& table) {
    const std::string fp = table.matches() ? table.fingerprint : "uncalibrated";
    auto u0 = cfg.field();
    int d = cfg.d;
    std::vector<std::function<Row()>> tasks;
    RunResult res;

    auto dn = [&](int dim) { return ":d=" + std::to_string(dim); };

    if (cfg.subcommand == "observe") {
        res.header = "d,T,N,eps,measured,bound_rhs,ratio,certificate,certified,fingerprint,policy";
        double Cres = table.constant("residual" + dn(d));
        double Cp = table.constant("perturbed" + dn(d));
        for (double T : cfg.T)
            for (double N : cfg.N) {
                std::vector<double> epss{0.0};
                epss.insert(epss.end(), cfg.eps.begin(), cfg.eps.end());
                for (double eps : epss)
                    tasks.push_back([=, &cfg] {
                        BoundReport rep =
                            eps == 0.0
                                ? residual(u0, T, N, Cres, cfg.tol)
                                : perturbed_residual(u0, T, N, eps,
                                                     perturb_rule_from_name(cfg.rule),
                                                     Cp, cfg.seed);
                        std::vector<std::string> cells{
                            std::to_string(d), format17(T), format17(N), format17(eps)};
                        auto rc = report_cells(rep, fp);
                        cells.insert(cells.end(), rc.begin(), rc.end());
                        return Row{{T, N, eps}, join(cells), report_ok(rep)};
                    });
            }
    } else if (cfg.subcommand == "window") {
        res.header = "d,T,N,r,k,measured,bound_rhs,ratio,certificate,certified,fingerprint,policy";
        double Cw = table.constant("window" + dn(d));
        std::vector<double> rs = cfg.r.empty() ? std::vector<double>{2.0} : cfg.r;
        for (double T : cfg.T)
            for (double N : cfg.N)
                for (double r : rs)
                    tasks.push_back([=] {
                        auto rep = windowed_residual({T, N, r, cfg.k, u0}, Cw);
                        std::vector<std::string> cells{std::to_string(d), format17(T),
                                                       format17(N), format17(r),
                                                       std::to_string(cfg.k)};
                        auto rc = report_cells(rep, fp);
                        cells.insert(cells.end(), rc.begin(), rc.end());
                        return Row{{T, N, 0.0, r}, join(cells), report_ok(rep)};
                    });
    } else if (cfg.subcommand == "counterexample") {
        res.header = "d,T,N,G,measured,bound_rhs,ratio,certificate,certified,fingerprint,policy";
        auto G = growth_function(cfg.growth);
        for (double T : cfg.T)
            for (double N : cfg.N)
                tasks.push_back([=] {
                    auto rep = counterexample_gap(d, T, N, G);
                    std::vector<std::string> cells{std::to_string(d), format17(T),
                                                   format17(N), cfg.growth};
                    auto rc = report_cells(rep, fp);
                    cells.insert(cells.end(), rc.begin(), rc.end());
                    return Row{{T, N}, join(cells), report_ok(rep)};
                });
    } else if (cfg.subcommand == "control") {
        res.header =
            "d,T,tau,N,r,eps,measured,bound_rhs,ratio,threshold_ok,certificate,certified,"
            "fingerprint,policy";
        double C1 = table.constant("closed_loop_C1" + dn(d));
        std::vector<double> rs = cfg.r.empty() ? std::vector<double>{0.0} : cfg.r;
        std::vector<double> epss = cfg.eps.empty() ? std::vector<double>{0.1} : cfg.eps;
        for (double T : cfg.T)
            for (double N : cfg.N)
                for (double eps : epss)
                    for (double r : rs)
                        tasks.push_back([=, &cfg] {
                            ClosedLoopRun run;
                            run.y0 = u0;
                            run.T = T;
                            run.tau = cfg.tau;
                            run.N = N;
                            run.r = r;
                            run.eps = eps;
                            run.C1 = C1;
                            auto rep = r > 0 ? windowed_closed_loop(run, cfg.tol)
                                             : closed_loop_final(run, cfg.tol);
                            std::vector<std::string> cells{
                                std::to_string(d),  format17(T), format17(cfg.tau),
                                format17(N),        format17(r), format17(eps),
                                format17(rep.measured), format17(rep.bound_rhs),
                                format17(rep.ratio()),
                                format17(rep.params.at("threshold_ok")),
                                format17(rep.certificate), rep.certified ? "1" : "0",
                                fp, rep.policy};
                            // the eps target is asserted only when N clears the
                            // calibrated threshold
                            bool ok = rep.params.at("threshold_ok") == 0.0 || rep.holds();
                            return Row{{T, N, eps, r}, join(cells), ok};
                        });
    } else if (cfg.subcommand == "hs") {
        res.header =
            "d,s,N,r,T,check,measured,bound_rhs,ratio,certificate,certified,fingerprint,policy";
        double Chs = table.constant("hs_residual" + dn(d));
        double Cls = table.constant("local_sup" + dn(d));
        double Chl = table.constant("heat_local" + dn(d));
        std::vector<double> rs = cfg.r.empty() ? std::vector<double>{1.0} : cfg.r;
        auto emit = [&](double s, double N, double r, double T, const std::string& check,
                        const BoundReport& rep) {
            std::vector<std::string> cells{std::to_string(d), format17(s), format17(N),
                                           format17(r),       format17(T), check};
            auto rc = report_cells(rep, fp);
            cells.insert(cells.end(), rc.begin(), rc.end());
            return Row{{T, N, 0.0, r, s, double(fnv1a(check) % 1024)}, join(cells),
                       report_ok(rep)};
        };
        for (double s : cfg.s) {
            for (double N : cfg.N)
                tasks.push_back(
                    [=] { return emit(s, N, 0, 0, "hs_residual", hs_residual(u0, N, s, Chs)); });
            for (double r : rs)
                tasks.push_back([=] {
                    return emit(s, 0, r, 0, "local_sup", local_sup_report(u0, r, s, Cls));
                });
            if (d == 1 && s > 0 && s < 3)
                tasks.push_back([=] {
                    return emit(s, 0, 0, 0, "commutator", commutator_inequality_check(u0, s));
                });
        }
        for (double T : cfg.T)
            for (double r : rs)
                tasks.push_back([=] {
                    return emit(0, 0, r, T, "heat_local", heat_local_bounds(u0, T, r, Chl));
                });
    } else if (cfg.subcommand == "shannon") {
        res.header = "d,N,field,measured,bound_rhs,ratio,certificate,certified,fingerprint,policy";
        for (double N : cfg.N)
            for (int i = 0; i <= 3; ++i)
                tasks.push_back([=] {
                    auto g = standard_trial_field(d, i + 1, 1.0);
                    auto grid = FrequencyGrid::for_band(d, N, d == 1 ? 32 : 16, 4);
                    auto f = SpectralGridField::from_gaussian(g, grid).band_project(N, Band::low);
                    auto rep = shannon_check(f, N, cfg.tol);
                    // band-limited input: the residual is asserted below the
                    // requested tolerance rather than against a theorem rhs
                    rep.bound_rhs = cfg.tol;
                    std::vector<std::string> cells{std::to_string(d), format17(N),
                                                   std::to_string(i)};
                    auto rc = report_cells(rep, fp);
                    cells.insert(cells.end(), rc.begin(), rc.end());
                    return Row{{0.0, N, double(i)}, join(cells), report_ok(rep)};
                });
    } else {
        throw InputError("run_experiment: unknown subcommand " + cfg.subcommand);
    }

    auto rows = run_pool(tasks, std::max(1, cfg.jobs));
    sort_rows(rows);
    for (auto& r : rows) {
        if (!r.ok) ++res.failures;
        res.rows.push_back(std::move(r.line));
    }
    return res;
}

}  // namespace heatobs
