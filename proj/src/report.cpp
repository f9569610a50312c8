#include "lemult/report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "lemult/errors.hpp"
#include "lemult/hardy.hpp"
#include "lemult/verifier.hpp"

#ifndef LEMULT_VERSION
#define LEMULT_VERSION "dev"
#endif

namespace lemult {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* code_version()
{
    return LEMULT_VERSION;
}

std::string to_string(Mode m)
{
    switch (m) {
    case Mode::verify: return "verify";
    case Mode::budget: return "budget";
    case Mode::hardy: return "hardy";
    case Mode::evolve: return "evolve";
    case Mode::all: return "all";
    }
    return "?";
}

std::optional<Mode> mode_from_string(const std::string& s)
{
    for (Mode m : {Mode::verify, Mode::budget, Mode::hardy, Mode::evolve, Mode::all}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    return std::nullopt;
}

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return {};
    }
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

// shortest text that reads back to the same double
std::string num(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

template <class T>
bool parse_number(const std::string& s, T& out)
{
    const std::string t = trim(s);
    if (t.empty()) {
        return false;
    }
    const char* first = t.data();
    if constexpr (std::is_unsigned_v<T>) {
        if (*first == '-') {
            return false;
        }
    }
    if (*first == '+') {
        ++first;
    }
    auto res = std::from_chars(first, t.data() + t.size(), out);
    return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

std::optional<bool> parse_bool(const std::string& s)
{
    const std::string t = trim(s);
    if (t == "true" || t == "yes" || t == "on" || t == "1") {
        return true;
    }
    if (t == "false" || t == "no" || t == "off" || t == "0") {
        return false;
    }
    return std::nullopt;
}

std::optional<DataKind> kind_from_string(const std::string& s)
{
    if (s == "static" || s == "time_symmetric") {
        return DataKind::time_symmetric;
    }
    if (s == "outgoing") {
        return DataKind::outgoing;
    }
    return std::nullopt;
}

std::string kind_name(DataKind k)
{
    return k == DataKind::time_symmetric ? "static" : "outgoing";
}

std::string join_ints(const std::vector<int>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + std::to_string(v[i]);
    }
    return s;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        const auto dash = item.find('-', 1);
        if (dash != std::string::npos) {
            int a = 0, b = 0;
            if (!parse_number(item.substr(0, dash), a) || !parse_number(item.substr(dash + 1), b) || b < a) {
                throw ConfigError("bad range '" + item + "'");
            }
            for (int i = a; i <= b; ++i) {
                out.push_back(i);
            }
        } else {
            int a = 0;
            if (!parse_number(item, a)) {
                throw ConfigError("bad integer '" + item + "'");
            }
            out.push_back(a);
        }
    }
    if (out.empty()) {
        throw ConfigError("empty list");
    }
    return out;
}

// ---------------------------------------------------------------------------
// config

void RunConfig::validate() const
{
    std::vector<std::string> bad;
    for (int x : d) {
        if (x < 1) {
            bad.push_back("d = " + std::to_string(x) + " (need d >= 1, i.e. n >= 4)");
        }
    }
    if (d.empty()) {
        bad.push_back("d list is empty");
    }
    if (!(r_s > 0.0)) {
        bad.push_back("r_s = " + num(r_s) + " (need r_s > 0)");
    }
    if (!(eps > 0.0)) {
        bad.push_back("eps = " + num(eps) + " (need eps > 0)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        bad.push_back("delta = " + num(delta) + " (need 0 < delta < 1)");
    }
    if (!(delta0 > 0.0 && delta0 < 1.0)) {
        bad.push_back("delta0 = " + num(delta0) + " (need 0 < delta0 < 1)");
    }
    if (alpha && !(*alpha > 0.0)) {
        bad.push_back("alpha = " + num(*alpha) + " (need alpha > 0)");
    }
    if (grid_points < 16) {
        bad.push_back("grid_points = " + std::to_string(grid_points) + " (need >= 16)");
    }
    if (refine < 0 || refine > 8) {
        bad.push_back("refine = " + std::to_string(refine) + " (need 0..8)");
    }
    if (hardy_bumps < 3) {
        bad.push_back("hardy bumps = " + std::to_string(hardy_bumps) + " (need >= 3)");
    }
    if (!(hardy_width > 0.0)) {
        bad.push_back("hardy width = " + num(hardy_width) + " (need > 0)");
    }
    if (!(drift_tol > 0.0)) {
        bad.push_back("drift_tol = " + num(drift_tol) + " (need > 0)");
    }
    if (kinds.empty()) {
        bad.push_back("no evolution data kinds");
    }
    if (threads < 0) {
        bad.push_back("threads = " + std::to_string(threads) + " (need >= 0)");
    }
    if (!d.empty() && d.front() >= 1 && r_s > 0.0 && !kinds.empty()) {
        try {
            evolution(d.front(), kinds.front()).validate();
        } catch (const DomainError& e) {
            bad.push_back(std::string("evolution: ") + e.what());
        }
    }
    if (!bad.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& b : bad) {
            msg += "\n  " + b;
        }
        throw ConfigError(msg);
    }
}

BackgroundParams RunConfig::background(int dd) const
{
    return BackgroundParams::make(dd, r_s);
}

MultiplierParams RunConfig::multiplier(const BackgroundParams& bg) const
{
    if (alpha) {
        return MultiplierParams::with_alpha(bg, eps, delta, *alpha);
    }
    return MultiplierParams::make(bg, eps, delta, delta0);
}

EvolutionConfig RunConfig::evolution(int dd, DataKind kind) const
{
    const auto bg = background(dd);
    auto c = EvolutionConfig::defaults(bg);
    c.mp = multiplier(bg);
    c.ells = ells;
    c.rstar_lo = rstar_lo;
    c.rstar_hi = rstar_hi;
    c.spacing = spacing;
    c.dt = dt;
    c.t_final = t_final;
    c.data.kind = kind;
    c.data.center_r = center_r;
    c.data.width = width;
    c.data.amplitude = amplitude;
    c.cadence = cadence;
    c.track_identity = track_identity;
    return c;
}

namespace {

namespace pt = boost::property_tree;

struct FieldReader {
    RunConfig& c;
    std::vector<std::string>& errors;

    template <class T>
    void number(const std::string& field, const std::string& value, T& out)
    {
        if (!parse_number(value, out)) {
            errors.push_back(field + ": cannot read '" + trim(value) + "' as a number");
        }
    }
};

void apply_key(const std::string& section, const std::string& key, const std::string& value, FieldReader& rd)
{
    RunConfig& c = rd.c;
    const std::string field = (section.empty() ? "" : "[" + section + "] ") + key;
    auto guard = [&](auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            rd.errors.push_back(field + ": " + e.what());
        }
    };
    auto unknown = [&] { rd.errors.push_back(field + ": unknown key"); };

    if (section.empty()) {
        if (key == "mode") {
            const auto m = mode_from_string(trim(value));
            if (!m) {
                rd.errors.push_back(field + ": unknown mode '" + trim(value) + "'");
            } else {
                c.mode = *m;
            }
        } else if (key == "seed") {
            rd.number(field, value, c.seed);
        } else if (key == "threads") {
            rd.number(field, value, c.threads);
        } else {
            unknown();
        }
    } else if (section == "background") {
        if (key == "d") {
            guard([&] { c.d = parse_int_list(value); });
        } else if (key == "r_s") {
            rd.number(field, value, c.r_s);
        } else {
            unknown();
        }
    } else if (section == "multiplier") {
        if (key == "eps") {
            rd.number(field, value, c.eps);
        } else if (key == "delta") {
            rd.number(field, value, c.delta);
        } else if (key == "delta0") {
            rd.number(field, value, c.delta0);
        } else if (key == "alpha") {
            double a = 0.0;
            rd.number(field, value, a);
            c.alpha = a;
        } else {
            unknown();
        }
    } else if (section == "scan") {
        if (key == "grid_points") {
            rd.number(field, value, c.grid_points);
        } else if (key == "refine") {
            rd.number(field, value, c.refine);
        } else {
            unknown();
        }
    } else if (section == "hardy") {
        if (key == "bumps") {
            rd.number(field, value, c.hardy_bumps);
        } else if (key == "width") {
            rd.number(field, value, c.hardy_width);
        } else {
            unknown();
        }
    } else if (section == "evolution") {
        if (key == "ells") {
            guard([&] { c.ells = parse_int_list(value); });
        } else if (key == "data") {
            c.kinds.clear();
            for (const auto& k : split_list(value)) {
                const auto kind = kind_from_string(k);
                if (!kind) {
                    rd.errors.push_back(field + ": unknown data kind '" + k + "'");
                } else {
                    c.kinds.push_back(*kind);
                }
            }
        } else if (key == "rstar_lo") {
            rd.number(field, value, c.rstar_lo);
        } else if (key == "rstar_hi") {
            rd.number(field, value, c.rstar_hi);
        } else if (key == "spacing") {
            rd.number(field, value, c.spacing);
        } else if (key == "dt") {
            rd.number(field, value, c.dt);
        } else if (key == "t_final") {
            rd.number(field, value, c.t_final);
        } else if (key == "center_r") {
            rd.number(field, value, c.center_r);
        } else if (key == "width") {
            rd.number(field, value, c.width);
        } else if (key == "amplitude") {
            rd.number(field, value, c.amplitude);
        } else if (key == "cadence") {
            rd.number(field, value, c.cadence);
        } else if (key == "track_identity") {
            const auto b = parse_bool(value);
            if (!b) {
                rd.errors.push_back(field + ": expected true or false");
            } else {
                c.track_identity = *b;
            }
        } else if (key == "drift_tol") {
            rd.number(field, value, c.drift_tol);
        } else {
            unknown();
        }
    } else if (section == "output") {
        if (key == "dir") {
            c.out_dir = trim(value);
        } else {
            unknown();
        }
    } else {
        rd.errors.push_back("[" + section + "]: unknown section");
    }
}

const std::set<std::string> kSections{"background", "multiplier", "scan", "hardy", "evolution", "output"};

}  // namespace

RunConfig parse_config(const std::string& text)
{
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig c;
    std::vector<std::string> errors;
    FieldReader rd{c, errors};
    for (const auto& [name, node] : tree) {
        if (node.empty() && !kSections.count(name)) {
            apply_key("", name, node.data(), rd);
            continue;
        }
        for (const auto& [key, leaf] : node) {
            apply_key(name, key, leaf.data(), rd);
        }
    }
    if (!errors.empty()) {
        std::string msg = "configuration error:";
        for (const auto& e : errors) {
            msg += "\n  " + e;
        }
        throw ConfigError(msg);
    }
    c.validate();
    return c;
}

RunConfig load_config(const fs::path& path)
{
    std::ifstream f(path);
    if (!f) {
        throw ConfigError("cannot read config file " + path.string());
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string config_text(const RunConfig& c)
{
    std::ostringstream o;
    o << "mode = " << to_string(c.mode) << "\n";
    o << "seed = " << c.seed << "\n";
    o << "\n[background]\n";
    o << "d = " << join_ints(c.d) << "\n";
    o << "r_s = " << num(c.r_s) << "\n";
    o << "\n[multiplier]\n";
    o << "eps = " << num(c.eps) << "\n";
    o << "delta = " << num(c.delta) << "\n";
    o << "delta0 = " << num(c.delta0) << "\n";
    if (c.alpha) {
        o << "alpha = " << num(*c.alpha) << "\n";
    }
    o << "\n[scan]\n";
    o << "grid_points = " << c.grid_points << "\n";
    o << "refine = " << c.refine << "\n";
    o << "\n[hardy]\n";
    o << "bumps = " << c.hardy_bumps << "\n";
    o << "width = " << num(c.hardy_width) << "\n";
    o << "\n[evolution]\n";
    o << "ells = " << join_ints(c.ells) << "\n";
    o << "data = ";
    for (std::size_t i = 0; i < c.kinds.size(); ++i) {
        o << (i ? "," : "") << kind_name(c.kinds[i]);
    }
    o << "\n";
    o << "rstar_lo = " << num(c.rstar_lo) << "\n";
    o << "rstar_hi = " << num(c.rstar_hi) << "\n";
    o << "spacing = " << num(c.spacing) << "\n";
    o << "dt = " << num(c.dt) << "\n";
    o << "t_final = " << num(c.t_final) << "\n";
    o << "center_r = " << num(c.center_r) << "\n";
    o << "width = " << num(c.width) << "\n";
    o << "amplitude = " << num(c.amplitude) << "\n";
    o << "cadence = " << c.cadence << "\n";
    o << "track_identity = " << (c.track_identity ? "true" : "false") << "\n";
    o << "drift_tol = " << num(c.drift_tol) << "\n";
    // out_dir and threads do not change results and stay out of the hash
    return o.str();
}

std::string config_hash(const RunConfig& c)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config_text(c)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << h;
    return o.str();
}

// ---------------------------------------------------------------------------
// dispatch

namespace {

// Runs tasks on a few threads; the first exception (in task order) is rethrown.
void run_queue(std::vector<std::function<void()>>& tasks, int threads)
{
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    unsigned n = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
    {
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < n; ++k) {
            pool.emplace_back(worker);
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

class Writer {
public:
    explicit Writer(fs::path root) : root_(std::move(root)) {}

    fs::path write(const fs::path& rel, const std::string& body)
    {
        const fs::path p = root_ / rel;
        fs::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        f << body;
        if (!f) {
            throw NumericalError("cannot write " + p.string());
        }
        files_.push_back(p);
        return p;
    }
    const std::vector<fs::path>& files() const { return files_; }

private:
    fs::path root_;
    std::vector<fs::path> files_;
};

std::string samples_csv(const std::vector<ScanSample>& s)
{
    std::string out = "r,value,margin\n";
    for (const auto& x : s) {
        out += num(x.r) + "," + num(x.value) + "," + num(x.margin) + "\n";
    }
    return out;
}

json verdict_json(const CaseVerdict& v)
{
    json j;
    j["case"] = to_string(v.case_id);
    j["d"] = v.d;
    j["eps"] = v.params.eps;
    j["delta"] = v.params.delta;
    j["alpha"] = v.params.alpha;
    j["grid_size"] = v.grid_size;
    j["min_margin"] = v.min_margin;
    j["witness_r"] = v.witness_r;
    j["strict"] = v.strict;
    j["passed"] = v.passed;
    if (!v.detail.empty()) {
        j["detail"] = v.detail;
    }
    if (!v.sub_margins.empty()) {
        json sub = json::object();
        for (const auto& [k, x] : v.sub_margins) {
            sub[k] = x;
        }
        j["sub_margins"] = sub;
    }
    return j;
}

struct Context {
    const RunConfig& c;
    Writer& out;
    json& summary;
    std::vector<std::string>& failures;
};

void fail_verdict(Context& ctx, const CaseVerdict& v)
{
    if (!v.passed) {
        ctx.failures.push_back(to_string(v.case_id) + " d=" + std::to_string(v.d) + ": min margin " +
                               num(v.min_margin) + " at r = " + num(v.witness_r));
    }
}

void run_verify(Context& ctx)
{
    const auto& c = ctx.c;
    const auto& cases = scan_cases();
    std::vector<CaseVerdict> results(c.d.size() * cases.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < c.d.size(); ++i) {
        for (std::size_t k = 0; k < cases.size(); ++k) {
            tasks.emplace_back([&, i, k] {
                const auto bg = c.background(c.d[i]);
                const auto mp = c.multiplier(bg);
                const auto grid = grid_for_case(cases[k], bg, mp, c.grid_points);
                results[i * cases.size() + k] = verify_case(cases[k], bg, mp, grid, {c.refine, true});
            });
        }
    }
    run_queue(tasks, c.threads);
    json arr = json::array();
    for (const auto& v : results) {
        ctx.out.write(fs::path("verify") / ("d" + std::to_string(v.d) + "_" + to_string(v.case_id) + ".csv"),
                      samples_csv(v.samples));
        arr.push_back(verdict_json(v));
        fail_verdict(ctx, v);
    }
    ctx.summary["verify"] = arr;
}

void run_budget(Context& ctx)
{
    const auto& c = ctx.c;
    std::vector<CaseVerdict> results(c.d.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < c.d.size(); ++i) {
        tasks.emplace_back([&, i] {
            const auto bg = c.background(c.d[i]);
            const auto mp = c.multiplier(bg);
            results[i] = verify_budget(bg, mp, exterior_grid(bg, mp, c.grid_points), {c.refine, true});
        });
    }
    run_queue(tasks, c.threads);
    json arr = json::array();
    for (const auto& v : results) {
        ctx.out.write(fs::path("budget") / ("d" + std::to_string(v.d) + ".csv"), samples_csv(v.samples));
        arr.push_back(verdict_json(v));
        fail_verdict(ctx, v);
    }
    ctx.summary["budget"] = arr;
}

void run_hardy(Context& ctx)
{
    const auto& c = ctx.c;
    std::vector<HardyScan> results(c.d.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < c.d.size(); ++i) {
        tasks.emplace_back([&, i] {
            const auto bg = c.background(c.d[i]);
            HardyScanOptions opt;
            opt.bumps = c.hardy_bumps;
            opt.width = c.hardy_width;
            opt.seed = c.seed;
            results[i] = hardy_scan(bg, c.multiplier(bg), opt);
        });
    }
    run_queue(tasks, c.threads);
    json arr = json::array();
    for (const auto& s : results) {
        // value: hardy ratio; margin: slack in lhs <= 4 rhs_rho
        std::string csv = "r,value,margin\n";
        for (std::size_t k = 0; k < s.centers.size(); ++k) {
            csv += num(s.centers[k]) + "," + num(s.ratios[k]) + "," + num(1.0 - s.rho_bound_ratios[k]) + "\n";
        }
        ctx.out.write(fs::path("hardy") / ("d" + std::to_string(s.d) + ".csv"), csv);
        json j;
        j["d"] = s.d;
        j["ratio_min"] = s.ratio_min;
        j["ratio_max"] = s.ratio_max;
        j["family_ratio"] = s.ratio_max / s.ratio_min;
        j["blow_up_trend"] = s.blow_up_trend;
        j["near_extension"] = s.near_extension;
        j["far_extension"] = s.far_extension;
        j["rho_far_spread"] = s.far_spread;
        j["rho_near_spread"] = s.near_spread;
        j["weight_far_spread"] = s.weight_far_spread;
        j["weight_near_spread"] = s.weight_near_spread;
        j["time_ratio_max"] = s.time_ratios.empty() ? 0.0 : *std::max_element(s.time_ratios.begin(), s.time_ratios.end());
        j["passed"] = s.passed;
        arr.push_back(j);
        if (!s.passed) {
            ctx.failures.push_back("hardy d=" + std::to_string(s.d) + ": family ratio " +
                                   num(s.ratio_max / s.ratio_min) + (s.blow_up_trend ? ", blow-up trend" : ""));
        }
    }
    ctx.summary["hardy"] = arr;
}

void run_evolve(Context& ctx)
{
    const auto& c = ctx.c;
    struct Job {
        int d;
        DataKind kind;
        int ell;
    };
    std::vector<Job> jobs;
    for (int d : c.d) {
        for (DataKind k : c.kinds) {
            for (int ell : c.ells) {
                jobs.push_back({d, k, ell});
            }
        }
    }
    std::vector<EnergyLeSeries> results(jobs.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        tasks.emplace_back([&, i] { results[i] = evolve_mode(c.evolution(jobs[i].d, jobs[i].kind), jobs[i].ell); });
    }
    run_queue(tasks, c.threads);
    json arr = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& s = results[i];
        const bool track = !s.base_residual.empty();
        std::string csv = track ? "t,energy,le_accum,base_residual\n" : "t,energy,le_accum\n";
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            csv += num(s.times[k]) + "," + num(s.energy[k]) + "," + num(s.le_accum[k]);
            if (track) {
                csv += "," + num(s.base_residual[k]);
            }
            csv += "\n";
        }
        const std::string stem =
            "d" + std::to_string(jobs[i].d) + "_l" + std::to_string(s.ell) + "_" + kind_name(s.kind);
        ctx.out.write(fs::path("evolve") / (stem + ".csv"), csv);
        const bool passed = s.max_drift <= c.drift_tol && !s.contaminated;
        json j;
        j["d"] = jobs[i].d;
        j["ell"] = s.ell;
        j["data"] = kind_name(s.kind);
        j["e0"] = s.e0;
        j["sup_energy"] = s.sup_energy;
        j["max_drift"] = s.max_drift;
        j["le_final"] = s.le_accum.empty() ? 0.0 : s.le_accum.back();
        j["bound_ratio"] = s.bound_ratio();
        if (track) {
            j["base_residual"] = s.base_residual.back();
        }
        j["contaminated"] = s.contaminated;
        if (s.contaminated) {
            j["contamination_time"] = s.contamination_time;
        }
        j["warnings"] = s.warnings;
        j["passed"] = passed;
        arr.push_back(j);
        if (!passed) {
            ctx.failures.push_back("evolve " + stem + ": drift " + num(s.max_drift) +
                                   (s.contaminated ? ", boundary contamination" : ""));
        }
    }
    ctx.summary["evolve"] = arr;
}

std::string utc_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream o;
    o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return o.str();
}

}  // namespace

RunResult run(const RunConfig& c)
{
    RunResult res;
    const auto start = std::chrono::steady_clock::now();
    Writer out(c.out_dir);
    json summary;
    summary["tool"] = "lemult";
    summary["version"] = code_version();
    summary["config_hash"] = config_hash(c);
    summary["mode"] = to_string(c.mode);
    Context ctx{c, out, summary, res.failures};
    std::string error;
    try {
        c.validate();
        const bool all = c.mode == Mode::all;
        if (all || c.mode == Mode::verify) {
            run_verify(ctx);
        }
        if (all || c.mode == Mode::budget) {
            run_budget(ctx);
        }
        if (all || c.mode == Mode::hardy) {
            run_hardy(ctx);
        }
        if (all || c.mode == Mode::evolve) {
            run_evolve(ctx);
        }
        res.exit_code = res.failures.empty() ? kExitOk : kExitCheckFailed;
    } catch (const ConfigError& e) {
        res.exit_code = kExitConfig;
        error = e.what();
    } catch (const DomainError& e) {
        res.exit_code = kExitConfig;
        error = e.what();
    } catch (const std::exception& e) {
        res.exit_code = kExitNumerical;
        error = e.what();
    }
    summary["passed"] = res.exit_code == kExitOk;
    summary["exit_code"] = res.exit_code;
    summary["failures"] = res.failures;
    if (!error.empty()) {
        summary["error"] = error;
    }
    res.summary = summary.dump(2) + "\n";
    try {
        out.write("summary.json", res.summary);
        out.write("config.ini", config_text(c));
        json info;
        info["config_hash"] = config_hash(c);
        info["version"] = code_version();
        info["timestamp"] = utc_now();
        info["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.write("run_info.json", info.dump(2) + "\n");
    } catch (const std::exception& e) {
        res.exit_code = kExitNumerical;
        res.failures.push_back(e.what());
    }
    res.files = out.files();
    return res;
}

}  // namespace lemult
