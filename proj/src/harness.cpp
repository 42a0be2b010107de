// SPDX-License-Identifier: Apache-2.0
#include "isac/harness.hpp"
#include "isac/linalg.hpp"
#include "isac/matching.hpp"
#include "isac/report.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace isac
{
namespace
{
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const ManifoldAxis &axis_of(const JointAxes &ax, AxisKind k)
{
    switch (k)
    {
    case AxisKind::Angle:
        return ax.angle;
    case AxisKind::Delay:
        return ax.delay;
    case AxisKind::Doppler:
        return ax.doppler;
    }
    return ax.angle;
}

CMatrix reshape(const SensingTensor &y, AxisKind k)
{
    switch (k)
    {
    case AxisKind::Angle:
        return reshape_angle(y);
    case AxisKind::Delay:
        return reshape_delay(y);
    case AxisKind::Doppler:
        return reshape_doppler(y);
    }
    return {};
}

Eigen::Index axis_len(const ArrayGeometry &g, const OfdmConfig &o, AxisKind k)
{
    switch (k)
    {
    case AxisKind::Angle:
        return static_cast<Eigen::Index>(g.num_elements);
    case AxisKind::Delay:
        return static_cast<Eigen::Index>(o.num_subcarriers);
    case AxisKind::Doppler:
        return static_cast<Eigen::Index>(o.num_symbols);
    }
    return 0;
}

// (angle, tau, doppler) of every target.
std::vector<std::array<double, 3>> truth_triples(const Scene &s, const OfdmConfig &o)
{
    std::vector<std::array<double, 3>> out;
    for (const Target &t : s.targets)
    {
        const DelayDoppler dd = target_delay_doppler(t, s.carrier, o);
        out.push_back({t.angle_deg, dd.tau_s, dd.doppler_hz});
    }
    return out;
}

std::vector<double> unique_values(std::vector<double> v, double tol)
{
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || std::abs(x - out.back()) > tol)
            out.push_back(x);
    return out;
}

Eigen::Index next_pow2(Eigen::Index n)
{
    Eigen::Index p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

// One-domain estimate with exactly K values. The periodogram is evaluated from
// the sample covariance, which gives the same spectrum at a fraction of the cost
// when snapshots outnumber rows.
std::vector<double> estimate_1d(const CMatrix &X, const ManifoldAxis &axis, Algorithm1D alg, Eigen::Index K,
                                const FrameworkConfig &cfg)
{
    if (alg == Algorithm1D::Periodogram && X.cols() >= X.rows())
    {
        const Eigen::Index idx = static_cast<Eigen::Index>(axis.kind);
        const Eigen::Index n = cfg.n_fft[static_cast<std::size_t>(idx)] > 0 ? cfg.n_fft[static_cast<std::size_t>(idx)]
                                                                            : 16 * next_pow2(X.rows());
        const Spectrum1D s = periodogram_cov(sample_covariance(X), axis, n);
        return find_peaks(s, static_cast<std::size_t>(K), {1, true, 0.0}).params();
    }
    return estimate_axis(X, axis, alg, K, cfg, K).values;
}

bool is_estimation_failure(const std::exception_ptr &e)
{
    try
    {
        std::rethrow_exception(e);
    }
    catch (const EstimationError &)
    {
        return true;
    }
    catch (const DomainError &)
    {
        return true;
    }
    catch (...)
    {
        return false;
    }
}

struct TrialOut
{
    bool failed = false;
    std::array<double, 3> sq{0.0, 0.0, 0.0};
    std::array<std::size_t, 3> n{0, 0, 0};
    std::size_t matched = 0;
    std::size_t truths = 0;
    bool success = false;
};

void finish_row(ResultRow &row, const std::vector<TrialOut> &trials)
{
    std::array<double, 3> sq{0.0, 0.0, 0.0};
    std::array<std::size_t, 3> n{0, 0, 0};
    std::size_t matched = 0, truths = 0, ok = 0;
    for (const TrialOut &t : trials)
    {
        if (t.failed)
        {
            ++row.failures;
            continue;
        }
        for (std::size_t d = 0; d < 3; ++d)
        {
            sq[d] += t.sq[d];
            n[d] += t.n[d];
        }
        matched += t.matched;
        truths += t.truths;
        ok += t.success ? 1 : 0;
    }
    row.trials = trials.size();
    for (std::size_t d = 0; d < 3; ++d)
        if (n[d] > 0)
            row.rmse[d] = std::sqrt(sq[d] / static_cast<double>(n[d]));
    row.match_rate = truths ? static_cast<double>(matched) / static_cast<double>(truths) : 0.0;
    row.probability = row.trials ? static_cast<double>(ok) / static_cast<double>(row.trials) : 0.0;
    if (row.failures > 0)
    {
        const double frac = static_cast<double>(row.failures) / static_cast<double>(row.trials);
        if (frac > 0.05)
        {
            row.valid = false;
            row.note = std::to_string(row.failures) + " estimator failures (above 5%), point invalid";
        }
        else
            row.note = std::to_string(row.failures) + " estimator failures excluded";
    }
}

std::string csv_number(double v)
{
    if (std::isnan(v))
        return "nan";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}
} // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)> &fn)
{
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (;;)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= n)
                    return;
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!first)
                        first = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto &t : pool)
        t.join();
    if (first)
        std::rethrow_exception(first);
}

ExperimentKind parse_experiment(const std::string &s)
{
    for (ExperimentKind k : {ExperimentKind::RmseSweep, ExperimentKind::ResolutionSweep, ExperimentKind::SpectrumDump,
                             ExperimentKind::ComplexityBench, ExperimentKind::NearFieldSuite})
        if (s == experiment_name(k))
            return k;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

const char *experiment_name(ExperimentKind k)
{
    switch (k)
    {
    case ExperimentKind::RmseSweep:
        return "rmse";
    case ExperimentKind::ResolutionSweep:
        return "resolution";
    case ExperimentKind::SpectrumDump:
        return "spectrum";
    case ExperimentKind::ComplexityBench:
        return "complexity";
    case ExperimentKind::NearFieldSuite:
        return "nearfield";
    }
    return "?";
}

std::vector<double> ExperimentSpec::snr_points() const
{
    std::vector<double> out;
    if (!(snr_step_db > 0.0))
        return {snr_start_db};
    for (double s = snr_start_db; s <= snr_stop_db + 1e-9 * snr_step_db; s += snr_step_db)
        out.push_back(s);
    return out;
}

void ExperimentSpec::validate() const
{
    if (trials < 1)
        throw std::invalid_argument("ExperimentSpec: trials must be at least 1");
    if (snr_points().empty())
        throw std::invalid_argument("ExperimentSpec: empty SNR sweep");
    if (kind == ExperimentKind::ResolutionSweep && separations.empty())
        throw std::invalid_argument("ExperimentSpec: empty separation sweep");
    if (kind == ExperimentKind::ResolutionSweep && scene.targets.size() < 2)
        throw std::invalid_argument("ExperimentSpec: resolution sweep needs two base targets");
    if (scene.targets.empty())
        throw std::invalid_argument("ExperimentSpec: scene has no targets");
    framework.validate();
}

ExperimentSpec experiment_from_config(const ConfigDocument &doc)
{
    ExperimentSpec s;
    s.scene = scene_from_config(doc);
    s.ofdm = ofdm_from_config(doc);
    s.framework = framework_from_config(doc);
    const ConfigTable &e = doc.table("experiment");
    if (e.has("kind"))
        s.kind = parse_experiment(e.string("kind", ""));
    if (e.has("model"))
        s.model = parse_model(e.string("model", "far"));
    s.snr_start_db = e.number("snr_start", s.snr_start_db);
    s.snr_stop_db = e.number("snr_stop", s.snr_stop_db);
    s.snr_step_db = e.number("snr_step", s.snr_step_db);
    s.trials = static_cast<std::size_t>(e.number("trials", static_cast<double>(s.trials)));
    s.seed = static_cast<std::uint64_t>(e.number("seed", static_cast<double>(seed_from_config(doc, s.seed))));
    s.threads = static_cast<unsigned>(e.number("threads", s.threads));
    s.one_domain = e.string("mode", "one-domain") != "framework";
    if (e.has("axis"))
        s.axis = parse_axis(e.string("axis", "angle"));
    if (e.has("algorithm"))
        s.algorithm = parse_algorithm(e.string("algorithm", "periodogram"));
    s.separations = e.numbers("separations", s.separations);
    s.gate = e.number("gate", s.gate);
    s.validate();
    return s;
}

nlohmann::json spec_to_json(const ExperimentSpec &s)
{
    nlohmann::json j;
    j["kind"] = experiment_name(s.kind);
    j["model"] = model_name(s.model);
    j["array"] = {{"num_elements", s.scene.array.num_elements},
                  {"spacing_wavelengths", s.scene.array.spacing_wavelengths},
                  {"reference", s.scene.array.reference == ArrayReference::FirstElement ? "first" : "center"}};
    j["carrier_hz"] = s.scene.carrier.frequency_hz;
    for (const Target &t : s.scene.targets)
        j["targets"].push_back({{"angle_deg", t.angle_deg},
                                {"range_m", t.range_m},
                                {"velocity_mps", t.velocity_mps},
                                {"gain_re", t.gain.real()},
                                {"gain_im", t.gain.imag()}});
    j["ofdm"] = {{"num_subcarriers", s.ofdm.num_subcarriers},
                 {"num_symbols", s.ofdm.num_symbols},
                 {"subcarrier_spacing_hz", s.ofdm.subcarrier_spacing_hz},
                 {"cp_ratio", s.ofdm.cp_ratio}};
    j["framework"] = {{"framework", framework_name(s.framework.framework)},
                      {"angle_alg", algorithm_name(s.framework.algorithms[0])},
                      {"delay_alg", algorithm_name(s.framework.algorithms[1])},
                      {"doppler_alg", algorithm_name(s.framework.algorithms[2])},
                      {"detection_threshold", s.framework.detection_threshold}};
    j["snr"] = {s.snr_start_db, s.snr_stop_db, s.snr_step_db};
    j["trials"] = s.trials;
    j["seed"] = s.seed;
    j["mode"] = s.one_domain ? "one-domain" : "framework";
    j["axis"] = axis_name(s.axis);
    j["algorithm"] = algorithm_name(s.algorithm);
    if (!s.separations.empty())
        j["separations"] = s.separations;
    j["gate"] = s.gate;
    return j;
}

void write_result_csv(std::ostream &os, const ResultTable &t, bool with_wall_time)
{
    os << t.x_name << ",rmse_angle_deg,rmse_delay_s,rmse_doppler_hz,probability,match_rate,trials,failures,valid,label";
    if (with_wall_time)
        os << ",wall_s";
    os << '\n';
    for (const ResultRow &r : t.rows)
    {
        os << csv_number(r.x) << ',' << csv_number(r.rmse[0]) << ',' << csv_number(r.rmse[1]) << ','
           << csv_number(r.rmse[2]) << ',' << csv_number(r.probability) << ',' << csv_number(r.match_rate) << ','
           << r.trials << ',' << r.failures << ',' << (r.valid ? 1 : 0) << ',' << t.label;
        if (with_wall_time)
            os << ',' << csv_number(r.wall_s);
        os << '\n';
    }
}

SensingTensor trial_tensor(const Scene &scene, const OfdmConfig &ofdm, SteeringKind model, std::optional<double> snr_db,
                           std::uint64_t seed, std::uint64_t stream)
{
    const std::uint64_t s = derive_seed(seed, stream);
    const SymbolGrid b = random_qpsk(ofdm, derive_seed(s, 1));
    return strip_symbols(synthesize(scene, ofdm, b, model, snr_db, derive_seed(s, 2)), b);
}

ResultTable run_rmse_sweep(const ExperimentSpec &spec)
{
    spec.validate();
    const auto snrs = spec.snr_points();
    const std::size_t T = spec.trials;
    const JointAxes ax = JointAxes::from(spec.scene.array, spec.ofdm);
    const auto truth = truth_triples(spec.scene, spec.ofdm);
    std::array<double, 3> cell{};
    for (AxisKind k : {AxisKind::Angle, AxisKind::Delay, AxisKind::Doppler})
        cell[static_cast<std::size_t>(k)] =
            axis_of(ax, k).resolution(axis_len(spec.scene.array, spec.ofdm, k));

    std::vector<std::vector<double>> axis_truth;
    const std::size_t d = static_cast<std::size_t>(spec.axis);
    if (spec.one_domain)
    {
        std::vector<double> v;
        for (const auto &t : truth)
            v.push_back(t[d]);
        for (double x : unique_values(v, 1e-9 * cell[d]))
            axis_truth.push_back({x});
    }
    std::vector<std::vector<double>> full_truth;
    for (const auto &t : truth)
        full_truth.push_back({t[0], t[1], t[2]});

    std::vector<TrialOut> out(snrs.size() * T);
    std::vector<double> wall(snrs.size() * T, 0.0);
    parallel_for(out.size(), spec.threads, [&](std::size_t i) {
        const auto t0 = Clock::now();
        const double snr = snrs[i / T];
        TrialOut &o = out[i];
        const SensingTensor y = trial_tensor(spec.scene, spec.ofdm, spec.model, snr, spec.seed, i);
        try
        {
            if (spec.one_domain)
            {
                const CMatrix X = reshape(y, spec.axis);
                const auto vals = estimate_1d(X, axis_of(ax, spec.axis), spec.algorithm,
                                              static_cast<Eigen::Index>(axis_truth.size()), spec.framework);
                std::vector<std::vector<double>> est;
                for (double v : vals)
                    est.push_back({v});
                const MatchResult m = match_to_truth(est, axis_truth, {cell[d]});
                for (const auto &e : m.errors)
                {
                    o.sq[d] += e[0] * e[0];
                    ++o.n[d];
                }
                o.matched = m.pairs.size();
                o.truths = axis_truth.size();
            }
            else
            {
                const EstimateSet es =
                    run_framework(y, ax, spec.framework, static_cast<Eigen::Index>(spec.scene.targets.size()));
                std::vector<std::vector<double>> est;
                for (const TripleEstimate &t : es.triples)
                    est.push_back({t.angle_deg, t.tau_s, t.doppler_hz});
                const MatchResult m = match_to_truth(est, full_truth, {cell[0], cell[1], cell[2]});
                for (const auto &e : m.errors)
                    for (std::size_t k = 0; k < 3; ++k)
                    {
                        o.sq[k] += e[k] * e[k];
                        ++o.n[k];
                    }
                o.matched = m.pairs.size();
                o.truths = full_truth.size();
            }
        }
        catch (...)
        {
            if (!is_estimation_failure(std::current_exception()))
                throw;
            o.failed = true;
        }
        wall[i] = seconds_since(t0);
    });

    ResultTable table;
    table.x_name = "snr_db";
    table.label = spec.one_domain ? std::string(axis_name(spec.axis)) + ":" + algorithm_name(spec.algorithm)
                                  : std::string(framework_name(spec.framework.framework));
    for (std::size_t p = 0; p < snrs.size(); ++p)
    {
        ResultRow row;
        row.x = snrs[p];
        const std::vector<TrialOut> slice(out.begin() + static_cast<std::ptrdiff_t>(p * T),
                                          out.begin() + static_cast<std::ptrdiff_t>((p + 1) * T));
        finish_row(row, slice);
        for (std::size_t t = 0; t < T; ++t)
            row.wall_s += wall[p * T + t];
        table.rows.push_back(row);
    }
    return table;
}

Scene resolution_scene(const Scene &base, const Carrier &carrier, const OfdmConfig &ofdm, AxisKind axis,
                       double separation)
{
    if (base.targets.size() < 2)
        throw std::invalid_argument("resolution_scene: need two base targets");
    Scene s = base;
    s.carrier = carrier;
    s.targets.resize(2);
    Target &a = s.targets[0];
    Target &b = s.targets[1];
    switch (axis)
    {
    case AxisKind::Angle:
        a.angle_deg = 0.0;
        b.angle_deg = separation;
        break;
    case AxisKind::Delay:
        b.range_m = a.range_m + range_from_delay(separation);
        break;
    case AxisKind::Doppler:
        b.velocity_mps = a.velocity_mps + velocity_from_doppler(separation, carrier);
        break;
    }
    (void)ofdm;
    return s;
}

ResultTable run_resolution_sweep(const ExperimentSpec &spec)
{
    spec.validate();
    const std::size_t T = spec.trials;
    const double snr = spec.snr_start_db;
    const JointAxes ax = JointAxes::from(spec.scene.array, spec.ofdm);
    const ManifoldAxis &axis = axis_of(ax, spec.axis);
    const std::size_t d = static_cast<std::size_t>(spec.axis);
    const double cell = axis.resolution(axis_len(spec.scene.array, spec.ofdm, spec.axis));
    const auto &seps = spec.separations;

    std::vector<TrialOut> out(seps.size() * T);
    std::vector<double> wall(out.size(), 0.0);
    parallel_for(out.size(), spec.threads, [&](std::size_t i) {
        const auto t0 = Clock::now();
        const double sep = seps[i / T];
        TrialOut &o = out[i];
        const Scene scene = resolution_scene(spec.scene, spec.scene.carrier, spec.ofdm, spec.axis, sep);
        const auto truth3 = truth_triples(scene, spec.ofdm);
        const std::vector<std::vector<double>> truth{{truth3[0][d]}, {truth3[1][d]}};
        const SensingTensor y = trial_tensor(scene, spec.ofdm, spec.model, snr, spec.seed, i);
        o.truths = 2;
        try
        {
            const auto vals = estimate_1d(reshape(y, spec.axis), axis, spec.algorithm, 2, spec.framework);
            std::vector<std::vector<double>> est;
            for (double v : vals)
                est.push_back({v});
            const MatchResult m = match_to_truth(est, truth, {cell});
            double sq = 0.0;
            for (const auto &e : m.errors)
                sq += e[0] * e[0];
            o.sq[d] = sq;
            o.n[d] = m.errors.size();
            o.matched = m.pairs.size();
            const double rmse = m.errors.empty() ? INFINITY : std::sqrt(sq / static_cast<double>(m.errors.size()));
            o.success = vals.size() == 2 && m.pairs.size() == 2 && rmse <= spec.gate;
        }
        catch (...)
        {
            if (!is_estimation_failure(std::current_exception()))
                throw;
            o.failed = true;
        }
        wall[i] = seconds_since(t0);
    });

    ResultTable table;
    table.x_name = "separation";
    table.label = std::string(axis_name(spec.axis)) + ":" + algorithm_name(spec.algorithm);
    for (std::size_t p = 0; p < seps.size(); ++p)
    {
        ResultRow row;
        row.x = seps[p];
        const std::vector<TrialOut> slice(out.begin() + static_cast<std::ptrdiff_t>(p * T),
                                          out.begin() + static_cast<std::ptrdiff_t>((p + 1) * T));
        finish_row(row, slice);
        // failed trials count as unresolved
        std::size_t ok = 0;
        for (const TrialOut &t : slice)
            ok += (!t.failed && t.success) ? 1 : 0;
        row.probability = static_cast<double>(ok) / static_cast<double>(T);
        row.valid = true;
        for (std::size_t t = 0; t < T; ++t)
            row.wall_s += wall[p * T + t];
        table.rows.push_back(row);
    }
    return table;
}

double transition_point(const ResultTable &t, double level)
{
    const auto &r = t.rows;
    if (r.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::ptrdiff_t last_below = -1;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i].probability < level)
            last_below = static_cast<std::ptrdiff_t>(i);
    if (last_below < 0)
        return r.front().x;
    if (static_cast<std::size_t>(last_below) + 1 >= r.size())
        return std::numeric_limits<double>::quiet_NaN();
    const ResultRow &a = r[static_cast<std::size_t>(last_below)];
    const ResultRow &b = r[static_cast<std::size_t>(last_below) + 1];
    const double f = (level - a.probability) / (b.probability - a.probability);
    return a.x + f * (b.x - a.x);
}

Scene five_target_scene()
{
    Scene s = reference_scene();
    s.targets = {{-20.0, 20.0, 8.0, {1.0, 0.0}},
                 {10.0, 45.0, 14.0, {1.0, 0.0}},
                 {10.0, 80.0, 20.0, {1.0, 0.0}},
                 {45.0, 60.0, 6.0, {1.0, 0.0}},
                 {45.0, 45.0, 12.0, {1.0, 0.0}}};
    return s;
}

Scene rmse_scene()
{
    Scene s = reference_scene();
    s.targets = {{-20.0, 20.0, 8.0, {1.0, 0.0}}, {10.0, 80.0, 24.0, {1.0, 0.0}}, {45.0, 50.0, 40.0, {1.0, 0.0}}};
    return s;
}

Scene equal_angle_scene()
{
    Scene s = reference_scene();
    for (Target &t : s.targets)
        t.angle_deg = 10.0;
    return s;
}

Scene close_angle_scene()
{
    Scene s = reference_scene();
    const double a[3] = {-5.0, 0.0, 10.0};
    for (std::size_t i = 0; i < 3; ++i)
        s.targets[i].angle_deg = a[i];
    return s;
}

nearfield::NearFieldResult run_nearfield_algorithm(const std::string &alg, const CMatrix &X, const ArrayGeometry &geom,
                                                   const Carrier &carrier, Eigen::Index K,
                                                   const NearFieldSuiteSpec &g)
{
    using namespace nearfield;
    DecoupledOptions opt;
    const auto n_ang = static_cast<std::size_t>(std::lround(2.0 * g.angle_span_deg / g.angle_step_deg)) + 1;
    opt.angles_deg = linspace(-g.angle_span_deg, g.angle_span_deg, n_ang);
    opt.ranges_m = default_ranges(geom, carrier, g.range_points);
    NearFieldGrid coarse;
    const auto n_coarse = static_cast<std::size_t>(std::lround(2.0 * g.angle_span_deg / g.coarse_angle_step_deg)) + 1;
    coarse.angles_deg = linspace(-g.angle_span_deg, g.angle_span_deg, n_coarse);
    coarse.ranges_m = opt.ranges_m;
    const GridSearch2D search{coarse, 0.05, 0.1};

    if (alg == "soc")
        return soc_estimate(X, geom, carrier, K, opt);
    if (alg == "mod-music")
    {
        const Eigen::Index J = static_cast<Eigen::Index>(geom.num_elements - 1) / 2;
        const Eigen::Index L = g.mod_music_L > 0 ? g.mod_music_L : std::max<Eigen::Index>(K + 1, J / 2);
        return modified_music(X, geom, carrier, K, L, opt);
    }
    const CovarianceBundle b = make_bundle(X, K);
    if (alg == "bf2d")
        return bf2d_estimate(b.R, geom, carrier, K, search);
    if (alg == "music2d")
        return music2d_estimate(b, geom, carrier, search);
    if (alg == "rr")
        return rr_estimate(b, geom, carrier, opt);
    if (alg == "rd")
        return rd_estimate(b, geom, carrier, opt);
    if (alg == "fft-enhanced")
    {
        NearFieldGrid grid{opt.angles_deg, opt.ranges_m};
        return fft_enhanced(b, geom, carrier, grid);
    }
    if (alg == "gen-esprit")
    {
        const Eigen::Index J = static_cast<Eigen::Index>(geom.num_elements - 1) / 2;
        return generalized_esprit(b, geom, carrier, opt, dft_selection(J, K));
    }
    if (alg == "gen-esprit-identity")
        return generalized_esprit(b, geom, carrier, opt);
    throw std::invalid_argument("unknown near-field algorithm '" + alg + "'");
}

std::vector<NearFieldRow> run_nearfield_suite(const NearFieldSuiteSpec &spec)
{
    if (spec.trials < 1 || spec.snr_db.empty() || spec.algorithms.empty())
        throw std::invalid_argument("run_nearfield_suite: empty sweep");
    Scene scene;
    scene.array = spec.geom;
    scene.carrier = spec.carrier;
    scene.targets = {{spec.angle_deg, spec.range_m, 0.0, {1.0, 0.0}}};
    const std::size_t T = spec.trials, A = spec.algorithms.size();

    struct Out
    {
        bool failed = false;
        bool flagged = false;
        double ea = 0.0, er = 0.0, secs = 0.0;
    };
    std::vector<Out> out(spec.snr_db.size() * T * A);
    parallel_for(spec.snr_db.size() * T, spec.threads, [&](std::size_t i) {
        const SensingTensor y =
            trial_tensor(scene, spec.ofdm, SteeringKind::NearFieldExact, spec.snr_db[i / T], spec.seed, i);
        const CMatrix X = reshape_angle(y);
        for (std::size_t a = 0; a < A; ++a)
        {
            Out &o = out[i * A + a];
            const auto t0 = Clock::now();
            try
            {
                const auto r = run_nearfield_algorithm(spec.algorithms[a], X, spec.geom, spec.carrier, 1, spec);
                if (r.estimates.empty() || !std::isfinite(r.estimates[0].angle_deg) ||
                    !std::isfinite(r.estimates[0].range_m))
                    o.failed = true;
                else
                {
                    o.ea = r.estimates[0].angle_deg - spec.angle_deg;
                    o.er = r.estimates[0].range_m - spec.range_m;
                }
                o.flagged = r.flagged;
            }
            catch (...)
            {
                if (!is_estimation_failure(std::current_exception()))
                    throw;
                o.failed = true;
            }
            o.secs = seconds_since(t0);
        }
    });

    std::vector<NearFieldRow> rows;
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t s = 0; s < spec.snr_db.size(); ++s)
        {
            NearFieldRow r;
            r.algorithm = spec.algorithms[a];
            r.snr_db = spec.snr_db[s];
            r.trials = T;
            double sa = 0.0, sr = 0.0;
            std::size_t n = 0;
            for (std::size_t t = 0; t < T; ++t)
            {
                const Out &o = out[(s * T + t) * A + a];
                r.wall_s += o.secs;
                r.flagged += o.flagged ? 1 : 0;
                if (o.failed)
                {
                    ++r.failures;
                    continue;
                }
                sa += o.ea * o.ea;
                sr += o.er * o.er;
                ++n;
            }
            r.rmse_angle_deg = n ? std::sqrt(sa / static_cast<double>(n)) : std::numeric_limits<double>::quiet_NaN();
            r.rmse_range_m = n ? std::sqrt(sr / static_cast<double>(n)) : std::numeric_limits<double>::quiet_NaN();
            r.valid = static_cast<double>(r.failures) <= 0.05 * static_cast<double>(T);
            rows.push_back(r);
        }
    return rows;
}

void write_nearfield_csv(std::ostream &os, const std::vector<NearFieldRow> &rows, bool with_wall_time)
{
    os << "algorithm,snr_db,rmse_angle_deg,rmse_range_m,trials,failures,flagged,valid";
    if (with_wall_time)
        os << ",wall_s";
    os << '\n';
    for (const NearFieldRow &r : rows)
    {
        os << r.algorithm << ',' << csv_number(r.snr_db) << ',' << csv_number(r.rmse_angle_deg) << ','
           << csv_number(r.rmse_range_m) << ',' << r.trials << ',' << r.failures << ',' << r.flagged << ','
           << (r.valid ? 1 : 0);
        if (with_wall_time)
            os << ',' << csv_number(r.wall_s);
        os << '\n';
    }
}

std::vector<BenchRow> bench_1d(const std::vector<double> &sizes, std::size_t repeats)
{
    std::vector<BenchRow> rows;
    const Algorithm1D algs[] = {Algorithm1D::Periodogram, Algorithm1D::Music,    Algorithm1D::PmMusic,
                                Algorithm1D::FftMusic,    Algorithm1D::RootMusic, Algorithm1D::EspritLS,
                                Algorithm1D::EspritTLS,   Algorithm1D::PmEsprit, Algorithm1D::Omp};
    FrameworkConfig cfg;
    for (double Md : sizes)
    {
        Scene s = reference_scene();
        s.array.num_elements = static_cast<std::size_t>(Md);
        const OfdmConfig o = reference_ofdm();
        const SensingTensor y = trial_tensor(s, o, SteeringKind::FarField, 10.0, 1, 0);
        const CMatrix X = reshape_angle(y);
        const ManifoldAxis axis = ManifoldAxis::angle(s.array.spacing_wavelengths);
        complexity::Params1D p;
        p.M = Md;
        p.Q = static_cast<double>(X.cols());
        for (Algorithm1D a : algs)
        {
            BenchRow r;
            r.algorithm = algorithm_name(a);
            r.M = Md;
            r.theoretical = complexity::ops_1d(a, p);
            const auto t0 = Clock::now();
            for (std::size_t k = 0; k < repeats; ++k)
                (void)estimate_axis(X, axis, a, 3, cfg, 3);
            r.seconds = seconds_since(t0) / static_cast<double>(std::max<std::size_t>(repeats, 1));
            rows.push_back(r);
        }
    }
    return rows;
}

void write_bench_csv(std::ostream &os, const std::vector<BenchRow> &rows)
{
    os << "algorithm,M,theoretical_ops,seconds\n";
    for (const BenchRow &r : rows)
        os << r.algorithm << ',' << r.M << ',' << complexity::format_ops(r.theoretical) << ','
           << csv_number(r.seconds) << '\n';
}
} // namespace isac
