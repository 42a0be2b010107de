// SPDX-License-Identifier: Apache-2.0
// Figure recipes: each binds a scenario, runs it and writes CSV, raster and a
// manifest into the output directory.
#include "isac/harness.hpp"
#include "isac/linalg.hpp"
#include "isac/report.hpp"

#include <fstream>
#include <functional>
#include <map>

namespace isac
{
namespace
{
struct Ctx
{
    ReproduceOptions opt;
    std::string id;
    std::vector<std::string> files;

    std::string path(const std::string &suffix) const { return opt.out_dir + "/" + id + suffix; }

    std::ofstream open(const std::string &suffix)
    {
        const std::string p = path(suffix);
        std::ofstream f(p);
        if (!f)
            throw std::runtime_error("cannot write " + p);
        files.push_back(p);
        return f;
    }

    void add(const std::string &suffix) { files.push_back(path(suffix)); }

    std::size_t trials(std::size_t fallback) const { return opt.trials > 0 ? opt.trials : fallback; }

    void manifest(nlohmann::json params)
    {
        params["figure"] = id;
        params["seed"] = opt.seed;
        write_manifest(path("_manifest.json"), params);
        add("_manifest.json");
    }
};

nlohmann::json scene_json(const Scene &s)
{
    ExperimentSpec e;
    e.scene = s;
    return spec_to_json(e)["targets"];
}

SensingTensor noisy(const Scene &s, const OfdmConfig &o, SteeringKind model, double snr, std::uint64_t seed)
{
    return trial_tensor(s, o, model, snr, seed, 0);
}

void spectrum_files(Ctx &c, const std::string &tag, const Spectrum1D &s, std::size_t K)
{
    {
        auto f = c.open("_" + tag + "_spectrum.csv");
        write_spectrum_csv(f, s);
    }
    {
        auto f = c.open("_" + tag + "_peaks.csv");
        write_peaks_csv(f, find_peaks(s, K));
    }
    write_series_ppm(c.path("_" + tag + ".ppm"), s.grid, {s.power});
    c.add("_" + tag + ".ppm");
}

void angle_1d(Ctx &c, const Scene &s, Algorithm1D alg, const std::string &tag)
{
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = noisy(s, o, SteeringKind::FarField, 10.0, c.opt.seed);
    const CMatrix X = reshape_angle(y);
    const ManifoldAxis axis = ManifoldAxis::angle(s.array.spacing_wavelengths);
    const auto K = static_cast<Eigen::Index>(s.targets.size());
    const auto grid = axis.default_grid(X.rows());
    if (alg == Algorithm1D::Periodogram)
        spectrum_files(c, tag, periodogram(X, axis, 1024), s.targets.size());
    else if (alg == Algorithm1D::Music)
        spectrum_files(c, tag, music(X, axis, K, grid), s.targets.size());
    else
    {
        const OmpResult r = omp(X, axis, K, grid);
        auto f = c.open("_" + tag + "_peaks.csv");
        f << "rank,param,power\n";
        for (std::size_t i = 0; i < r.params.size(); ++i)
            f << i << ',' << r.params[i] << ',' << r.gains[i] * r.gains[i] << '\n';
    }
}

void fig8(Ctx &c)
{
    angle_1d(c, reference_scene(), Algorithm1D::Periodogram, "periodogram");
    c.manifest({{"targets", scene_json(reference_scene())}, {"snr_db", 10}, {"n_fft", 1024}});
}

void fig9(Ctx &c)
{
    angle_1d(c, reference_scene(), Algorithm1D::Music, "music");
    c.manifest({{"targets", scene_json(reference_scene())}, {"snr_db", 10}, {"grid_step_deg", 0.1}});
}

void fig10(Ctx &c)
{
    const Scene s = close_angle_scene();
    angle_1d(c, s, Algorithm1D::Periodogram, "periodogram");
    angle_1d(c, s, Algorithm1D::Music, "music");
    angle_1d(c, s, Algorithm1D::Omp, "omp");
    c.manifest({{"targets", scene_json(s)}, {"snr_db", 10}});
}

void framework_fig(Ctx &c, Framework fw, Algorithm1D alg)
{
    const Scene s = five_target_scene();
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = noisy(s, o, SteeringKind::FarField, 10.0, c.opt.seed);
    const JointAxes ax = JointAxes::from(s.array, o);
    FrameworkConfig cfg;
    cfg.framework = fw;
    cfg.algorithms.fill(alg);
    const EstimateSet es = run_framework(y, ax, cfg, 5);
    {
        auto f = c.open("_estimates.csv");
        write_estimates_csv(f, es);
    }
    {
        auto f = c.open("_diagnostics.txt");
        for (const auto &d : es.diagnostics)
            f << d << '\n';
    }
    spectrum_files(c, "angle", periodogram(reshape_angle(y), ax.angle, 1024), 3);
    spectrum_files(c, "delay", periodogram(reshape_delay(y), ax.delay, 2048), 4);
    c.manifest({{"targets", scene_json(s)},
                {"snr_db", 10},
                {"framework", framework_name(fw)},
                {"algorithm", algorithm_name(alg)},
                {"grouping", "power"},
                {"beamformer", "zf"}});
}

void fig11(Ctx &c) { framework_fig(c, Framework::Parallel1D, Algorithm1D::Periodogram); }
void fig12(Ctx &c) { framework_fig(c, Framework::Sequential1D, Algorithm1D::Music); }

void fig14(Ctx &c)
{
    std::vector<ResultTable> tables;
    const Algorithm1D algs[] = {Algorithm1D::Periodogram, Algorithm1D::Music,    Algorithm1D::FftMusic,
                                Algorithm1D::RootMusic,   Algorithm1D::EspritLS, Algorithm1D::EspritTLS,
                                Algorithm1D::PmMusic,     Algorithm1D::PmEsprit, Algorithm1D::Omp};
    ExperimentSpec spec;
    spec.scene = rmse_scene();
    spec.trials = c.trials(300);
    spec.seed = c.opt.seed;
    spec.threads = c.opt.threads;
    auto f = c.open("_rmse.csv");
    bool header = true;
    for (AxisKind k : {AxisKind::Angle, AxisKind::Delay, AxisKind::Doppler})
        for (Algorithm1D a : algs)
        {
            spec.axis = k;
            spec.algorithm = a;
            std::ostringstream os;
            write_result_csv(os, run_rmse_sweep(spec));
            std::string text = os.str();
            if (!header)
                text = text.substr(text.find('\n') + 1);
            header = false;
            f << text;
        }
    nlohmann::json m = spec_to_json(spec);
    m.erase("axis");
    m.erase("algorithm");
    c.manifest(m);
}

void fig15(Ctx &c)
{
    ExperimentSpec spec;
    spec.kind = ExperimentKind::ResolutionSweep;
    spec.trials = c.trials(200);
    spec.seed = c.opt.seed;
    spec.threads = c.opt.threads;
    for (int i = 1; i <= 45; ++i)
        spec.separations.push_back(0.2 * i);
    auto f = c.open("_resolution.csv");
    f << "snr_db,algorithm,separation_deg,probability\n";
    nlohmann::json trans;
    for (double snr : {-10.0, 10.0})
        for (Algorithm1D a : {Algorithm1D::Periodogram, Algorithm1D::Music, Algorithm1D::EspritLS})
        {
            spec.snr_start_db = snr;
            spec.gate = snr < 0 ? 0.5 : 0.3;
            spec.algorithm = a;
            const ResultTable t = run_resolution_sweep(spec);
            for (const ResultRow &r : t.rows)
                f << snr << ',' << algorithm_name(a) << ',' << r.x << ',' << r.probability << '\n';
            trans.push_back({{"snr_db", snr}, {"algorithm", algorithm_name(a)}, {"transition_deg", transition_point(t)}});
        }
    nlohmann::json m = spec_to_json(spec);
    m["transitions"] = trans;
    m["gates_deg"] = {{"-10", 0.5}, {"10", 0.3}};
    c.manifest(m);
}

void fig16(Ctx &c, bool music)
{
    const Scene s = equal_angle_scene();
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = noisy(s, o, SteeringKind::FarField, 10.0, c.opt.seed);
    const JointAxes ax = JointAxes::from(s.array, o);
    CVector w = steer_far(s.array, 10.0) / std::sqrt(static_cast<double>(s.array.num_elements));
    const CMatrix X = contract_axis(y, AxisKind::Angle, w);
    Spectrum2D sp;
    std::vector<GridPeak> peaks;
    if (!music)
    {
        sp = periodogram2d(X, ax, 8 * X.rows(), 8 * X.cols());
        // keep the first microsecond of delay for the raster
        Spectrum2D cut;
        cut.x_name = sp.x_name;
        cut.y_name = sp.y_name;
        cut.algorithm = sp.algorithm;
        cut.y = sp.y;
        for (std::size_t i = 0; i < sp.x.size(); ++i)
            if (sp.x[i] <= 1e-6)
            {
                cut.x.push_back(sp.x[i]);
                for (std::size_t j = 0; j < sp.y.size(); ++j)
                    cut.power.push_back(sp.at(i, j));
            }
        peaks = find_peaks_2d(sp, 3, 4, 4);
        sp = cut;
    }
    else
    {
        const double dt = 1.0 / (8.0 * o.bandwidth()), dn = 1.0 / (8.0 * o.cpi());
        std::vector<double> tg, ng;
        for (double t = 0.0; t <= 1e-6; t += dt)
            tg.push_back(t);
        for (double v = -o.max_doppler() / 4; v <= o.max_doppler() / 4; v += dn)
            ng.push_back(v);
        const SmoothingWindow win{0, 64, 32, false};
        sp = music2d(X, 3, win, ax, tg, ng);
        peaks = find_peaks_2d(sp, 3, 4, 4);
    }
    write_spectrum_dump(c.path("_spectrum.bin"), sp);
    c.add("_spectrum.bin");
    write_heatmap_ppm(c.path("_heatmap.ppm"), sp);
    c.add("_heatmap.ppm");
    auto f = c.open("_peaks.csv");
    f << "rank,tau_s,doppler_hz,power\n";
    for (std::size_t i = 0; i < peaks.size(); ++i)
        f << i << ',' << peaks[i].coords[0] << ',' << peaks[i].coords[1] << ',' << peaks[i].power << '\n';
    c.manifest({{"targets", scene_json(s)},
                {"snr_db", 10},
                {"algorithm", music ? "2d-music" : "2d-periodogram"},
                {"window", music ? nlohmann::json{64, 32} : nlohmann::json()},
                {"beam_deg", 10}});
}

void fig16a(Ctx &c) { fig16(c, false); }
void fig16b(Ctx &c) { fig16(c, true); }

void fig17(Ctx &c)
{
    Scene s = reference_scene();
    s.array.num_elements = 256;
    s.targets = {{10.0, 30.0, 0.0, {1.0, 0.0}}, {40.0, 150.0, 20.0, {1.0, 0.0}}};
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = noisy(s, o, SteeringKind::NearFieldExact, 10.0, c.opt.seed);
    const auto rep = nearfield::farfield_mismatch_demo(reshape_angle(y), s.array, {10.0, 40.0});
    spectrum_files(c, "periodogram", rep.spectrum, 2);
    auto f = c.open("_spread.csv");
    f << "angle_deg,range_m,local_maxima,spread\n";
    for (std::size_t i = 0; i < 2; ++i)
        f << s.targets[i].angle_deg << ',' << s.targets[i].range_m << ',' << rep.local_maxima[i] << ','
          << rep.spread[i] << '\n';
    c.manifest({{"targets", scene_json(s)},
                {"snr_db", 10},
                {"rayleigh_m", rayleigh_distance(s.array, s.carrier)},
                {"steering", "near-exact"}});
}

void fig18(Ctx &c)
{
    Scene s = reference_scene();
    s.array = {256, 0.5, ArrayReference::CenterElement};
    s.targets = {{10.0, 5.0, 0.0, {1.0, 0.0}}, {20.0, 10.0, 20.0, {1.0, 0.0}}};
    const OfdmConfig o = reference_ofdm();
    const SensingTensor y = noisy(s, o, SteeringKind::NearFieldExact, 10.0, c.opt.seed);
    const CMatrix X = reshape_angle(y);
    const auto b = nearfield::make_bundle(X, 2);
    nearfield::NearFieldGrid grid;
    grid.angles_deg = linspace(0.0, 30.0, 301);
    grid.ranges_m = linspace(1.0, 20.0, 191);
    const Spectrum2D bf = nearfield::bf2d(b.R, s.array, s.carrier, grid);
    const Spectrum2D mu = nearfield::music2d_nf(b, s.array, s.carrier, grid);
    write_heatmap_ppm(c.path("_bf2d.ppm"), bf);
    c.add("_bf2d.ppm");
    write_heatmap_ppm(c.path("_music2d.ppm"), mu);
    c.add("_music2d.ppm");
    write_spectrum_dump(c.path("_music2d.bin"), mu);
    c.add("_music2d.bin");
    nearfield::GridSearch2D search{grid, 0.05, 0.1};
    const auto r = nearfield::music2d_estimate(b, s.array, s.carrier, search);
    auto f = c.open("_estimates.csv");
    f << "target_idx,theta_deg,range_m,score\n";
    for (std::size_t i = 0; i < r.estimates.size(); ++i)
        f << i << ',' << r.estimates[i].angle_deg << ',' << r.estimates[i].range_m << ',' << r.estimates[i].score
          << '\n';
    c.manifest({{"targets", scene_json(s)},
                {"snr_db", 10},
                {"angle_grid_deg", {0.0, 30.0, 0.1}},
                {"range_grid_m", {1.0, 20.0, 0.1}}});
}

void fig19(Ctx &c)
{
    auto f = c.open("_complexity.csv");
    std::vector<complexity::Row> rows;
    for (double M : {64.0, 128.0, 512.0})
    {
        complexity::ParamsNear p;
        p.M = M;
        for (const auto &r : complexity::table_near(p))
            rows.push_back(r);
    }
    complexity::write_csv(f, rows);
    c.manifest({{"K", 4}, {"N", 256}, {"P", 10}, {"n_g", 3600}, {"n_l", 900}});
}

void fig20(Ctx &c)
{
    NearFieldSuiteSpec spec;
    spec.trials = c.trials(200);
    spec.seed = c.opt.seed;
    spec.threads = c.opt.threads;
    spec.algorithms.push_back("gen-esprit-identity");
    const auto rows = run_nearfield_suite(spec);
    {
        auto f = c.open("_rmse.csv");
        write_nearfield_csv(f, rows);
    }
    std::vector<std::vector<double>> series;
    for (std::size_t a = 0; a < spec.algorithms.size(); ++a)
    {
        std::vector<double> v;
        for (std::size_t s = 0; s < spec.snr_db.size(); ++s)
        {
            const double e = rows[a * spec.snr_db.size() + s].rmse_angle_deg;
            v.push_back(std::isfinite(e) ? e * e : 0.0);
        }
        series.push_back(v);
    }
    write_series_ppm(c.path("_angle.ppm"), spec.snr_db, series);
    c.add("_angle.ppm");
    c.manifest({{"M", spec.geom.num_elements},
                {"spacing_wavelengths", spec.geom.spacing_wavelengths},
                {"carrier_hz", spec.carrier.frequency_hz},
                {"target", {spec.angle_deg, spec.range_m}},
                {"snapshots", spec.ofdm.num_subcarriers * spec.ofdm.num_symbols},
                {"snr_db", spec.snr_db},
                {"trials", spec.trials},
                {"algorithms", spec.algorithms}});
}

void table5(Ctx &c)
{
    auto f = c.open("_complexity.csv");
    complexity::write_csv(f, complexity::table_1d_sweep());
    c.manifest({{"Q", 8192}, {"K", 3}, {"N_s", 1801}, {"N_fft", 1801}});
}

const std::map<std::string, std::function<void(Ctx &)>> &recipes()
{
    static const std::map<std::string, std::function<void(Ctx &)>> r = {
        {"fig8", fig8},   {"fig9", fig9},     {"fig10", fig10},   {"fig11", fig11}, {"fig12", fig12},
        {"fig14", fig14}, {"fig15", fig15},   {"fig16a", fig16a}, {"fig16b", fig16b}, {"fig17", fig17},
        {"fig18", fig18}, {"fig19", fig19},   {"fig20", fig20},   {"table5", table5}};
    return r;
}
} // namespace

std::vector<std::string> figure_ids()
{
    std::vector<std::string> ids;
    for (const auto &[k, v] : recipes())
        ids.push_back(k);
    return ids;
}

std::vector<std::string> reproduce(const std::string &figure_id, const ReproduceOptions &opt)
{
    const auto &r = recipes();
    auto it = r.find(figure_id);
    if (it == r.end())
    {
        std::string list;
        for (const auto &id : figure_ids())
            list += (list.empty() ? "" : ", ") + id;
        throw std::invalid_argument("unknown figure '" + figure_id + "'; available: " + list);
    }
    ensure_directory(opt.out_dir);
    Ctx c{opt, figure_id, {}};
    it->second(c);
    return c.files;
}
} // namespace isac
