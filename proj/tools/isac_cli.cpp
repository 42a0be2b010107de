// SPDX-License-Identifier: Apache-2.0
#include "isac/harness.hpp"
#include "isac/linalg.hpp"
#include "isac/report.hpp"
#include "isac/tensor_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace isac;

namespace
{
struct Common
{
    std::string config;
    std::string out_dir = ".";
    std::string input;
    std::optional<double> snr;
    std::uint64_t seed = 1;
    std::string model = "far";
};

struct Loaded
{
    ConfigDocument doc;
    Scene scene;
    OfdmConfig ofdm;
};

Loaded load(const Common &c)
{
    Loaded l;
    if (!c.config.empty())
        l.doc = load_config(c.config);
    l.scene = scene_from_config(l.doc);
    l.ofdm = ofdm_from_config(l.doc);
    return l;
}

void add_common(CLI::App *app, Common &c, bool with_input)
{
    app->add_option("-c,--config", c.config, "Config file ([scene], [[target]], [ofdm], [framework], [experiment])");
    app->add_option("-o,--out-dir", c.out_dir, "Output directory");
    app->add_option("--seed", c.seed, "Master seed");
    app->add_option("--snr", c.snr, "SNR in dB (omit for noise-free)");
    app->add_option("--model", c.model, "Steering model: far, near-exact, fresnel");
    if (with_input)
        app->add_option("-i,--input", c.input, "Tensor file written by synth (symbol-stripped)");
}

// Tensor from --input, or synthesized from the config.
SensingTensor get_tensor(const Common &c, const Loaded &l)
{
    if (!c.input.empty())
    {
        SensingTensor t = read_tensor(c.input);
        if (t.kind != TensorKind::SymbolStripped)
            throw std::invalid_argument("input tensor still carries the transmit symbols; run synth without --keep-symbols");
        return t;
    }
    std::optional<double> snr = c.snr ? c.snr : snr_from_config(l.doc);
    return trial_tensor(l.scene, l.ofdm, parse_model(c.model), snr, seed_from_config(l.doc, c.seed), 0);
}

std::string out_path(const Common &c, const std::string &name)
{
    ensure_directory(c.out_dir);
    return c.out_dir + "/" + name;
}

std::ofstream open_out(const Common &c, const std::string &name)
{
    const std::string p = out_path(c, name);
    std::ofstream f(p);
    if (!f)
        throw std::runtime_error("cannot write " + p);
    std::cout << p << '\n';
    return f;
}

nlohmann::json base_manifest(const Common &c, const Loaded &l, const std::string &command)
{
    ExperimentSpec e;
    e.scene = l.scene;
    e.ofdm = l.ofdm;
    nlohmann::json j = spec_to_json(e);
    j["command"] = command;
    j["config"] = c.config;
    j["input"] = c.input;
    j["seed"] = c.seed;
    j["snr_db"] = c.snr ? nlohmann::json(*c.snr) : nlohmann::json();
    j["model"] = c.model;
    for (const char *k : {"snr", "trials", "mode", "axis", "algorithm", "gate", "kind"})
        j.erase(k);
    return j;
}

const ManifoldAxis &axis_for(const JointAxes &ax, AxisKind k)
{
    return k == AxisKind::Angle ? ax.angle : k == AxisKind::Delay ? ax.delay : ax.doppler;
}

std::vector<double> parse_range(const std::string &s)
{
    // lo:hi:step or a comma list
    std::vector<double> out;
    if (s.find(':') != std::string::npos)
    {
        double lo = 0, hi = 0, step = 0;
        char c1 = 0, c2 = 0;
        std::istringstream is(s);
        if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0))
            throw std::invalid_argument("range must be lo:hi:step");
        for (double v = lo; v <= hi + 1e-9 * step; v += step)
            out.push_back(v);
        return out;
    }
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ','))
        out.push_back(std::stod(tok));
    return out;
}
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"OFDM sensing parameter estimation toolkit"};
    app.require_subcommand(1);

    // synth
    Common synth_c;
    bool keep_symbols = false;
    std::string synth_file = "tensor.bin";
    auto *synth = app.add_subcommand("synth", "Synthesize a sensing tensor");
    add_common(synth, synth_c, false);
    synth->add_option("--file", synth_file, "Tensor file name inside the output directory");
    synth->add_flag("--keep-symbols", keep_symbols, "Write the tensor before symbol removal");
    synth->callback([&] {
        const Loaded l = load(synth_c);
        std::optional<double> snr = synth_c.snr ? synth_c.snr : snr_from_config(l.doc);
        const std::uint64_t seed = seed_from_config(l.doc, synth_c.seed);
        const std::uint64_t s = derive_seed(seed, 0);
        const SymbolGrid b = random_qpsk(l.ofdm, derive_seed(s, 1));
        SensingTensor y = synthesize(l.scene, l.ofdm, b, parse_model(synth_c.model), snr, derive_seed(s, 2));
        if (!keep_symbols)
            y = strip_symbols(y, b);
        const std::string p = out_path(synth_c, synth_file);
        write_tensor(p, y);
        std::cout << p << '\n';
        auto m = base_manifest(synth_c, l, "synth");
        m["noise_variance"] = y.noise_variance;
        m["symbols_stripped"] = !keep_symbols;
        write_manifest(p + ".manifest.json", m);
    });

    // estimate
    Common est_c;
    std::string est_axis = "angle", est_alg = "periodogram";
    Eigen::Index est_K = 0, est_nfft = 0;
    auto *est = app.add_subcommand("estimate", "One-domain estimate along one axis");
    add_common(est, est_c, true);
    est->add_option("--axis", est_axis, "angle, delay or doppler");
    est->add_option("--alg", est_alg,
                    "periodogram, music, fft-music, root-music, pm-music, esprit-ls, esprit-tls, pm-esprit, omp");
    est->add_option("-K,--targets", est_K, "Number of values (default: number of targets in the scene)");
    est->add_option("--nfft", est_nfft, "FFT size (default 16 x next power of two)");
    est->callback([&] {
        const Loaded l = load(est_c);
        const SensingTensor y = get_tensor(est_c, l);
        const AxisKind k = parse_axis(est_axis);
        const Algorithm1D alg = parse_algorithm(est_alg);
        const JointAxes ax = JointAxes::from(l.scene.array, l.ofdm);
        const ManifoldAxis &axis = axis_for(ax, k);
        const CMatrix X = k == AxisKind::Angle ? reshape_angle(y) : k == AxisKind::Delay ? reshape_delay(y) : reshape_doppler(y);
        const Eigen::Index K = est_K > 0 ? est_K : static_cast<Eigen::Index>(l.scene.targets.size());
        Eigen::Index nfft = est_nfft;
        if (nfft == 0)
        {
            nfft = 1;
            while (nfft < X.rows())
                nfft <<= 1;
            nfft *= 16;
        }
        const auto grid = axis.default_grid(X.rows());
        std::optional<Spectrum1D> spec;
        PeakSet peaks;
        switch (alg)
        {
        case Algorithm1D::Periodogram:
            spec = periodogram(X, axis, nfft);
            break;
        case Algorithm1D::Music:
            spec = music(X, axis, K, grid);
            break;
        case Algorithm1D::FftMusic:
            spec = fft_music(X, axis, K, nfft);
            break;
        case Algorithm1D::PmMusic:
            spec = pm_music(X, axis, K, grid);
            break;
        default: {
            FrameworkConfig cfg;
            const AxisEstimate e = estimate_axis(X, axis, alg, K, cfg, K);
            for (std::size_t i = 0; i < e.values.size(); ++i)
                peaks.peaks.push_back({e.values[i], e.power[i], 0});
            std::sort(peaks.peaks.begin(), peaks.peaks.end(),
                      [](const Peak &a, const Peak &b) { return a.power > b.power; });
        }
        }
        const std::string stem = est_axis + "_" + est_alg;
        if (spec)
        {
            peaks = find_peaks(*spec, static_cast<std::size_t>(K));
            auto f = open_out(est_c, stem + "_spectrum.csv");
            write_spectrum_csv(f, *spec);
        }
        {
            auto f = open_out(est_c, stem + "_peaks.csv");
            write_peaks_csv(f, peaks);
        }
        auto m = base_manifest(est_c, l, "estimate");
        m["axis"] = est_axis;
        m["algorithm"] = est_alg;
        m["K"] = K;
        m["n_fft"] = nfft;
        write_manifest(out_path(est_c, stem + "_manifest.json"), m);
    });

    // estimate2d
    Common e2_c;
    std::string e2_alg = "periodogram";
    double e2_beam = 0.0;
    std::vector<Eigen::Index> e2_window, e2_nfft;
    Eigen::Index e2_K = 0;
    auto *e2 = app.add_subcommand("estimate2d", "Joint delay-Doppler estimate after receive beamforming");
    add_common(e2, e2_c, true);
    e2->add_option("--alg", e2_alg, "periodogram or music");
    e2->add_option("--beam", e2_beam, "Beam angle in degrees (MRC)");
    e2->add_option("--window", e2_window, "MSSP window N_sub P_sub")->expected(2);
    e2->add_option("--nfft", e2_nfft, "FFT sizes along delay and Doppler")->expected(2);
    e2->add_option("-K,--targets", e2_K, "Number of peaks");
    e2->callback([&] {
        const Loaded l = load(e2_c);
        const SensingTensor y = get_tensor(e2_c, l);
        const JointAxes ax = JointAxes::from(l.scene.array, l.ofdm);
        const CVector w = steer_far(l.scene.array, e2_beam) / std::sqrt(static_cast<double>(l.scene.array.num_elements));
        const CMatrix X = contract_axis(y, AxisKind::Angle, w);
        const Eigen::Index K = e2_K > 0 ? e2_K : static_cast<Eigen::Index>(l.scene.targets.size());
        Spectrum2D s;
        if (parse_joint_algorithm(e2_alg) == AlgorithmJoint::Periodogram)
        {
            const Eigen::Index nt = e2_nfft.size() == 2 ? e2_nfft[0] : 8 * X.rows();
            const Eigen::Index nn = e2_nfft.size() == 2 ? e2_nfft[1] : 8 * X.cols();
            s = periodogram2d(X, ax, nt, nn);
        }
        else
        {
            SmoothingWindow win = default_window_2d(X.rows(), X.cols());
            if (e2_window.size() == 2)
            {
                win.n_sub = e2_window[0];
                win.p_sub = e2_window[1];
            }
            const auto tg = ax.delay.default_grid(X.rows());
            const auto ng = ax.doppler.default_grid(X.cols());
            s = music2d(X, K, win, ax, tg, ng);
        }
        const auto peaks = find_peaks_2d(s, static_cast<std::size_t>(K), 4, 4);
        write_spectrum_dump(out_path(e2_c, "spectrum2d.bin"), s);
        write_heatmap_ppm(out_path(e2_c, "spectrum2d.ppm"), s);
        auto f = open_out(e2_c, "peaks2d.csv");
        f << "rank,tau_s,doppler_hz,power\n";
        for (std::size_t i = 0; i < peaks.size(); ++i)
            f << i << ',' << peaks[i].coords[0] << ',' << peaks[i].coords[1] << ',' << peaks[i].power << '\n';
        auto m = base_manifest(e2_c, l, "estimate2d");
        m["algorithm"] = e2_alg;
        m["beam_deg"] = e2_beam;
        m["K"] = K;
        write_manifest(out_path(e2_c, "estimate2d_manifest.json"), m);
    });

    // estimate3d
    Common e3_c;
    std::string e3_alg = "periodogram";
    std::vector<Eigen::Index> e3_window, e3_nfft;
    Eigen::Index e3_K = 0;
    auto *e3 = app.add_subcommand("estimate3d", "Joint angle-delay-Doppler estimate");
    add_common(e3, e3_c, true);
    e3->add_option("--alg", e3_alg, "periodogram or music");
    e3->add_option("--window", e3_window, "MSSP window M_sub N_sub P_sub")->expected(3);
    e3->add_option("--nfft", e3_nfft, "FFT sizes along angle, delay and Doppler")->expected(3);
    e3->add_option("-K,--targets", e3_K, "Number of peaks");
    e3->callback([&] {
        const Loaded l = load(e3_c);
        const SensingTensor y = get_tensor(e3_c, l);
        const JointAxes ax = JointAxes::from(l.scene.array, l.ofdm);
        const Eigen::Index K = e3_K > 0 ? e3_K : static_cast<Eigen::Index>(l.scene.targets.size());
        FrameworkConfig cfg;
        cfg.framework = Framework::Joint3D;
        cfg.joint_algorithm = parse_joint_algorithm(e3_alg);
        if (e3_window.size() == 3)
            cfg.window3d = {e3_window[0], e3_window[1], e3_window[2], false};
        if (e3_nfft.size() == 3)
            for (std::size_t i = 0; i < 3; ++i)
                cfg.n_fft[i] = e3_nfft[i];
        const EstimateSet es = run_joint3d(y, ax, cfg, K);
        auto f = open_out(e3_c, "estimates3d.csv");
        write_estimates_csv(f, es);
        auto m = base_manifest(e3_c, l, "estimate3d");
        m["algorithm"] = e3_alg;
        m["K"] = K;
        write_manifest(out_path(e3_c, "estimate3d_manifest.json"), m);
    });

    // nearfield
    Common nf_c;
    nf_c.model = "near-exact";
    std::string nf_alg = "music2d";
    Eigen::Index nf_K = 0;
    NearFieldSuiteSpec nf_grid;
    auto *nf = app.add_subcommand("nearfield", "Near-field angle and range estimate");
    add_common(nf, nf_c, true);
    nf->add_option("--alg", nf_alg, "bf2d, music2d, soc, rd, rr, fft-enhanced, mod-music, gen-esprit");
    nf->add_option("-K,--targets", nf_K, "Number of targets");
    nf->add_option("--angle-step", nf_grid.angle_step_deg, "1D angle grid step (deg)");
    nf->add_option("--angle-span", nf_grid.angle_span_deg, "Angle grids cover [-span, span] (deg)");
    nf->add_option("--range-points", nf_grid.range_points, "Log-spaced range grid size");
    nf->callback([&] {
        const Loaded l = load(nf_c);
        const SensingTensor y = get_tensor(nf_c, l);
        const CMatrix X = reshape_angle(y);
        const Eigen::Index K = nf_K > 0 ? nf_K : static_cast<Eigen::Index>(l.scene.targets.size());
        const auto r = run_nearfield_algorithm(nf_alg, X, l.scene.array, l.scene.carrier, K, nf_grid);
        auto f = open_out(nf_c, "nearfield_" + nf_alg + ".csv");
        f << "target_idx,theta_deg,range_m,score\n";
        for (std::size_t i = 0; i < r.estimates.size(); ++i)
            f << i << ',' << r.estimates[i].angle_deg << ',' << r.estimates[i].range_m << ',' << r.estimates[i].score
              << '\n';
        if (r.flagged)
            std::cerr << "note: " << r.note << '\n';
        auto m = base_manifest(nf_c, l, "nearfield");
        m["algorithm"] = nf_alg;
        m["K"] = K;
        m["grid_evaluations"] = r.grid_evaluations;
        m["flagged"] = r.flagged;
        m["note"] = r.note;
        write_manifest(out_path(nf_c, "nearfield_" + nf_alg + "_manifest.json"), m);
    });

    // pipeline
    Common pl_c;
    std::string pl_fw;
    Eigen::Index pl_K = 0;
    auto *pl = app.add_subcommand("pipeline", "Run one estimation framework end to end");
    add_common(pl, pl_c, true);
    pl->add_option("--framework", pl_fw, "parallel, sequential, joint2d or joint3d");
    pl->add_option("-K,--targets", pl_K, "Number of targets");
    pl->callback([&] {
        const Loaded l = load(pl_c);
        FrameworkConfig cfg = framework_from_config(l.doc);
        if (!pl_fw.empty())
            cfg.framework = parse_framework(pl_fw);
        const SensingTensor y = get_tensor(pl_c, l);
        const JointAxes ax = JointAxes::from(l.scene.array, l.ofdm);
        const Eigen::Index K = pl_K > 0 ? pl_K : static_cast<Eigen::Index>(l.scene.targets.size());
        const EstimateSet es = run_framework(y, ax, cfg, K);
        auto f = open_out(pl_c, std::string("estimates_") + framework_name(cfg.framework) + ".csv");
        write_estimates_csv(f, es);
        for (const auto &d : es.diagnostics)
            std::cerr << "note: " << d << '\n';
        auto m = base_manifest(pl_c, l, "pipeline");
        m["framework"] = framework_name(cfg.framework);
        m["K"] = K;
        m["diagnostics"] = es.diagnostics;
        write_manifest(out_path(pl_c, std::string("estimates_") + framework_name(cfg.framework) + "_manifest.json"), m);
    });

    // mc-rmse
    Common mc_c;
    std::string mc_axis, mc_alg, mc_snr;
    std::size_t mc_trials = 0;
    unsigned mc_threads = 1;
    bool mc_framework = false;
    auto *mc = app.add_subcommand("mc-rmse", "Monte-Carlo RMSE versus SNR");
    add_common(mc, mc_c, false);
    mc->add_option("--axis", mc_axis, "angle, delay or doppler");
    mc->add_option("--alg", mc_alg, "1D algorithm");
    mc->add_option("--snr-range", mc_snr, "lo:hi:step in dB");
    mc->add_option("--trials", mc_trials, "Trials per SNR point");
    mc->add_option("--threads", mc_threads, "Worker threads (0: all cores)");
    mc->add_flag("--framework-mode", mc_framework, "Run the configured framework and match triples");
    mc->callback([&] {
        const Loaded l = load(mc_c);
        ExperimentSpec spec = experiment_from_config(l.doc);
        if (!mc_axis.empty())
            spec.axis = parse_axis(mc_axis);
        if (!mc_alg.empty())
            spec.algorithm = parse_algorithm(mc_alg);
        if (!mc_snr.empty())
        {
            const auto r = parse_range(mc_snr);
            spec.snr_start_db = r.front();
            spec.snr_stop_db = r.back();
            spec.snr_step_db = r.size() > 1 ? r[1] - r[0] : 0.0;
        }
        if (mc_trials > 0)
            spec.trials = mc_trials;
        if (mc->count("--seed"))
            spec.seed = mc_c.seed;
        spec.threads = mc_threads;
        if (mc_framework)
            spec.one_domain = false;
        spec.model = parse_model(mc_c.model);
        const ResultTable t = run_rmse_sweep(spec);
        auto f = open_out(mc_c, "rmse.csv");
        write_result_csv(f, t);
        for (const ResultRow &r : t.rows)
            if (!r.note.empty())
                std::cerr << "snr " << r.x << ": " << r.note << '\n';
        write_manifest(out_path(mc_c, "rmse_manifest.json"), spec_to_json(spec));
    });

    // resolution
    Common rs_c;
    std::string rs_axis, rs_alg, rs_seps;
    std::size_t rs_trials = 0;
    unsigned rs_threads = 1;
    std::optional<double> rs_gate;
    auto *rs = app.add_subcommand("resolution", "Two-target resolution probability sweep");
    add_common(rs, rs_c, false);
    rs->add_option("--axis", rs_axis, "angle, delay or doppler");
    rs->add_option("--alg", rs_alg, "1D algorithm");
    rs->add_option("--separations", rs_seps, "lo:hi:step or a comma list, in axis units (deg, s, Hz)");
    rs->add_option("--gate", rs_gate, "RMSE gate for success, in axis units");
    rs->add_option("--trials", rs_trials, "Trials per separation");
    rs->add_option("--threads", rs_threads, "Worker threads (0: all cores)");
    rs->callback([&] {
        const Loaded l = load(rs_c);
        ExperimentSpec spec = experiment_from_config(l.doc);
        spec.kind = ExperimentKind::ResolutionSweep;
        if (!rs_axis.empty())
            spec.axis = parse_axis(rs_axis);
        if (!rs_alg.empty())
            spec.algorithm = parse_algorithm(rs_alg);
        if (!rs_seps.empty())
            spec.separations = parse_range(rs_seps);
        if (spec.separations.empty())
            for (int i = 1; i <= 45; ++i)
                spec.separations.push_back(0.2 * i);
        if (rs_gate)
            spec.gate = *rs_gate;
        if (rs_c.snr)
            spec.snr_start_db = *rs_c.snr;
        if (rs_trials > 0)
            spec.trials = rs_trials;
        if (rs->count("--seed"))
            spec.seed = rs_c.seed;
        spec.threads = rs_threads;
        const ResultTable t = run_resolution_sweep(spec);
        auto f = open_out(rs_c, "resolution.csv");
        write_result_csv(f, t);
        std::cout << "transition " << transition_point(t) << '\n';
        auto m = spec_to_json(spec);
        m["snr_db"] = spec.snr_start_db;
        m["transition"] = transition_point(t);
        write_manifest(out_path(rs_c, "resolution_manifest.json"), m);
    });

    // bench
    Common bn_c;
    std::vector<double> bn_sizes{16, 64, 256};
    std::size_t bn_repeats = 3;
    bool bn_theory_only = false;
    auto *bn = app.add_subcommand("bench", "Complexity tables and measured run times");
    add_common(bn, bn_c, false);
    bn->add_option("--sizes", bn_sizes, "Array sizes for the measured run");
    bn->add_option("--repeats", bn_repeats, "Timing repeats per algorithm");
    bn->add_flag("--theory-only", bn_theory_only, "Only write the closed-form tables");
    bn->callback([&] {
        {
            auto f = open_out(bn_c, "complexity_1d.csv");
            complexity::write_csv(f, complexity::table_1d_sweep());
        }
        {
            auto f = open_out(bn_c, "complexity_joint.csv");
            complexity::write_csv(f, complexity::table_joint({}));
        }
        {
            auto f = open_out(bn_c, "complexity_nearfield.csv");
            complexity::write_csv(f, complexity::table_near({}));
        }
        if (!bn_theory_only)
        {
            auto f = open_out(bn_c, "bench_1d.csv");
            write_bench_csv(f, bench_1d(bn_sizes, bn_repeats));
        }
        write_manifest(out_path(bn_c, "bench_manifest.json"),
                       {{"sizes", bn_sizes}, {"repeats", bn_repeats}, {"Q", 8192}, {"K", 3}, {"N_s", 1801}});
    });

    // reproduce
    ReproduceOptions rp;
    std::string rp_id;
    auto *rpc = app.add_subcommand("reproduce", "Run a bound figure scenario");
    rpc->add_option("id", rp_id, "Figure id, or 'list'")->required();
    rpc->add_option("-o,--out-dir", rp.out_dir, "Output directory");
    rpc->add_option("--trials", rp.trials, "Override the recipe's trial count");
    rpc->add_option("--seed", rp.seed, "Master seed");
    rpc->add_option("--threads", rp.threads, "Worker threads (0: all cores)");
    rpc->callback([&] {
        if (rp_id == "list")
        {
            for (const auto &id : figure_ids())
                std::cout << id << '\n';
            return;
        }
        for (const auto &p : reproduce(rp_id, rp))
            std::cout << p << '\n';
    });

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
