// SPDX-License-Identifier: Apache-2.0
#include "isac/frameworks.hpp"
#include "isac/linalg.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace isac
{
namespace
{
Eigen::Index next_pow2(Eigen::Index n)
{
    Eigen::Index p = 1;
    while (p < n)
        p *= 2;
    return p;
}

std::size_t idx(AxisKind k) { return static_cast<std::size_t>(k); }

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
    throw std::logic_error("axis_of: unknown axis");
}

Eigen::Index fft_size(const FrameworkConfig &cfg, AxisKind k, Eigen::Index len, Eigen::Index oversample)
{
    const Eigen::Index n = cfg.n_fft[idx(k)];
    return n > 0 ? std::max(n, len) : oversample * next_pow2(len);
}

void require_stripped(const SensingTensor &y, const char *who)
{
    if (y.kind != TensorKind::SymbolStripped)
        throw std::invalid_argument(std::string(who) + ": needs a symbol-stripped tensor");
}

CMatrix reshape_axis(const SensingTensor &y, AxisKind k)
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
    throw std::logic_error("reshape_axis: unknown axis");
}

CMatrix steering_columns(const ManifoldAxis &axis, const std::vector<double> &values, Eigen::Index len)
{
    CMatrix A(len, static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i)
        A.col(static_cast<Eigen::Index>(i)) = axis.steering(values[i], len);
    return A;
}

// |alpha_k|^2 / sigma^2 from the covariance of X: noise from the trailing
// eigenvalues, signal from the matched-filter power at each steering column.
std::vector<double> power_ratios(const CMatrix &X, const CMatrix &A)
{
    const Eigen::Index L = X.rows();
    const CMatrix R = sample_covariance(X);
    const RVector ev = hermitian_eig(R).values;
    const Eigen::Index K = std::min<Eigen::Index>(A.cols(), L - 1);
    const double noise = std::max(ev.tail(L - K).mean(), 1e-300);
    std::vector<double> out;
    for (Eigen::Index k = 0; k < A.cols(); ++k)
    {
        const double q = A.col(k).dot(R * A.col(k)).real();
        const double p = (q - noise * static_cast<double>(L)) / static_cast<double>(L * L);
        out.push_back(std::max(p, 0.0) / noise);
    }
    return out;
}

CMatrix forward_backward(const CMatrix &Xs)
{
    CMatrix out(Xs.rows(), 2 * Xs.cols());
    out << Xs, Xs.conjugate().colwise().reverse();
    return out;
}

std::vector<double> finite_only(const std::vector<double> &v)
{
    std::vector<double> out;
    for (double x : v)
        if (std::isfinite(x))
            out.push_back(x);
    return out;
}

void sort_and_trim(EstimateSet &s, Eigen::Index K)
{
    std::stable_sort(s.triples.begin(), s.triples.end(),
                     [](const TripleEstimate &a, const TripleEstimate &b) { return a.score > b.score; });
    if (s.triples.size() > static_cast<std::size_t>(K))
        s.triples.resize(static_cast<std::size_t>(K));
}

struct Branch
{
    double value;
    CMatrix Z; // remaining two axes, natural order
};

// First stage along `first` plus one beamformed slice per estimate.
std::vector<Branch> first_stage(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg,
                                AxisKind first, Eigen::Index K, AxisEstimate &est)
{
    const CMatrix X = reshape_axis(y, first);
    const ManifoldAxis &a = axis_of(ax, first);
    est = estimate_axis(X, a, cfg.algorithms[idx(first)], K, cfg);
    std::vector<Branch> out;
    if (est.values.empty())
        return out;
    const CMatrix A = steering_columns(a, est.values, X.rows());
    const std::vector<double> ratios =
        cfg.beamformer == BeamformerKind::MMSE ? power_ratios(X, A) : std::vector<double>{};
    for (std::size_t i = 0; i < est.values.size(); ++i)
    {
        const CVector r = beamform_vector(cfg.beamformer, A, static_cast<Eigen::Index>(i), ratios);
        out.push_back({est.values[i], contract_axis(y, first, r)});
    }
    return out;
}
} // namespace

const char *framework_name(Framework f)
{
    switch (f)
    {
    case Framework::Parallel1D:
        return "parallel";
    case Framework::Sequential1D:
        return "sequential";
    case Framework::Joint2D:
        return "joint2d";
    case Framework::Joint3D:
        return "joint3d";
    }
    return "?";
}

const char *algorithm_name(Algorithm1D a)
{
    switch (a)
    {
    case Algorithm1D::Periodogram:
        return "periodogram";
    case Algorithm1D::Music:
        return "music";
    case Algorithm1D::FftMusic:
        return "fft-music";
    case Algorithm1D::RootMusic:
        return "root-music";
    case Algorithm1D::EspritLS:
        return "esprit-ls";
    case Algorithm1D::EspritTLS:
        return "esprit-tls";
    case Algorithm1D::PmMusic:
        return "pm-music";
    case Algorithm1D::PmEsprit:
        return "pm-esprit";
    case Algorithm1D::Omp:
        return "omp";
    }
    return "?";
}

Framework parse_framework(const std::string &s)
{
    for (Framework f : {Framework::Parallel1D, Framework::Sequential1D, Framework::Joint2D, Framework::Joint3D})
        if (s == framework_name(f))
            return f;
    throw std::invalid_argument("unknown framework '" + s + "'");
}

Algorithm1D parse_algorithm(const std::string &s)
{
    for (int i = 0; i <= static_cast<int>(Algorithm1D::Omp); ++i)
        if (s == algorithm_name(static_cast<Algorithm1D>(i)))
            return static_cast<Algorithm1D>(i);
    if (s == "esprit")
        return Algorithm1D::EspritLS;
    throw std::invalid_argument("unknown algorithm '" + s + "'");
}

AlgorithmJoint parse_joint_algorithm(const std::string &s)
{
    if (s == "periodogram")
        return AlgorithmJoint::Periodogram;
    if (s == "music")
        return AlgorithmJoint::Music;
    throw std::invalid_argument("unknown joint algorithm '" + s + "'");
}

Grouping parse_grouping(const std::string &s)
{
    if (s == "correlation")
        return Grouping::Correlation;
    if (s == "power" || s == "power-detection")
        return Grouping::PowerDetection;
    throw std::invalid_argument("unknown grouping '" + s + "'");
}

BeamformerKind parse_beamformer(const std::string &s)
{
    if (s == "mrc")
        return BeamformerKind::MRC;
    if (s == "zf")
        return BeamformerKind::ZF;
    if (s == "mmse")
        return BeamformerKind::MMSE;
    throw std::invalid_argument("unknown beamformer '" + s + "'");
}

void FrameworkConfig::validate() const
{
    std::array<AxisKind, 3> sorted = stage_order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<AxisKind, 3>{AxisKind::Angle, AxisKind::Delay, AxisKind::Doppler})
        throw std::invalid_argument("FrameworkConfig: stage order must be a permutation of the three axes");
    if (!(detection_threshold >= 0.0 && detection_threshold < 1.0))
        throw std::invalid_argument("FrameworkConfig: detection threshold must lie in [0, 1)");
    for (Eigen::Index c : branch_counts)
        if (c < 0)
            throw std::invalid_argument("FrameworkConfig: branch counts must be non-negative");
}

CVector beamform_vector(BeamformerKind kind, const CMatrix &A, Eigen::Index index, const std::vector<double> &ratios)
{
    if (index < 0 || index >= A.cols())
        throw std::invalid_argument("beamform_vector: index out of range");
    const CVector a = A.col(index);
    if (A.cols() == 1 || kind == BeamformerKind::MRC)
        return a.normalized();
    CMatrix others(A.rows(), A.cols() - 1);
    for (Eigen::Index j = 0, c = 0; j < A.cols(); ++j)
        if (j != index)
            others.col(c++) = A.col(j);
    if (kind == BeamformerKind::ZF)
    {
        if (A.cols() > A.rows())
            throw std::invalid_argument("beamform_vector: ZF needs at most as many directions as elements");
        const CMatrix Q = orthonormalize(others);
        const CVector r = a - Q * (Q.adjoint() * a);
        if (r.norm() <= 1e-8 * a.norm() || Q.cols() < others.cols())
            throw EstimationError("beamform_vector: ZF directions are linearly dependent");
        return r.normalized();
    }
    if (ratios.size() != static_cast<std::size_t>(A.cols()))
        throw std::invalid_argument("beamform_vector: MMSE needs one power ratio per direction");
    CMatrix C = CMatrix::Identity(A.rows(), A.rows());
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        if (j != index)
            C += ratios[static_cast<std::size_t>(j)] * A.col(j) * A.col(j).adjoint();
    return C.partialPivLu().solve(a).normalized();
}

CMatrix contract_axis(const SensingTensor &y, AxisKind axis, const CVector &w)
{
    require_stripped(y, "contract_axis");
    const auto M = static_cast<Eigen::Index>(y.data.dim_m()), N = static_cast<Eigen::Index>(y.data.dim_n()),
               P = static_cast<Eigen::Index>(y.data.dim_p());
    const CMatrix X = reshape_axis(y, axis);
    if (w.size() != X.rows())
        throw std::invalid_argument("contract_axis: weight length does not match the axis");
    const CMatrix row = w.adjoint() * X;
    switch (axis)
    {
    case AxisKind::Angle:
        return Eigen::Map<const CMatrix>(row.data(), N, P);
    case AxisKind::Delay:
        return Eigen::Map<const CMatrix>(row.data(), M, P);
    case AxisKind::Doppler:
        return Eigen::Map<const CMatrix>(row.data(), M, N);
    }
    throw std::logic_error("contract_axis: unknown axis");
}

AxisEstimate estimate_axis(const CMatrix &X, const ManifoldAxis &axis, Algorithm1D alg, Eigen::Index cap,
                           const FrameworkConfig &cfg, Eigen::Index exact_count)
{
    const Eigen::Index len = X.rows();
    if (len < 2 || X.cols() == 0)
        throw std::invalid_argument("estimate_axis: need at least 2 rows and one snapshot");
    cap = std::clamp<Eigen::Index>(exact_count > 0 ? exact_count : cap, 1, len - 1);
    AxisEstimate out;
    std::vector<double> vals;
    if (alg == Algorithm1D::Periodogram)
    {
        const Spectrum1D s = periodogram(X, axis, fft_size(cfg, axis.kind, len, 16));
        const double thr = exact_count > 0 ? 0.0 : cfg.detection_threshold;
        vals = find_peaks(s, static_cast<std::size_t>(cap), {1, true, thr}).params();
    }
    else
    {
        CMatrix Xs = X;
        if (X.cols() < len)
        {
            // too few snapshots for a covariance: forward-backward smoothing
            const Eigen::Index sub = std::max<Eigen::Index>(cap + 1, (len + 1) / 2);
            Xs = forward_backward(smooth_snapshots(X, std::min(sub, len)));
        }
        const Eigen::Index L = Xs.rows();
        cap = std::min(cap, L - 1);
        Eigen::Index K = cap;
        if (exact_count <= 0)
        {
            const RVector ev = hermitian_eig(sample_covariance(Xs)).values;
            K = std::clamp<Eigen::Index>(estimate_model_order(ev.head(std::min<Eigen::Index>(cap + 1, L))), 1, cap);
        }
        const std::vector<double> grid = axis.default_grid(L);
        switch (alg)
        {
        case Algorithm1D::Music:
            vals = find_peaks(music(Xs, axis, K, grid), static_cast<std::size_t>(K)).params();
            break;
        case Algorithm1D::FftMusic:
            vals = find_peaks(fft_music(Xs, axis, K, fft_size(cfg, axis.kind, L, 16)), static_cast<std::size_t>(K))
                       .params();
            break;
        case Algorithm1D::RootMusic:
            vals = root_music(Xs, axis, K);
            break;
        case Algorithm1D::EspritLS:
            vals = esprit(Xs, axis, K, EspritVariant::LS);
            break;
        case Algorithm1D::EspritTLS:
            vals = esprit(Xs, axis, K, EspritVariant::TLS);
            break;
        case Algorithm1D::PmMusic:
            vals = find_peaks(pm_music(Xs, axis, K, grid), static_cast<std::size_t>(K)).params();
            break;
        case Algorithm1D::PmEsprit:
            vals = pm_esprit(Xs, axis, K);
            break;
        case Algorithm1D::Omp:
            vals = omp(Xs, axis, K, grid).params;
            break;
        case Algorithm1D::Periodogram:
            break;
        }
    }
    out.values = finite_only(vals);
    const double scale = 1.0 / (static_cast<double>(len) * static_cast<double>(X.cols()));
    for (double v : out.values)
        out.power.push_back((axis.steering(v, len).adjoint() * X).squaredNorm() * scale);
    return out;
}

std::vector<TripleScore> score_triples(const SensingTensor &y, const JointAxes &ax, const AxisEstimate &angles,
                                       const AxisEstimate &delays, const AxisEstimate &dopplers, Grouping g)
{
    require_stripped(y, "score_triples");
    const auto M = static_cast<Eigen::Index>(y.data.dim_m()), N = static_cast<Eigen::Index>(y.data.dim_n()),
               P = static_cast<Eigen::Index>(y.data.dim_p());
    const double mnp = static_cast<double>(M * N * P);
    const CMatrix At = steering_columns(ax.delay, delays.values, N);
    const CMatrix Av = steering_columns(ax.doppler, dopplers.values, P);
    std::vector<TripleScore> out;
    for (std::size_t i = 0; i < angles.values.size(); ++i)
    {
        const CMatrix B = contract_axis(y, AxisKind::Angle, ax.angle.steering(angles.values[i], M));
        const CMatrix Z = At.adjoint() * B * Av.conjugate();
        for (std::size_t j = 0; j < delays.values.size(); ++j)
            for (std::size_t k = 0; k < dopplers.values.size(); ++k)
            {
                const double mag = std::abs(Z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
                const double score = g == Grouping::PowerDetection ? mag * mag / mnp : mag / mnp;
                out.push_back({{i, j, k}, {angles.values[i], delays.values[j], dopplers.values[k], score}});
            }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const TripleScore &a, const TripleScore &b) { return a.triple.score > b.triple.score; });
    return out;
}

EstimateSet run_parallel(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K)
{
    cfg.validate();
    require_stripped(y, "run_parallel");
    if (K < 1)
        throw std::invalid_argument("run_parallel: K must be at least 1");
    EstimateSet s;
    s.framework = framework_name(Framework::Parallel1D);
    std::array<AxisEstimate, 3> est;
    for (AxisKind k : {AxisKind::Angle, AxisKind::Delay, AxisKind::Doppler})
    {
        est[idx(k)] = estimate_axis(reshape_axis(y, k), axis_of(ax, k), cfg.algorithms[idx(k)], K, cfg);
        if (est[idx(k)].values.empty())
            throw EstimationError(std::string("run_parallel: no ") + axis_name(k) + " estimates");
    }
    const auto scored = score_triples(y, ax, est[0], est[1], est[2], cfg.grouping);
    std::array<std::size_t, 3> cap{};
    for (std::size_t d = 0; d < 3; ++d)
        cap[d] = static_cast<std::size_t>((K + static_cast<Eigen::Index>(est[d].values.size()) - 1) /
                                          static_cast<Eigen::Index>(est[d].values.size()));
    std::array<std::vector<std::size_t>, 3> used;
    for (std::size_t d = 0; d < 3; ++d)
        used[d].assign(est[d].values.size(), 0);
    for (const TripleScore &t : scored)
    {
        bool ok = true;
        for (std::size_t d = 0; d < 3; ++d)
            ok = ok && used[d][t.index[d]] < cap[d];
        if (!ok)
            continue;
        for (std::size_t d = 0; d < 3; ++d)
            ++used[d][t.index[d]];
        s.triples.push_back(t.triple);
        if (s.triples.size() == static_cast<std::size_t>(K))
            break;
    }
    return s;
}

EstimateSet run_sequential(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K)
{
    cfg.validate();
    require_stripped(y, "run_sequential");
    if (K < 1)
        throw std::invalid_argument("run_sequential: K must be at least 1");
    EstimateSet s;
    s.framework = framework_name(Framework::Sequential1D);
    const AxisKind A = cfg.stage_order[0], B = cfg.stage_order[1], C = cfg.stage_order[2];
    AxisEstimate e1;
    const std::vector<Branch> branches = first_stage(y, ax, cfg, A, K, e1);
    if (branches.empty())
        throw EstimationError(std::string("run_sequential: no ") + axis_name(A) + " estimates");
    // remaining axes keep natural order, so B is the row axis iff it precedes C
    const bool b_rows = idx(B) < idx(C);
    const ManifoldAxis &ab = axis_of(ax, B), &ac = axis_of(ax, C);
    const auto n1 = static_cast<Eigen::Index>(branches.size());
    for (std::size_t bi = 0; bi < branches.size(); ++bi)
    {
        const CMatrix X2 = b_rows ? branches[bi].Z : CMatrix(branches[bi].Z.transpose());
        const Eigen::Index exact = bi < cfg.branch_counts.size() ? cfg.branch_counts[bi] : 0;
        const Eigen::Index cap2 = std::max<Eigen::Index>(1, K - (n1 - 1));
        const AxisEstimate e2 = estimate_axis(X2, ab, cfg.algorithms[idx(B)], cap2, cfg, exact);
        if (e2.values.empty())
        {
            s.diagnostics.push_back("branch " + std::to_string(bi) + " dropped: no " + axis_name(B) + " estimates");
            continue;
        }
        const CMatrix A2 = steering_columns(ab, e2.values, X2.rows());
        const std::vector<double> ratios =
            cfg.beamformer == BeamformerKind::MMSE ? power_ratios(X2, A2) : std::vector<double>{};
        const auto n2 = static_cast<Eigen::Index>(e2.values.size());
        for (std::size_t j = 0; j < e2.values.size(); ++j)
        {
            const CVector r = beamform_vector(cfg.beamformer, A2, static_cast<Eigen::Index>(j), ratios);
            const CMatrix x3 = (r.adjoint() * X2).transpose();
            const Eigen::Index cap3 = std::max<Eigen::Index>(1, cap2 - (n2 - 1));
            const AxisEstimate e3 = estimate_axis(x3, ac, cfg.algorithms[idx(C)], cap3, cfg);
            for (std::size_t l = 0; l < e3.values.size(); ++l)
            {
                std::array<double, 3> v{};
                v[idx(A)] = branches[bi].value;
                v[idx(B)] = e2.values[j];
                v[idx(C)] = e3.values[l];
                s.triples.push_back({v[0], v[1], v[2], e3.power[l]});
            }
        }
    }
    sort_and_trim(s, K);
    return s;
}

EstimateSet run_joint2d(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K)
{
    cfg.validate();
    require_stripped(y, "run_joint2d");
    if (K < 1)
        throw std::invalid_argument("run_joint2d: K must be at least 1");
    EstimateSet s;
    s.framework = framework_name(Framework::Joint2D);
    AxisEstimate e1;
    const std::vector<Branch> branches = first_stage(y, ax, cfg, AxisKind::Angle, K, e1);
    if (branches.empty())
        throw EstimationError("run_joint2d: no angle estimates");
    const auto N = static_cast<Eigen::Index>(y.data.dim_n()), P = static_cast<Eigen::Index>(y.data.dim_p());
    const auto n1 = static_cast<Eigen::Index>(branches.size());
    for (std::size_t bi = 0; bi < branches.size(); ++bi)
    {
        const CMatrix &X = branches[bi].Z; // N x P
        const Eigen::Index exact = bi < cfg.branch_counts.size() ? cfg.branch_counts[bi] : 0;
        const Eigen::Index cap = exact > 0 ? exact : std::max<Eigen::Index>(1, K - (n1 - 1));
        std::vector<GridPeak> peaks;
        if (cfg.joint_algorithm == AlgorithmJoint::Periodogram)
        {
            const Spectrum2D sp = periodogram2d(X, ax, fft_size(cfg, AxisKind::Delay, N, 8),
                                                fft_size(cfg, AxisKind::Doppler, P, 8));
            peaks = find_peaks_2d(sp, static_cast<std::size_t>(cap), 1, 1, exact > 0 ? 0.0 : cfg.detection_threshold);
        }
        else
        {
            SmoothingWindow w = cfg.window2d;
            if (w.n_sub == 0 || w.p_sub == 0)
                w = default_window_2d(N, P);
            const CMatrix Xs = mssp(X, w);
            const Eigen::Index D = Xs.rows();
            const Eigen::Index top = std::min<Eigen::Index>(cap + 1, D);
            const HermitianEig e = hermitian_eig_top(sample_covariance(Xs), top);
            Eigen::Index Kb = exact > 0 ? std::min(exact, D - 1)
                                        : std::clamp<Eigen::Index>(estimate_model_order(e.values), 1, cap);
            Kb = std::min(Kb, top);
            Subspace S;
            S.eigenvalues = e.values;
            S.signal = e.vectors.leftCols(Kb);
            const Spectrum2D sp = music2d(S, w, ax, ax.delay.default_grid(N), ax.doppler.default_grid(P));
            peaks = find_peaks_2d(sp, static_cast<std::size_t>(Kb), 1, 1);
        }
        if (peaks.empty())
            s.diagnostics.push_back("branch " + std::to_string(bi) + " empty");
        for (const GridPeak &p : peaks)
            s.triples.push_back({branches[bi].value, p.coords[0], p.coords[1], p.power});
    }
    sort_and_trim(s, K);
    return s;
}

EstimateSet run_joint3d(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K)
{
    cfg.validate();
    require_stripped(y, "run_joint3d");
    if (K < 1)
        throw std::invalid_argument("run_joint3d: K must be at least 1");
    EstimateSet s;
    s.framework = framework_name(Framework::Joint3D);
    const auto M = static_cast<Eigen::Index>(y.data.dim_m()), N = static_cast<Eigen::Index>(y.data.dim_n()),
               P = static_cast<Eigen::Index>(y.data.dim_p());
    if (cfg.joint_algorithm == AlgorithmJoint::Periodogram)
    {
        const Spectrum3D sp = periodogram3d(y, ax,
                                            {fft_size(cfg, AxisKind::Angle, M, 4), fft_size(cfg, AxisKind::Delay, N, 4),
                                             fft_size(cfg, AxisKind::Doppler, P, 4)});
        for (const GridPeak &p : find_peaks_3d(sp, static_cast<std::size_t>(K), {1, 1, 1}))
            s.triples.push_back({p.coords[0], p.coords[1], p.coords[2], p.power});
    }
    else
    {
        SmoothingWindow w = cfg.window3d;
        if (w.m_sub == 0 || w.n_sub == 0 || w.p_sub == 0)
            w = default_window_3d(M, N, P);
        const Music3dResult r = music3d(y, K, w, ax, cfg.music3d);
        for (std::size_t i = 0; i < r.peaks.size(); ++i)
            s.triples.push_back({r.peaks[i][0], r.peaks[i][1], r.peaks[i][2], r.peak_power[i]});
    }
    if (s.triples.size() < static_cast<std::size_t>(K))
        s.diagnostics.push_back("fewer 3D peaks than targets");
    sort_and_trim(s, K);
    return s;
}

EstimateSet run_framework(const SensingTensor &y, const JointAxes &ax, const FrameworkConfig &cfg, Eigen::Index K)
{
    switch (cfg.framework)
    {
    case Framework::Parallel1D:
        return run_parallel(y, ax, cfg, K);
    case Framework::Sequential1D:
        return run_sequential(y, ax, cfg, K);
    case Framework::Joint2D:
        return run_joint2d(y, ax, cfg, K);
    case Framework::Joint3D:
        return run_joint3d(y, ax, cfg, K);
    }
    throw std::logic_error("run_framework: unknown framework");
}
} // namespace isac
