// SPDX-License-Identifier: Apache-2.0
#include "isac/complexity.hpp"

#include <cmath>
#include <cstdio>

namespace isac::complexity
{
namespace
{
double nlog(double n) { return n * std::log2(n); }

double nextpow2(double n) { return std::exp2(std::ceil(std::log2(n))); }
} // namespace

std::optional<double> ops_1d(Algorithm1D a, const Params1D &p)
{
    const double M = p.M, Q = p.Q, K = p.K, Ns = p.Ns;
    const double cov = Q * M * M;
    const double search = (2.0 * M * (M - K) + M) * Ns;
    const double pm = M * K * (M - K);
    switch (a)
    {
    case Algorithm1D::Periodogram:
        return Q * nlog(p.Nfft);
    case Algorithm1D::Music:
        return cov + M * M * M + search;
    case Algorithm1D::PmMusic:
        return cov + pm + search;
    case Algorithm1D::FftMusic:
        return cov + M * M * M + (M - K) * nlog(p.Nfft);
    case Algorithm1D::RootMusic:
        return std::nullopt;
    case Algorithm1D::EspritLS:
        return cov + M * M * M + K * K * (M - 1) + K * K * K;
    case Algorithm1D::EspritTLS:
        return cov + M * M * M + 4.0 * K * K * (M - 1) + 10.0 * K * K * K;
    case Algorithm1D::PmEsprit:
        return cov + pm + K * K * (M - 1) + K * K * K;
    case Algorithm1D::Omp:
        return K * M * Ns * Q + M * K * K * K + M * K * K * Q;
    }
    return std::nullopt;
}

double ops_joint(JointKind k, const ParamsJoint &p)
{
    const double M = p.M, N = p.N, P = p.P, K = p.K;
    switch (k)
    {
    case JointKind::Periodogram2D:
        return M * (N * nlog(p.nfft_nu) + p.nfft_nu * nlog(p.nfft_tau));
    case JointKind::Music2D: {
        const double D = N * P;
        return M * D * D + D * D * D + (2.0 * D * (D - K) + D) * p.ns_tau * p.ns_nu;
    }
    case JointKind::Esprit2D: {
        const double D = N * P;
        return 2.0 * M * D * D + 2.0 * D * D * D + K * K * N * (P - 1) + K * K * P * (N - 1) + 2.0 * K * K * K;
    }
    case JointKind::Periodogram3D:
        return N * P * nlog(p.nfft_theta) + N * p.nfft_theta * nlog(p.nfft_nu) +
               p.nfft_theta * p.nfft_nu * nlog(p.nfft_tau);
    case JointKind::Music3D: {
        const double D = M * N * P;
        return D * D + D * D * D + (2.0 * D * (D - K) + D) * p.ns_theta * p.ns_tau * p.ns_nu;
    }
    }
    return 0.0;
}

double ops_near(NearKind k, const ParamsNear &p)
{
    const double M = p.M, K = p.K, NP = p.N * p.P, ng = p.ng, nl = p.nl, J = p.J();
    const double S = p.S > 0 ? p.S : 2.0 * nextpow2(M);
    const double L = p.L > 0 ? p.L : K;
    const double ngs = p.ng_sub > 0 ? p.ng_sub : 2.0 * ng / S;
    const double nls = p.nl_sub > 0 ? p.nl_sub : nl / 10.0;
    const double base = M * M * M + M * M * NP;
    switch (k)
    {
    case NearKind::Bf2D:
        return M * M * NP + ng * nl * M * M;
    case NearKind::Music2D:
        return base + ng * nl * (M - K) * (M + 1);
    case NearKind::Soc:
        return J * J * NP + nlog(S) + K * nl * M * M;
    case NearKind::ReducedRank:
        return base + (M - K) * (ng * (J + 1) * (M + J + 1) + nl * K * (M + 1));
    case NearKind::ReducedDimension:
        return base + ng * ((M - K) * (J + 1) * (M + J + 1) + std::pow(J + 1, 3));
    case NearKind::FftEnhanced:
        return base + 2.0 * M * nlog(S) + 2.0 * L * nl * M * M + L * ngs * nls * (M - K) * (M + 1);
    case NearKind::ModifiedMusic:
        return base + std::pow(J + 1, 3) + ng * (J + 1) * (J + 1) + nl * M * M * K;
    case NearKind::GeneralizedEsprit:
        return base + ng * std::pow(K, 4) * (K * J + J * J) + nl * M * M * K;
    }
    return 0.0;
}

const char *joint_name(JointKind k)
{
    switch (k)
    {
    case JointKind::Periodogram2D:
        return "2d-periodogram";
    case JointKind::Music2D:
        return "2d-music";
    case JointKind::Esprit2D:
        return "2d-esprit";
    case JointKind::Periodogram3D:
        return "3d-periodogram";
    case JointKind::Music3D:
        return "3d-music";
    }
    return "?";
}

const char *near_name(NearKind k)
{
    switch (k)
    {
    case NearKind::Bf2D:
        return "bf2d";
    case NearKind::Music2D:
        return "music2d";
    case NearKind::Soc:
        return "soc";
    case NearKind::ReducedRank:
        return "rr";
    case NearKind::ReducedDimension:
        return "rd";
    case NearKind::FftEnhanced:
        return "fft-enhanced";
    case NearKind::ModifiedMusic:
        return "mod-music";
    case NearKind::GeneralizedEsprit:
        return "gen-esprit";
    }
    return "?";
}

namespace
{
constexpr Algorithm1D kAll1D[] = {Algorithm1D::Periodogram, Algorithm1D::Music,    Algorithm1D::PmMusic,
                                  Algorithm1D::FftMusic,    Algorithm1D::RootMusic, Algorithm1D::EspritLS,
                                  Algorithm1D::EspritTLS,   Algorithm1D::PmEsprit, Algorithm1D::Omp};
} // namespace

std::vector<Row> table_1d(const Params1D &base)
{
    std::vector<Row> rows;
    for (Algorithm1D a : kAll1D)
        rows.push_back({"1d", algorithm_name(a), base.M, ops_1d(a, base)});
    return rows;
}

std::vector<Row> table_1d_sweep(const Params1D &base)
{
    std::vector<Row> rows;
    for (Algorithm1D a : kAll1D)
        for (double M : {16.0, 64.0, 256.0, 512.0, 1024.0})
        {
            Params1D p = base;
            p.M = M;
            rows.push_back({"1d-sweep", algorithm_name(a), M, ops_1d(a, p)});
        }
    return rows;
}

std::vector<Row> table_joint(const ParamsJoint &p)
{
    std::vector<Row> rows;
    for (JointKind k : {JointKind::Periodogram2D, JointKind::Music2D, JointKind::Esprit2D, JointKind::Periodogram3D,
                        JointKind::Music3D})
        rows.push_back({"joint", joint_name(k), p.M, ops_joint(k, p)});
    return rows;
}

std::vector<Row> table_near(const ParamsNear &p)
{
    std::vector<Row> rows;
    for (NearKind k : {NearKind::Bf2D, NearKind::Music2D, NearKind::Soc, NearKind::ReducedRank,
                       NearKind::ReducedDimension, NearKind::FftEnhanced, NearKind::ModifiedMusic,
                       NearKind::GeneralizedEsprit})
        rows.push_back({"nearfield", near_name(k), p.M, ops_near(k, p)});
    return rows;
}

std::string format_ops(std::optional<double> v)
{
    if (!v)
        return "/";
    if (*v == 0.0)
        return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", *v);
    // 1.596e+08 -> 1.596e8
    std::string s(buf);
    const auto e = s.find('e');
    std::string mant = s.substr(0, e);
    int exp = std::stoi(s.substr(e + 1));
    return mant + "e" + std::to_string(exp);
}

void write_csv(std::ostream &os, const std::vector<Row> &rows)
{
    os << "table,algorithm,M,ops\n";
    for (const Row &r : rows)
        os << r.table << ',' << r.algorithm << ',' << r.M << ',' << format_ops(r.ops) << '\n';
}
} // namespace isac::complexity
