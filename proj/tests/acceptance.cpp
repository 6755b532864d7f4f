// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gqcc/asymptotic.hpp"
#include "gqcc/bootstrap.hpp"
#include "gqcc/estimator.hpp"
#include "gqcc/io.hpp"
#include "gqcc/kernel.hpp"
#include "gqcc/monte_carlo.hpp"
#include "gqcc/pipeline.hpp"
#include "gqcc/rng.hpp"
#include "gqcc/stats.hpp"

#ifndef GQCC_EXE
#error "GQCC_EXE must point at the gqcc executable"
#endif

using namespace gqcc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

// 1 ---------------------------------------------------------------------------

double weighted_loss(const TaskSpec& spec, const std::vector<double>& y, const std::vector<double>& w, double th) {
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * rho(spec, y[i] - th);
    return s;
}

Outcome exact_minimizer() {
    const auto t0 = Clock::now();
    Stream rng(101);
    const ProductKernel k(UnivariateKernel::quartic(), 1);
    std::size_t bad = 0;
    double worst_gap = 0;
    for (int inst = 0; inst < 500; ++inst) {
        const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 12);
        const std::size_t m = std::max<std::size_t>(n, 2);
        std::vector<double> x(m), y(m);
        for (std::size_t i = 0; i < m; ++i) {
            x[i] = rng.uniform();
            y[i] = 6 * rng.uniform() - 3;
        }
        // a single-point instance is stored twice (datasets need two rows)
        if (n == 1) {
            x[1] = x[0];
            y[1] = y[0];
        }
        const Dataset data(x, y, 1);
        const std::vector<double> h{1.0 + rng.uniform()};
        const std::vector<double> x0{rng.uniform()};
        const auto w = weight_row(k, h, x0, data);
        const double tau = 0.1 * static_cast<double>(1 + static_cast<int>(rng.uniform() * 9));
        for (auto spec : {TaskSpec::quantile(tau), TaskSpec::expectile(tau), TaskSpec::mean()}) {
            const double th = fit_point(data, spec, k, h, x0);
            const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
            double best = *lo;
            double best_loss = std::numeric_limits<double>::infinity();
            for (double t = *lo - 1e-4; t <= *hi + 1e-4; t += 1e-4) {
                const double l = weighted_loss(spec, y, w, t);
                if (l < best_loss) {
                    best_loss = l;
                    best = t;
                }
            }
            const double ours = weighted_loss(spec, y, w, th);
            bool ok = ours <= best_loss + 1e-12;
            // strictly convex losses: the scan argmin sits within one step
            if (spec.family != Family::quantile) ok = ok && std::abs(th - best) <= 1e-4 + 1e-12;
            worst_gap = std::max(worst_gap, ours - best_loss);
            if (!ok) ++bad;
        }
    }
    const double secs = seconds_since(t0);
    return {bad == 0 && secs < 10.0, std::to_string(bad) + " mismatches in 1500 fits, " + fmt(secs, 3) + " s"};
}

// 2 ---------------------------------------------------------------------------

Outcome field_gumbel() {
    const auto t0 = Clock::now();
    const ProductKernel k(UnivariateKernel::quartic(), 2);
    const auto& kc = cached_kernel_constants(k);
    // The limit theorem is stated on a unit-volume region.
    const GridSpec unit({Axis{0.0, 1.0, 20}, Axis{0.0, 1.0, 20}});
    const double h = 0.05;
    const std::size_t n = 10000;
    const double kappa = -std::log(h) / std::log(static_cast<double>(n));
    const auto g = critical_constants(n, 2, kappa, kc, 0.05);
    const Stream master(202);
    std::vector<double> z;
    for (std::uint64_t r = 0; r < 2000; ++r) {
        Stream s = master.substream(r);
        const double sup = gaussian_field_sup(k, h, unit, s);
        z.push_back(std::sqrt(g.log_scale) * (sup - g.d_n));
    }
    const double ks = ks_statistic(z, [](double a) { return gumbel_cdf(a); });
    const double secs = seconds_since(t0);
    return {ks <= 0.08 && secs < 300.0, "KS " + fmt(ks) + " over 2000 sups, " + fmt(secs, 3) + " s"};
}

// 3-6 -------------------------------------------------------------------------

const CellResult& find_cell(const std::vector<CellResult>& rs, CorridorMethod m, Family f, double sigma0,
                            std::size_t n) {
    for (const auto& r : rs)
        if (r.cell.method == m && r.cell.spec.family == f && r.cell.sigma0 == sigma0 && r.cell.n == n) return r;
    throw std::runtime_error("cell missing from study");
}

std::string cell_text(const CellResult& c) {
    return cell_label(c.cell) + " coverage " + fmt(c.coverage, 3) + " (R " + std::to_string(c.replicates) +
           ", failures " + std::to_string(c.failures) + ")";
}

// 7 ---------------------------------------------------------------------------

Outcome nuisance_consistency() {
    const auto t0 = Clock::now();
    const GridSpec grid = GridSpec::standard(2);
    const StudyConfig study;
    AnalysisOptions ao;
    ao.bandwidth = study.bandwidth;
    const auto spec = TaskSpec::expectile(0.5);
    std::vector<std::array<double, 3>> med;
    for (std::size_t n : {200, 800, 3200}) {
        std::vector<double> eF, ef, es;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            DGPSpec dgp;
            dgp.n = n;
            dgp.mode = VarianceMode::heterogeneous;
            Stream rng(7000 + seed, {n});
            const auto data = generate(dgp, rng);
            const auto a = analyze(data, spec, ao);
            double sF = 0, sf = 0, ss = 0;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const auto p = grid.point(k);
                const double s = noise_scale(dgp, p[0], p[1]);
                // epsilon = sigma(x) Z around the 0.5-expectile (the mean)
                sF = std::max(sF, std::abs(a.nuisance.F_eps_at_0[k] - 0.5));
                sf = std::max(sf, std::abs(a.nuisance.f_eps_at_0[k] - 1.0 / (std::sqrt(2 * std::numbers::pi) * s)));
                ss = std::max(ss, std::abs(a.nuisance.sigma_sq_hat[k] - s * s));
            }
            eF.push_back(sF);
            ef.push_back(sf);
            es.push_back(ss);
        }
        med.push_back({median(eF), median(ef), median(es)});
    }
    bool ok = true;
    std::string detail;
    const char* names[3] = {"F", "f", "sigma2"};
    for (int j = 0; j < 3; ++j) {
        ok = ok && med[1][j] < med[0][j] && med[2][j] < med[1][j];
        detail += std::string(j ? "; " : "") + names[j] + " " + fmt(med[0][j], 3) + " > " + fmt(med[1][j], 3) +
                  " > " + fmt(med[2][j], 3);
    }
    return {ok, "median sup errors n=200/800/3200: " + detail + ", " + fmt(seconds_since(t0), 3) + " s"};
}

// 8 ---------------------------------------------------------------------------

Outcome centering() {
    std::string detail;
    bool ok = true;
    for (auto spec : {TaskSpec::quantile(0.5), TaskSpec::expectile(0.5)}) {
        DGPSpec dgp;
        dgp.n = 300;
        Stream rng(808);
        const auto data = generate(dgp, rng);
        const StudyConfig study;
        AnalysisOptions ao;
        ao.bandwidth = study.bandwidth;
        const auto a = analyze(data, spec, ao);
        const BootstrapInputs in{data, a.residuals, a.fit, a.nuisance, a.spec, a.plan, a.kernel, a.nuisance_kernels};
        const std::size_t B = 2000;
        const auto run = bootstrap_replicates(in, BootstrapConfig{B, 9, CenterMode::analytic, std::nullopt}, true);
        const std::size_t m = a.fit.grid.size();
        std::size_t viol = 0;
        double worst = 0;
        for (std::size_t k = 0; k < m; ++k) {
            double s = 0, s2 = 0;
            for (std::size_t b = 0; b < B; ++b) {
                const double d = run.deviations[b * m + k];
                s += d;
                s2 += d * d;
            }
            const double mean = s / static_cast<double>(B);
            const double sd = std::sqrt(std::max(0.0, s2 / static_cast<double>(B) - mean * mean));
            const double ratio = std::abs(mean) / (sd / std::sqrt(static_cast<double>(B)));
            worst = std::max(worst, ratio);
            if (ratio > 4.0) ++viol;
        }
        ok = ok && viol == 0;
        detail += std::string(detail.empty() ? "" : "; ") + std::string(to_string(spec.family)) + " worst |mean|/(SD/sqrt B) " +
                  fmt(worst, 3) + ", " + std::to_string(viol) + " of " + std::to_string(m) + " nodes above 4";
    }
    return {ok, detail};
}

// 9 ---------------------------------------------------------------------------

double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    const double hh = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * hh);
    return s * hh / 3;
}

Outcome constants() {
    const auto q = UnivariateKernel::quartic();
    const double k2 = simpson([&](double u) { return q(u) * q(u); }, -1, 1);
    const double d2 = simpson([&](double u) { return q.derivative(u) * q.derivative(u); }, -1, 1);
    const auto& kc1 = cached_kernel_constants(ProductKernel(q, 1));
    const auto& kc2 = cached_kernel_constants(ProductKernel(q, 2));
    const double c = c_alpha(0.05);
    bool ok = std::abs(c - 3.6634) <= 1e-4;
    ok = ok && std::abs(k2 - 5.0 / 7.0) <= 1e-9 && std::abs(kc1.l2norm_sq - 5.0 / 7.0) <= 1e-9;
    ok = ok && std::abs(d2 - 15.0 / 7.0) <= 1e-9 && std::abs(kc1.deriv_sq_1d - 15.0 / 7.0) <= 1e-9;
    // product quartic in 2-d: H2 = 3 / (2 pi)
    ok = ok && std::abs(kc2.h2 - 3.0 / (2 * std::numbers::pi)) <= 1e-9;

    double worst = 0;
    for (std::size_t n : {100, 300, 500, 10000})
        for (double kappa : {0.1, 0.15, 0.2}) {
            const long double pi = std::numbers::pi_v<long double>;
            const long double d = 2;
            const long double a = 2.0L * d * kappa * std::log(static_cast<long double>(n));
            const long double inner =
                (d - 1) / 2 * std::log(kappa * std::log(static_cast<long double>(n))) +
                std::log(static_cast<long double>(kc2.h2) * std::pow(2 * d, (d - 1) / 2) / std::sqrt(2 * pi));
            const double oracle = static_cast<double>(std::sqrt(a) + inner / std::sqrt(a));
            worst = std::max(worst, std::abs(critical_constants(n, 2, kappa, kc2, 0.05).d_n - oracle));
        }
    ok = ok && worst <= 1e-12;
    return {ok, "c(0.05) " + fmt(c, 8) + ", |K|^2 " + fmt(kc1.l2norm_sq, 12) + ", int K'^2 " +
                    fmt(kc1.deriv_sq_1d, 12) + ", H2 " + fmt(kc2.h2, 10) + ", d_n max gap " + fmt(worst, 3)};
}

// 10 --------------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream os;
        os << in.rdbuf();
        files[fs::relative(e.path(), dir).string()] = os.str();
    }
    return files;
}

Outcome cli_determinism() {
    const auto root = fs::temp_directory_path() / "gqcc_acceptance_cli";
    fs::remove_all(root);
    fs::create_directories(root);
    for (std::uint64_t g = 0; g < 2; ++g) {
        DGPSpec dgp;
        dgp.n = 200;
        Stream rng(1000 + g);
        const auto d = generate(dgp, rng);
        std::string s = "x1,x2,y\n";
        for (std::size_t i = 0; i < d.size(); ++i)
            s += format_double(d.x(i, 0)) + "," + format_double(d.x(i, 1)) + "," +
                 format_double(d.y(i) + 0.3 * static_cast<double>(g)) + "\n";
        write_file_atomic(root / ("g" + std::to_string(g) + ".csv"), s);
    }
    write_file_atomic(root / "config.json", R"({
  "family": "quantile",
  "tau": [0.2, 0.5],
  "method": "bootstrap",
  "bootstrap": {"B": 300},
  "seed": 42,
  "plot_script": true,
  "data": {"path": "g0.csv"},
  "treatment": {"path": "g1.csv"},
  "simulate": {"methods": ["asymptotic", "bootstrap"], "n": [100], "sigma0": [0.5], "replicates": 50}
}
)");
    const std::string exe = GQCC_EXE;
    const std::vector<std::string> commands{"fit", "cc", "compare", "simulate"};
    std::string detail;
    bool ok = true;
    for (const auto& cmd : commands) {
        std::map<std::string, std::string> first;
        for (int run = 0; run < 2; ++run) {
            const std::string line = "cd '" + root.string() + "' && '" + exe + "' " + cmd +
                                     " --config config.json --out out_" + cmd + " > /dev/null";
            if (std::system(line.c_str()) != 0) {
                ok = false;
                detail += cmd + " failed; ";
                break;
            }
            auto snap = snapshot(root / ("out_" + cmd));
            if (run == 0) {
                first = std::move(snap);
            } else if (snap != first || first.empty()) {
                ok = false;
                detail += cmd + " differs; ";
            } else {
                detail += cmd + " " + std::to_string(first.size()) + " files identical; ";
            }
        }
    }
    return {ok, detail};
}

}  // namespace

int main() {
    std::vector<std::pair<int, Outcome>> results;
    const auto report = [&](int id, const std::string& what, Outcome o) {
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << what << "  [" << o.detail
                  << "]" << std::endl;
        results.emplace_back(id, std::move(o));
    };

    report(1, "exact minimiser vs brute-force scan", exact_minimizer());
    report(2, "Gaussian field sups vs Gumbel law", field_gumbel());

    // paired quantile and expectile cells at R = 200 for criteria 3, 4 and 6
    const auto t0 = Clock::now();
    StudyConfig study;
    study.replicates = 200;
    std::vector<Cell> cells;
    for (auto fam : {Family::quantile, Family::expectile})
        for (double s0 : {0.2, 0.5, 0.7})
            for (std::size_t n : {100, 300})
                for (auto m : {CorridorMethod::asymptotic, CorridorMethod::bootstrap})
                    cells.push_back(Cell{m, fam == Family::quantile ? TaskSpec::quantile(0.5) : TaskSpec::expectile(0.5),
                                         n, s0, VarianceMode::homogeneous});
    const auto study_res = coverage_study(cells, study);
    const double study_secs = seconds_since(t0);
    std::cout << report_table(study_res) << "study of " << cells.size() << " cells took " << fmt(study_secs, 3)
              << " s" << std::endl;

    {
        const auto& c = find_cell(study_res, CorridorMethod::bootstrap, Family::quantile, 0.5, 100);
        report(3, "bootstrap quantile cell, target 0.929 +/- 0.07",
               {std::abs(c.coverage - 0.929) <= 0.07 && c.replicates == 200, cell_text(c)});
    }
    {
        const auto& c = find_cell(study_res, CorridorMethod::asymptotic, Family::quantile, 0.2, 100);
        const double vol = c.mean_region_volume;
        report(4, "asymptotic quantile cell: coverage <= 0.05, volume 0.366 +/- 30%",
               {c.coverage <= 0.05 && std::abs(vol / 0.366 - 1) <= 0.30,
                cell_text(c) + ", region volume " + fmt(vol, 3)});
    }
    {
        const auto t5 = Clock::now();
        StudyConfig s5;
        s5.replicates = 150;
        const auto r = coverage_study(
            {Cell{CorridorMethod::bootstrap, TaskSpec::expectile(0.5), 300, 0.5, VarianceMode::homogeneous}}, s5);
        report(5, "bootstrap expectile cell, target 0.956 +/- 0.08",
               {std::abs(r[0].coverage - 0.956) <= 0.08, cell_text(r[0]) + ", " + fmt(seconds_since(t5), 3) + " s"});
    }
    {
        std::size_t pairs = 0;
        std::string viol;
        for (const auto& b : study_res) {
            if (b.cell.method != CorridorMethod::bootstrap) continue;
            const auto& a = find_cell(study_res, CorridorMethod::asymptotic, b.cell.spec.family, b.cell.sigma0, b.cell.n);
            ++pairs;
            if (b.coverage < a.coverage) viol += " " + cell_label(b.cell);
        }
        report(6, "bootstrap coverage >= asymptotic coverage on paired cells",
               {viol.empty(), std::to_string(pairs) + " pairs at R 200" + (viol.empty() ? "" : ", violations:" + viol)});
    }
    report(7, "nuisance estimators consistent", nuisance_consistency());
    report(8, "bootstrap centering", centering());
    report(9, "constants", constants());
    report(10, "seeded CLI reruns byte-identical", cli_determinism());

    const auto passed = std::count_if(results.begin(), results.end(), [](const auto& r) { return r.second.pass; });
    std::cout << passed << " of " << results.size() << " criteria pass" << std::endl;
    return passed == static_cast<long>(results.size()) ? 0 : 1;
}
