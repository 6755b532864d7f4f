#include "gqcc/monte_carlo.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <tuple>

#include <boost/math/distributions/normal.hpp>

#include "gqcc/errors.hpp"
#include "gqcc/parallel.hpp"
#include "gqcc/pipeline.hpp"

namespace gqcc {
namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

// ".929" style coverage as printed in coverage tables.
std::string coverage_text(double p) {
    auto s = fixed(p, 3);
    if (s.starts_with("0.")) s.erase(0, 1);
    return s;
}

}  // namespace

std::string_view to_string(VarianceMode m) { return m == VarianceMode::homogeneous ? "homogeneous" : "heterogeneous"; }

VarianceMode parse_variance_mode(std::string_view name) {
    if (name == "homogeneous") return VarianceMode::homogeneous;
    if (name == "heterogeneous") return VarianceMode::heterogeneous;
    throw ConfigError("unknown variance mode '" + std::string(name) + "' (expected homogeneous or heterogeneous)");
}

double copula_rho_for(double corr) { return 2.0 * std::sin(std::numbers::pi * corr / 6.0); }

void DGPSpec::validate() const {
    if (n < 2) throw ConfigError("simulated sample size must be at least 2");
    if (!(sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
    if (!(correlation > -1.0 && correlation < 1.0)) throw ConfigError("covariate correlation must lie in (-1, 1)");
}

double true_function(double x1, double x2) { return std::sin(2.0 * std::numbers::pi * x1) + x2; }

double noise_scale(const DGPSpec& dgp, double x1, double x2) {
    if (dgp.mode == VarianceMode::homogeneous) return dgp.sigma0;
    return dgp.sigma0 + 0.8 * x1 * (1.0 - x1) * x2 * (1.0 - x2);
}

Dataset generate(const DGPSpec& dgp, Stream& rng) {
    dgp.validate();
    const double rho = copula_rho_for(dgp.correlation);
    const double tail = std::sqrt(1.0 - rho * rho);
    std::vector<double> x(2 * dgp.n);
    std::vector<double> y(dgp.n);
    for (std::size_t i = 0; i < dgp.n; ++i) {
        const double z1 = rng.normal();
        const double z2 = rho * z1 + tail * rng.normal();
        const double x1 = norm_cdf(z1);
        const double x2 = norm_cdf(z2);
        x[2 * i] = x1;
        x[2 * i + 1] = x2;
        y[i] = true_function(x1, x2) + noise_scale(dgp, x1, x2) * rng.normal();
    }
    return Dataset(std::move(x), std::move(y), 2);
}

double standard_normal_expectile(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
    static std::mutex mutex;
    static std::map<double, double> cache;
    const std::lock_guard lock(mutex);
    if (auto it = cache.find(tau); it != cache.end()) return it->second;
    // tau E(Z-e)_+ - (1-tau) E(e-Z)_+ is decreasing in e.
    auto gap = [tau](double e) {
        const double upper = norm_pdf(e) - e * (1.0 - norm_cdf(e));
        const double lower = e * norm_cdf(e) + norm_pdf(e);
        return tau * upper - (1.0 - tau) * lower;
    };
    double lo = -10.0;
    double hi = 10.0;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    const double e = 0.5 * (lo + hi);
    cache.emplace(tau, e);
    return e;
}

std::vector<double> truth_surface(const DGPSpec& dgp, const TaskSpec& spec, const GridSpec& grid) {
    if (grid.dim() != 2) throw ConfigError("the simulation design has two covariates");
    double offset = 0.0;
    if (spec.family == Family::quantile)
        offset = boost::math::quantile(boost::math::normal(), spec.tau);
    else if (spec.family == Family::expectile)
        offset = standard_normal_expectile(spec.tau);
    std::vector<double> out(grid.size());
    std::vector<double> x(2);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.point(k, x);
        out[k] = true_function(x[0], x[1]) + noise_scale(dgp, x[0], x[1]) * offset;
    }
    return out;
}

std::string cell_label(const Cell& cell) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << to_string(cell.method) << ' ' << to_string(cell.spec.family) << " tau=" << cell.spec.tau
       << " n=" << cell.n << " sigma0=" << cell.sigma0 << ' ' << to_string(cell.mode);
    return os.str();
}

std::vector<CellResult> coverage_study(const std::vector<Cell>& cells, const StudyConfig& config) {
    if (config.replicates < 50) throw ConfigError("coverage studies need at least 50 replicates");
    config.bootstrap.validate();
    std::vector<CellResult> results;
    results.reserve(cells.size());

    for (const auto& cell : cells) {
        cell.spec.validate();
        const auto start = std::chrono::steady_clock::now();
        DGPSpec dgp;
        dgp.n = cell.n;
        dgp.sigma0 = cell.sigma0;
        dgp.mode = cell.mode;
        const auto truth = truth_surface(dgp, cell.spec, config.grid);

        AnalysisOptions ao;
        ao.grid = config.grid;
        ao.bandwidth = config.bandwidth;
        CorridorOptions co;
        co.method = cell.method;
        co.alpha = config.alpha;
        co.volume_normalization = config.volume_normalization;
        co.bootstrap = config.bootstrap;

        struct Trial {
            bool ok = false;
            bool covered = false;
            double volume = 0.0;
            std::string error;
        };
        std::vector<Trial> trials(config.replicates);
        const std::uint64_t sigma_bits = std::bit_cast<std::uint64_t>(cell.sigma0);
        const auto mode_id = static_cast<std::uint64_t>(cell.mode);

        parallel_for(config.replicates, [&](std::size_t r) {
            Stream rng(config.seed, {cell.n, sigma_bits, mode_id, r});
            Trial& t = trials[r];
            try {
                const auto data = generate(dgp, rng);
                const auto analysis = analyze(data, cell.spec, ao);
                auto opts = co;
                opts.bootstrap.seed = rng.substream(0xb0075ULL).key();
                const auto cc = build_corridor(data, analysis, opts);
                t.covered = covers(cc, truth);
                t.volume = corridor_volume(cc);
                t.ok = true;
            } catch (const Error& e) {
                t.error = e.what();
            }
        });

        CellResult res;
        res.cell = cell;
        res.replicates = config.replicates;
        double vol = 0.0;
        for (const auto& t : trials) {
            if (!t.ok) {
                ++res.failures;
                if (res.failure_messages.size() < 5) res.failure_messages.push_back(t.error);
                continue;
            }
            res.covered += t.covered ? 1 : 0;
            vol += t.volume;
        }
        const std::size_t done = res.replicates - res.failures;
        if (static_cast<double>(res.failures) > config.max_failure_rate * static_cast<double>(res.replicates) ||
            done == 0) {
            std::ostringstream os;
            os << cell_label(cell) << ": " << res.failures << " of " << res.replicates << " trials failed";
            if (!res.failure_messages.empty()) os << " (first: " << res.failure_messages.front() << ")";
            throw NumericalError(os.str());
        }
        res.coverage = static_cast<double>(res.covered) / static_cast<double>(done);
        res.standard_error = std::sqrt(res.coverage * (1.0 - res.coverage) / static_cast<double>(done));
        res.mean_volume = vol / static_cast<double>(done);
        res.mean_region_volume = res.mean_volume * config.grid.volume();
        res.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        results.push_back(std::move(res));
    }
    return results;
}

std::vector<Cell> table_cells(Family family, const std::vector<CorridorMethod>& methods,
                              const std::vector<double>& sigma0s, const std::vector<std::size_t>& ns,
                              const std::vector<double>& taus, const std::vector<VarianceMode>& modes) {
    std::vector<Cell> cells;
    for (auto m : methods)
        for (double s : sigma0s)
            for (auto n : ns)
                for (double tau : taus)
                    for (auto mode : modes) {
                        Cell c;
                        c.method = m;
                        c.spec = TaskSpec{family, tau};
                        c.n = n;
                        c.sigma0 = s;
                        c.mode = mode;
                        cells.push_back(c);
                    }
    return cells;
}

std::string report_csv(const std::vector<CellResult>& results) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << "method,family,tau,n,sigma0,mode,replicates,failures,covered,coverage,se,mean_width,region_volume\n";
    os << std::setprecision(17);
    for (const auto& r : results) {
        os << to_string(r.cell.method) << ',' << to_string(r.cell.spec.family) << ',' << r.cell.spec.tau << ','
           << r.cell.n << ',' << r.cell.sigma0 << ',' << to_string(r.cell.mode) << ',' << r.replicates << ','
           << r.failures << ',' << r.covered << ',' << r.coverage << ',' << r.standard_error << ','
           << r.mean_volume << ',' << r.mean_region_volume << '\n';
    }
    return os.str();
}

std::string report_table(const std::vector<CellResult>& results) {
    using Row = std::tuple<int, int, double, std::size_t>;   // method, family, sigma0, n
    using Col = std::pair<int, double>;                      // mode, tau
    std::vector<Row> rows;
    std::vector<Col> cols;
    std::map<std::pair<Row, Col>, std::string> cell;
    for (const auto& r : results) {
        const Row row{static_cast<int>(r.cell.method), static_cast<int>(r.cell.spec.family), r.cell.sigma0, r.cell.n};
        const Col col{static_cast<int>(r.cell.mode), r.cell.spec.tau};
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
        if (std::find(cols.begin(), cols.end(), col) == cols.end()) cols.push_back(col);
        cell[{row, col}] = coverage_text(r.coverage) + "(" + fixed(r.mean_region_volume, 3) + ")";
    }
    std::stable_sort(cols.begin(), cols.end(), [](const Col& a, const Col& b) { return a.first < b.first; });

    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::left << std::setw(12) << "method" << std::setw(11) << "family" << std::setw(8) << "sigma0"
       << std::setw(6) << "n";
    for (const auto& c : cols) {
        const std::string head =
            std::string(c.first == 0 ? "hom" : "het") + " tau=" + fixed(c.second, 2);
        os << std::setw(15) << head;
    }
    os << '\n';
    for (const auto& row : rows) {
        const auto [m, f, s, n] = row;
        os << std::setw(12) << to_string(static_cast<CorridorMethod>(m)) << std::setw(11)
           << to_string(static_cast<Family>(f)) << std::setw(8) << fixed(s, 2) << std::setw(6) << n;
        for (const auto& c : cols) {
            auto it = cell.find({row, c});
            os << std::setw(15) << (it == cell.end() ? "-" : it->second);
        }
        os << '\n';
    }
    return os.str();
}

namespace {

std::vector<double> field_taps(const UnivariateKernel& k, std::size_t resolution) {
    const double radius = k.support_radius().value_or(8.0 * k.tail_scale());
    const auto half = static_cast<std::size_t>(std::ceil(radius * static_cast<double>(resolution)));
    std::vector<double> taps(2 * half + 1);
    const double scale = std::sqrt(1.0 / static_cast<double>(resolution));
    for (std::size_t t = 0; t < taps.size(); ++t) {
        const double u = (static_cast<double>(t) - static_cast<double>(half)) / static_cast<double>(resolution);
        taps[t] = k(u) * scale;
    }
    return taps;
}

}  // namespace

double gaussian_field_variance(const ProductKernel& kernel, double h, std::size_t resolution) {
    if (resolution < 10) throw ConfigError("field lattice is too coarse: spacing must be at most h/10");
    if (!(h > 0.0)) throw ConfigError("field bandwidth must be positive");
    double s = 0.0;
    for (double c : field_taps(kernel.base(), resolution)) s += c * c;
    return std::pow(s, static_cast<double>(kernel.dim()));
}

FieldLattice gaussian_field(const ProductKernel& kernel, double h, const GridSpec& region, Stream& rng,
                            std::size_t resolution) {
    if (resolution < 10) throw ConfigError("field lattice is too coarse: spacing must be at most h/10");
    if (!(h > 0.0)) throw ConfigError("field bandwidth must be positive");
    const std::size_t d = region.dim();
    if (kernel.dim() != d) throw ConfigError("kernel and region dimensions differ");
    const auto taps = field_taps(kernel.base(), resolution);
    const std::size_t pad = taps.size() - 1;
    const double step = h / static_cast<double>(resolution);

    std::vector<std::size_t> out_shape(d);
    std::vector<std::size_t> shape(d);
    std::size_t total = 1;
    for (std::size_t j = 0; j < d; ++j) {
        const auto& ax = region.axis(j);
        out_shape[j] = static_cast<std::size_t>(std::floor((ax.hi - ax.lo) / step + 1e-9)) + 1;
        shape[j] = out_shape[j] + pad;
        total *= shape[j];
    }
    std::vector<double> field(total);
    for (auto& v : field) v = rng.normal();

    // Convolve axis by axis; each pass shrinks that axis by `pad`.
    for (std::size_t a = 0; a < d; ++a) {
        std::size_t outer = 1;
        std::size_t inner = 1;
        for (std::size_t j = 0; j < a; ++j) outer *= shape[j];
        for (std::size_t j = a + 1; j < d; ++j) inner *= shape[j];
        const std::size_t len_in = shape[a];
        const std::size_t len_out = out_shape[a];
        std::vector<double> next(outer * len_out * inner, 0.0);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t k = 0; k < len_out; ++k) {
                double* dst = next.data() + (o * len_out + k) * inner;
                for (std::size_t t = 0; t < taps.size(); ++t) {
                    const double c = taps[t];
                    if (c == 0.0) continue;
                    const double* src = field.data() + (o * len_in + k + t) * inner;
                    for (std::size_t q = 0; q < inner; ++q) dst[q] += c * src[q];
                }
            }
        field = std::move(next);
        shape[a] = len_out;
    }

    const double sd = std::sqrt(gaussian_field_variance(kernel, h, resolution));
    for (double& v : field) v /= sd;
    return FieldLattice{std::move(out_shape), step, std::move(field)};
}

double gaussian_field_sup(const ProductKernel& kernel, double h, const GridSpec& region, Stream& rng,
                          std::size_t resolution) {
    const auto f = gaussian_field(kernel, h, region, rng, resolution);
    double sup = 0.0;
    for (double v : f.values) sup = std::max(sup, std::abs(v));
    return sup;
}

}  // namespace gqcc
