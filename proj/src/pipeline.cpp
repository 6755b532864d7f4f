#include "gqcc/pipeline.hpp"

#include <map>
#include <mutex>
#include <sstream>
#include <utility>

#include "gqcc/errors.hpp"

namespace gqcc {

const KernelConstants& cached_kernel_constants(const ProductKernel& kernel) {
    static std::mutex mutex;
    static std::map<std::pair<KernelId, std::size_t>, KernelConstants> cache;
    const std::lock_guard lock(mutex);
    const auto key = std::make_pair(kernel.base().id(), kernel.dim());
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, kernel_constants(kernel)).first;
    return it->second;
}

Analysis analyze(const Dataset& data, const TaskSpec& spec, const AnalysisOptions& opts) {
    spec.validate();
    if (opts.grid.dim() != data.dim())
        throw ConfigError("grid has " + std::to_string(opts.grid.dim()) + " axes but the data have " +
                          std::to_string(data.dim()) + " covariates");
    Analysis a;
    a.spec = spec;
    a.kernel = ProductKernel(opts.kernel, data.dim());
    a.nuisance_kernels = NuisanceKernels::gaussian(data.dim());
    auto h = estimation_bandwidths(data, spec, opts.bandwidth);
    const double guard = support_guard_factor(data, h, opts.grid, opts.kernel.support_radius(),
                                              opts.bandwidth.min_neighbors);
    for (double& v : h) v *= guard;
    a.residuals = fit_residuals(data, spec, a.kernel, h);
    a.plan = complete_plan(data, std::move(h), a.residuals, opts.bandwidth);
    if (guard > 1.0) {
        std::ostringstream os;
        os << "estimation bandwidth raised by a factor " << guard << " so every grid node has "
           << opts.bandwidth.min_neighbors << " neighbours";
        a.plan.warnings.push_back(os.str());
    }
    a.fit = fit_surface(data, spec, a.kernel, a.plan.h, opts.grid);
    if (opts.nuisance) a.nuisance = compute_nuisance(data, a.residuals, a.fit, spec, a.plan, a.nuisance_kernels);
    return a;
}

Corridor build_corridor(const Dataset& data, const Analysis& analysis, const CorridorOptions& opts) {
    if (opts.method == CorridorMethod::asymptotic) {
        AsymptoticOptions ao;
        ao.alpha = opts.alpha;
        ao.volume_normalization = opts.volume_normalization;
        return asymptotic_cc(analysis.fit, analysis.nuisance, analysis.spec, analysis.plan,
                             cached_kernel_constants(analysis.kernel), data.size(), ao);
    }
    const BootstrapInputs in{data,           analysis.residuals, analysis.fit,    analysis.nuisance,
                             analysis.spec,  analysis.plan,      analysis.kernel, analysis.nuisance_kernels};
    return bootstrap_cc(in, opts.bootstrap, opts.alpha);
}

}  // namespace gqcc
