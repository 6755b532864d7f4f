#pragma once

#include <vector>

#include "gqcc/asymptotic.hpp"
#include "gqcc/bandwidth.hpp"
#include "gqcc/bootstrap.hpp"
#include "gqcc/corridor.hpp"
#include "gqcc/data.hpp"
#include "gqcc/estimator.hpp"
#include "gqcc/kernel.hpp"
#include "gqcc/loss.hpp"
#include "gqcc/nuisance.hpp"

namespace gqcc {

struct AnalysisOptions {
    GridSpec grid = GridSpec::standard(2);
    BandwidthOptions bandwidth;
    UnivariateKernel kernel = UnivariateKernel::quartic();
    // false: stop after the fit (no nuisance smoothers)
    bool nuisance = true;
};

/// Everything a corridor needs: bandwidths, the fitted surface, residuals
/// at the design points and the nuisance surfaces.
struct Analysis {
    TaskSpec spec;
    ProductKernel kernel{UnivariateKernel::quartic(), 1};
    NuisanceKernels nuisance_kernels = NuisanceKernels::gaussian(1);
    BandwidthPlan plan;
    FitSurface fit;
    std::vector<double> residuals;
    NuisanceFit nuisance;
};

Analysis analyze(const Dataset& data, const TaskSpec& spec, const AnalysisOptions& opts);

struct CorridorOptions {
    CorridorMethod method = CorridorMethod::asymptotic;
    double alpha = 0.05;
    bool volume_normalization = false;
    BootstrapConfig bootstrap;
};

Corridor build_corridor(const Dataset& data, const Analysis& analysis, const CorridorOptions& opts);

// Cached per (kernel, dimension).
const KernelConstants& cached_kernel_constants(const ProductKernel& kernel);

}  // namespace gqcc
