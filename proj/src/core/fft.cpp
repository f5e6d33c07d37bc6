#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace pcb {
namespace {

struct PlanCache {
    std::mutex mutex;
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;

    ~PlanCache()
    {
        for (auto& kv : plans)
            fftw_destroy_plan(kv.second);
    }
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

fftw_plan get_plan(const std::vector<int>& dims, int sign)
{
    auto& c = cache();
    std::lock_guard<std::mutex> lock(c.mutex);
    auto key = std::make_pair(dims, sign);
    auto it = c.plans.find(key);
    if (it != c.plans.end())
        return it->second;
    std::size_t total = 1;
    for (int d : dims)
        total *= static_cast<std::size_t>(d);
    std::vector<cplx> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan)
        numeric_error("FFTW failed to create a plan");
    c.plans.emplace(key, plan);
    return plan;
}

} // namespace

void fft_inplace(cplx* data, const std::vector<int>& dims, int sign)
{
    fftw_plan plan = get_plan(dims, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, buf, buf);
}

} // namespace pcb
