#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace rgflow::detail {

// FFTW planning is not thread-safe; execution through the new-array
// interface is. Plans are built once per (size, sign) under a mutex.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
        auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_dft_1d(n, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

/// Unnormalized in-place DFT, sum_j x_j exp(sign * 2 pi i jk / n).
inline void fft_inplace(std::vector<std::complex<double>>& data, int sign) {
    const int n = static_cast<int>(data.size());
    fftw_plan plan = PlanCache::instance().get(n, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

inline void forward_fft(std::vector<std::complex<double>>& data) { fft_inplace(data, FFTW_FORWARD); }
inline void backward_fft(std::vector<std::complex<double>>& data) { fft_inplace(data, FFTW_BACKWARD); }

}  // namespace rgflow::detail
