#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <fftw3.h>

#include "modeflow/core/error.hpp"

namespace modeflow {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

namespace detail {

// FFTW planning is not thread-safe; execution of an existing plan on new arrays is.
// Plans are created with FFTW_ESTIMATE so the chosen algorithm (and therefore every
// output bit) does not depend on run-time measurements.
class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<fftw_complex> scratch_in(n), scratch_out(n);
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), scratch_in.data(), scratch_out.data(),
                                       sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (p == nullptr) throw Error("fftw: plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void execute(std::span<const cplx> in, std::span<cplx> out, int sign)
{
    if (in.size() != out.size()) throw ShapeError("fft: input and output lengths differ");
    if (in.empty()) return;
    fftw_plan p = PlanCache::instance().get(in.size(), sign);
    // fftw_execute_dft does not write to its input for out-of-place complex transforms.
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    if (src == dst) {
        CVector tmp(in.begin(), in.end());
        fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(tmp.data()), dst);
    } else {
        fftw_execute_dft(p, src, dst);
    }
}

} // namespace detail

/// Unnormalized forward DFT: X_k = sum_j x_j exp(-2 pi i jk/N).
inline CVector fft(std::span<const cplx> in)
{
    CVector out(in.size());
    detail::execute(in, out, FFTW_FORWARD);
    return out;
}

/// Inverse DFT including the 1/N factor, so ifft(fft(x)) == x.
inline CVector ifft(std::span<const cplx> in)
{
    CVector out(in.size());
    detail::execute(in, out, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(in.size());
    for (auto& v : out) v *= scale;
    return out;
}

inline void fft_inplace(std::span<cplx> data) { detail::execute(data, data, FFTW_FORWARD); }

inline void ifft_inplace(std::span<cplx> data)
{
    detail::execute(data, data, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(data.size());
    for (auto& v : data) v *= scale;
}

} // namespace modeflow
