#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <new>
#include <utility>

// Thin RAII-friendly layer over FFTW for in-place 2-D complex transforms.
//
// Plans are created with FFTW_ESTIMATE on purpose: FFTW_MEASURE picks the
// algorithm by timing, which can differ from run to run and change results in
// the last ulp -- that would break the byte-identical-output guarantee. Plan
// creation is serialized (the FFTW planner is not thread safe); execution via
// fftw_execute_dft is thread safe and is used concurrently by trial workers.
namespace fsolink::fft {

// Allocator backed by fftw_malloc so every field buffer satisfies FFTW's
// SIMD alignment and plans are reusable across buffers.
template <typename T>
struct FftwAllocator {
    using value_type = T;

    FftwAllocator() = default;
    template <typename U>
    FftwAllocator(const FftwAllocator<U>&) {}

    T* allocate(std::size_t n) {
        void* p = fftw_malloc(n * sizeof(T));
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { fftw_free(p); }

    bool operator==(const FftwAllocator&) const { return true; }
};

using ComplexBuffer = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

namespace detail {
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

inline fftw_plan get_plan(int n, int sign) {
    static std::map<std::pair<int, int>, fftw_plan> cache;
    std::lock_guard lock(planner_mutex());
    auto it = cache.find({n, sign});
    if (it != cache.end()) return it->second;
    ComplexBuffer scratch(static_cast<std::size_t>(n) * n);
    fftw_plan p = fftw_plan_dft_2d(n, n,
                                   reinterpret_cast<fftw_complex*>(scratch.data()),
                                   reinterpret_cast<fftw_complex*>(scratch.data()),
                                   sign, FFTW_ESTIMATE);
    cache.emplace(std::pair{n, sign}, p);
    return p;
}
} // namespace detail

// Unnormalized in-place forward DFT of an n-by-n complex array.
inline void forward_2d(std::complex<double>* data, int n) {
    fftw_plan p = detail::get_plan(n, FFTW_FORWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

// Unnormalized in-place backward DFT (forward followed by backward scales by n*n).
inline void backward_2d(std::complex<double>* data, int n) {
    fftw_plan p = detail::get_plan(n, FFTW_BACKWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

} // namespace fsolink::fft
