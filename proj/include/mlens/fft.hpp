#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mlens::fft {

/// Allocator backed by fftw_malloc so buffers satisfy FFTW's SIMD alignment.
template <class T>
struct FftwAllocator {
    using value_type = T;
    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U>&) {}
    T* allocate(std::size_t n);
    void deallocate(T* p, std::size_t) noexcept;
    bool operator==(const FftwAllocator&) const { return true; }
};

using cvec = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

/// In-place 2D complex DFT on an n-by-n row-major buffer.
/// Plans are cached per size (FFTW_ESTIMATE, deterministic) and planning is
/// serialized; execution is thread-safe and bit-identical across worker counts.
/// Unnormalized, matching the usual DFT convention: forward uses exp(-2*pi*i*f*x).
void forward2d(cvec& data, int n);
void backward2d(cvec& data, int n);  // unnormalized inverse; caller divides by n*n

}  // namespace mlens::fft
