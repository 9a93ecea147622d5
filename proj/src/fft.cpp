#include "mlens/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <new>

namespace mlens::fft {

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n) {
    void* p = fftw_malloc(n * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
}

template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept {
    fftw_free(p);
}

template struct FftwAllocator<std::complex<double>>;

namespace {

std::mutex g_planner_mutex;
std::map<std::pair<int, int>, fftw_plan> g_plans;  // (n, sign) -> in-place plan

fftw_plan plan_for(int n, int sign) {
    std::lock_guard<std::mutex> lock(g_planner_mutex);
    auto key = std::make_pair(n, sign);
    auto it = g_plans.find(key);
    if (it != g_plans.end()) return it->second;
    // Plan on a scratch buffer; execute later on any fftw_malloc'd array of
    // the same size via the new-array interface.
    fftw_complex* scratch = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    fftw_plan p = fftw_plan_dft_2d(n, n, scratch, scratch, sign, FFTW_ESTIMATE);
    fftw_free(scratch);
    g_plans.emplace(key, p);
    return p;
}

void execute(cvec& data, int n, int sign) {
    fftw_plan p = plan_for(n, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

}  // namespace

void forward2d(cvec& data, int n) { execute(data, n, FFTW_FORWARD); }
void backward2d(cvec& data, int n) { execute(data, n, FFTW_BACKWARD); }

}  // namespace mlens::fft
