#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace cnslab {

/**
 * @brief Unnormalised 1-D complex DFTs through FFTW.
 *
 * Plans are created once per (N, direction) with FFTW_ESTIMATE, so results do not depend
 * on timing. Planning is serialised; execution uses the new-array interface and is safe
 * from several threads.
 */
class Fft {
public:
    static void forward(std::vector<std::complex<double>>& a) { run(a, FFTW_FORWARD); }
    static void backward(std::vector<std::complex<double>>& a) { run(a, FFTW_BACKWARD); }

private:
    static fftw_plan plan(int n, int sign) {
        static std::mutex mu;
        static std::map<std::pair<int, int>, fftw_plan> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_pair(n, sign);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        std::vector<std::complex<double>> tmp(n);
        auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
        fftw_plan pl = fftw_plan_dft_1d(n, p, p, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache.emplace(key, pl);
        return pl;
    }

    static void run(std::vector<std::complex<double>>& a, int sign) {
        auto* p = reinterpret_cast<fftw_complex*>(a.data());
        fftw_execute_dft(plan(static_cast<int>(a.size()), sign), p, p);
    }
};

} // namespace cnslab
