#include "qfdi/kernels/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace qfdi::kern {

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2_fma() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

namespace {

struct Selection {
    const Kernels* table;
    Isa isa;
};

Selection resolve(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return {&scalar_kernels(), Isa::scalar};
        case Isa::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            if (cpu_has_avx2_fma()) return {&avx2_kernels(), Isa::avx2};
#endif
            throw std::runtime_error("kernels: avx2 requested but not supported");
        case Isa::automatic:
        default:
#if defined(__x86_64__) || defined(_M_X64)
            if (cpu_has_avx2_fma()) return {&avx2_kernels(), Isa::avx2};
#endif
            return {&scalar_kernels(), Isa::scalar};
    }
}

Selection initial() {
    if (const char* env = std::getenv("QFDI_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return resolve(Isa::scalar);
        if (std::strcmp(env, "avx2") == 0) return resolve(Isa::avx2);
    }
    return resolve(Isa::automatic);
}

Selection& state() {
    static Selection s = initial();
    return s;
}

}  // namespace

const Kernels& active() { return *state().table; }

void select(Isa isa) { state() = resolve(isa); }

Isa selected() { return state().isa; }

}  // namespace qfdi::kern
