#include "ilgaco/kernels.hpp"

#include <cstdlib>
#include <string>

#include "ilgaco/error.hpp"

namespace ilgaco::kernels {

#if !defined(ILGACO_HAVE_AVX2)
const Backend* avx2_backend() { return nullptr; }
#endif

bool avx2_supported() {
#if defined(ILGACO_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return avx2_backend() != nullptr && __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

const Backend* g_active = nullptr;

const Backend* pick_default() {
    if (const char* env = std::getenv("ILGACO_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") {
            return &scalar_backend();
        }
        if (want == "avx2" && avx2_supported()) {
            return avx2_backend();
        }
        warn("ILGACO_KERNELS=" + want + " not available, using default backend");
    }
    if (avx2_supported()) {
        return avx2_backend();
    }
    return &scalar_backend();
}

}  // namespace

const Backend& active() {
    if (g_active == nullptr) {
        g_active = pick_default();
    }
    return *g_active;
}

void select(std::string_view name) {
    if (name == "scalar") {
        g_active = &scalar_backend();
        return;
    }
    if (name == "avx2") {
        if (!avx2_supported()) {
            throw_usage("avx2 kernel backend not supported on this CPU/build");
        }
        g_active = avx2_backend();
        return;
    }
    throw_validation("unknown kernel backend: " + std::string(name));
}

}  // namespace ilgaco::kernels
