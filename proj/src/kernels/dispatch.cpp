#include "semmec/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace semmec::kernels {

namespace {

const Table kScalar{Isa::scalar, "scalar", &scalar::downlink_power, &scalar::remote_freq};
#if defined(SEMMEC_HAVE_AVX2)
const Table kAvx2{Isa::avx2, "avx2", &avx2::downlink_power, &avx2::remote_freq};
#endif
#if defined(SEMMEC_HAVE_NEON)
const Table kNeon{Isa::neon, "neon", &neon::downlink_power, &neon::remote_freq};
#endif

const Table& pick() {
    if (const char* env = std::getenv("SEMMEC_ISA"); env && *env && std::string(env) != "auto")
        return table(parse_isa(env));
    if (available(Isa::avx2)) return table(Isa::avx2);
    if (available(Isa::neon)) return table(Isa::neon);
    return kScalar;
}

} // namespace

bool available(Isa isa) {
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(SEMMEC_HAVE_AVX2)
        return __builtin_cpu_supports("avx2");
#else
        return false;
#endif
    case Isa::neon:
#if defined(SEMMEC_HAVE_NEON)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const Table& table(Isa isa) {
    if (!available(isa)) throw std::invalid_argument("kernel variant not available on this machine");
    switch (isa) {
#if defined(SEMMEC_HAVE_AVX2)
    case Isa::avx2: return kAvx2;
#endif
#if defined(SEMMEC_HAVE_NEON)
    case Isa::neon: return kNeon;
#endif
    default: return kScalar;
    }
}

const Table& active() {
    static const Table& t = pick();
    return t;
}

Isa parse_isa(std::string_view name) {
    if (name == "scalar") return Isa::scalar;
    if (name == "avx2") return Isa::avx2;
    if (name == "neon") return Isa::neon;
    throw std::invalid_argument("unknown kernel variant '" + std::string(name) + "'");
}

} // namespace semmec::kernels
