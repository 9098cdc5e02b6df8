//! Thin wrappers over [`libm`] for the handful of transcendentals the crate
//! needs.
//!
//! The std float methods are unavailable in `no_std` builds, and routing every
//! call through `libm` also pins one deterministic implementation everywhere
//! (unit tests compile with std, the shipped library does not — both must
//! produce identical bits).

#[inline(always)]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline(always)]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline(always)]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline(always)]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline(always)]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline(always)]
pub(crate) fn powf(x: f64, p: f64) -> f64 {
    libm::pow(x, p)
}
