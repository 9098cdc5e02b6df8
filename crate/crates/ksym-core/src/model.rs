//! The stochastic Lotka–Volterra model and its geometric structure.
//!
//! The state `(x, y)` lives in the open positive quadrant and evolves under
//! the Stratonovich SDE
//!
//! ```text
//! dx = x(-γ₂ y + η₂) dt + σ₂ x ∘ dW,
//! dy = y( γ₁ x - η₁) dt + σ₁ y ∘ dW,
//! ```
//!
//! with a single scalar Wiener process driving both components. The system is
//! a non-canonical Hamiltonian system: with
//!
//! ```text
//! H₀(x,y) = -γ₁ x + η₁ ln x - γ₂ y + η₂ ln y,
//! H₁(x,y) = -σ₁ ln x + σ₂ ln y,
//! B(x,y)  = [[0, xy], [-xy, 0]],
//! ```
//!
//! the drift is `B ∇H₀` and the diffusion is `B ∇H₁`. The inverse structure
//! matrix `K = B⁻¹` defines the preserved two-form `dx ∧ dy / (xy)`, which in
//! the log coordinates `u = ln x, v = ln y` is the canonical area `du ∧ dv`.
//! That observation — the log (Darboux) transform turns the system into a
//! canonical stochastic Hamiltonian system with *additive* noise — is what
//! the exponential-form integrators in [`crate::integrate`] exploit.

use crate::error::{Error, Result};
use crate::math;

/// A 2-vector `[x, y]`.
pub type Vec2 = [f64; 2];
/// A 2×2 matrix in row-major order.
pub type Mat2 = [[f64; 2]; 2];

/// The six model coefficients `(γ₁, γ₂, η₁, η₂, σ₁, σ₂)`.
///
/// `γ` are the predator–prey coupling rates, `η` the linear growth/decay
/// rates, and `σ` the multiplicative noise intensities (`σ₂` on `x`, `σ₁` on
/// `y`). Rates are nonnegative; the degenerate boundary values (zero coupling
/// or zero noise) are accepted because they are useful diagnostic limits for
/// the integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
}

impl ModelParams {
    /// Validates and builds a parameter set: everything finite, rates `γ, η`
    /// nonnegative.
    pub fn new(
        gamma1: f64,
        gamma2: f64,
        eta1: f64,
        eta2: f64,
        sigma1: f64,
        sigma2: f64,
    ) -> Result<Self> {
        let all = [gamma1, gamma2, eta1, eta2, sigma1, sigma2];
        if all.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("model coefficients must be finite"));
        }
        if gamma1 < 0.0 || gamma2 < 0.0 || eta1 < 0.0 || eta2 < 0.0 {
            return Err(Error::Domain("rates gamma and eta must be nonnegative"));
        }
        Ok(Self {
            gamma1,
            gamma2,
            eta1,
            eta2,
            sigma1,
            sigma2,
        })
    }

    /// The benchmark coefficient set used throughout the experiment suite:
    /// `γ₁ = γ₂ = η₂ = σ₁ = 1`, `η₁ = 3/2`, `σ₂ = 0`.
    ///
    /// It satisfies the coefficient identity of
    /// [`check_coefficient_condition`], so solutions stay positive and the
    /// Lyapunov generator is constant.
    pub fn lv_benchmark() -> Self {
        Self {
            gamma1: 1.0,
            gamma2: 1.0,
            eta1: 1.5,
            eta2: 1.0,
            sigma1: 1.0,
            sigma2: 0.0,
        }
    }
}

/// A phase point in the open positive quadrant.
///
/// Construction rejects non-positive or non-finite coordinates instead of
/// clamping them: positivity is a structural property of the model and of the
/// exponential-form integrators, so a violation is always a bug worth
/// surfacing, never data worth repairing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    x: f64,
    y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::InvalidState { x, y })
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }

    #[inline]
    pub fn as_vec(&self) -> Vec2 {
        [self.x, self.y]
    }

    /// The log-coordinate (Darboux) image `(u, v) = (ln x, ln y)`.
    pub fn to_log(&self) -> LogState {
        LogState {
            u: math::ln(self.x),
            v: math::ln(self.y),
        }
    }
}

/// Log coordinates `(u, v) = (ln x, ln y)` of a phase point.
///
/// In these coordinates the model becomes a canonical stochastic Hamiltonian
/// system with additive noise, and the preserved two-form is the plain area
/// `du ∧ dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogState {
    pub u: f64,
    pub v: f64,
}

impl LogState {
    /// Maps back to the positive quadrant, `(x, y) = (eᵘ, eᵛ)`.
    ///
    /// Errors only when `exp` overflows the double range.
    pub fn to_state(&self) -> Result<State> {
        State::new(math::exp(self.u), math::exp(self.v))
    }
}

/// Checks the coefficient identity `γ₁ = γ₂ = η₁ - σ₁²/2 = η₂ + σ₂²/2` up to
/// `tol`.
///
/// When it holds, the model admits a global positive solution and the
/// generator applied to the Lyapunov function `V = (x-1-ln x) + (y-1-ln y)`
/// is the constant `(σ₁² + σ₂²)/2` (see
/// [`crate::verify::generator_on_lyapunov`]).
pub fn check_coefficient_condition(p: &ModelParams, tol: f64) -> bool {
    coefficient_condition_residual(p) <= tol
}

/// Max absolute deviation from the coefficient identity; `0.0` when it holds
/// exactly.
pub fn coefficient_condition_residual(p: &ModelParams) -> f64 {
    let c = p.gamma1;
    let d1 = math::abs(c - p.gamma2);
    let d2 = math::abs(c - (p.eta1 - 0.5 * p.sigma1 * p.sigma1));
    let d3 = math::abs(c - (p.eta2 + 0.5 * p.sigma2 * p.sigma2));
    d1.max(d2).max(d3)
}

/// Stratonovich drift `(x(-γ₂y + η₂), y(γ₁x - η₁))`.
pub fn drift_stratonovich(s: State, p: &ModelParams) -> Vec2 {
    [
        s.x * (-p.gamma2 * s.y + p.eta2),
        s.y * (p.gamma1 * s.x - p.eta1),
    ]
}

/// Drift of the equivalent Itô form,
/// `(-γ₂xy + (η₂ + σ₂²/2)x, γ₁xy - (η₁ - σ₁²/2)y)`.
///
/// It differs from [`drift_stratonovich`] by the Itô–Stratonovich correction
/// `(σ₂²x/2, σ₁²y/2)`.
pub fn drift_ito(s: State, p: &ModelParams) -> Vec2 {
    drift_ito_raw(s.as_vec(), p)
}

/// Itô drift on raw coordinates: the comparator steppers keep evaluating it
/// after their iterates leave the positive quadrant, where no [`State`] can
/// exist.
pub(crate) fn drift_ito_raw(s: Vec2, p: &ModelParams) -> Vec2 {
    [
        -p.gamma2 * s[0] * s[1] + (p.eta2 + 0.5 * p.sigma2 * p.sigma2) * s[0],
        p.gamma1 * s[0] * s[1] - (p.eta1 - 0.5 * p.sigma1 * p.sigma1) * s[1],
    ]
}

/// Diffusion vector `(σ₂x, σ₁y)` multiplying the shared scalar noise.
pub fn diffusion(s: State, p: &ModelParams) -> Vec2 {
    [p.sigma2 * s.x, p.sigma1 * s.y]
}

/// The two Hamiltonians and their analytic gradients at `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonians {
    /// `H₀ = -γ₁x + η₁ ln x - γ₂y + η₂ ln y` (drift generator).
    pub h0: f64,
    /// `H₁ = -σ₁ ln x + σ₂ ln y` (diffusion generator).
    pub h1: f64,
    /// `∇H₀ = (-γ₁ + η₁/x, -γ₂ + η₂/y)`.
    pub grad_h0: Vec2,
    /// `∇H₁ = (-σ₁/x, σ₂/y)`.
    pub grad_h1: Vec2,
}

/// Evaluates both Hamiltonians and their gradients.
///
/// The defining decomposition — `structure_inverse(s) · grad_h0` equals the
/// Stratonovich drift and `structure_inverse(s) · grad_h1` equals the
/// diffusion — is exercised by the property suite.
pub fn hamiltonians(s: State, p: &ModelParams) -> Hamiltonians {
    let (lx, ly) = (math::ln(s.x), math::ln(s.y));
    Hamiltonians {
        h0: -p.gamma1 * s.x + p.eta1 * lx - p.gamma2 * s.y + p.eta2 * ly,
        h1: -p.sigma1 * lx + p.sigma2 * ly,
        grad_h0: [-p.gamma1 + p.eta1 / s.x, -p.gamma2 + p.eta2 / s.y],
        grad_h1: [-p.sigma1 / s.x, p.sigma2 / s.y],
    }
}

/// The structure matrix `K(x,y) = [[0, -1/(xy)], [1/(xy), 0]]` whose
/// associated two-form `dzᵀ K dz` is preserved by the exact flow.
///
/// Provided in closed form (never by inverting [`structure_inverse`]) so that
/// small `xy` causes no conditioning trouble.
pub fn structure_matrix(s: State) -> Mat2 {
    let k = 1.0 / (s.x * s.y);
    [[0.0, -k], [k, 0.0]]
}

/// The inverse structure matrix `B(x,y) = [[0, xy], [-xy, 0]]` generating the
/// dynamics: drift `= B ∇H₀`, diffusion `= B ∇H₁`.
pub fn structure_inverse(s: State) -> Mat2 {
    let b = s.x * s.y;
    [[0.0, b], [-b, 0.0]]
}

/// Jacobi-identity defect of the structure matrix at `s`:
/// `max over (i,j,k) of |∂K_ij/∂z_k + ∂K_jk/∂z_i + ∂K_ki/∂z_j|`
/// with analytic partial derivatives.
///
/// For this model the three terms cancel identically, so the defect is zero
/// to rounding; the function exists so the cancellation is *checked* rather
/// than assumed.
pub fn jacobi_identity_defect(s: State) -> f64 {
    // Analytic partials of K entries; axis 0 = ∂/∂x, axis 1 = ∂/∂y.
    // K₁₂ = -1/(xy): ∂/∂x = 1/(x²y), ∂/∂y = 1/(xy²); K₂₁ = -K₁₂; diag 0.
    let dk = |i: usize, j: usize, axis: usize| -> f64 {
        let (x, y) = (s.x, s.y);
        match (i, j, axis) {
            (0, 1, 0) => 1.0 / (x * x * y),
            (0, 1, 1) => 1.0 / (x * y * y),
            (1, 0, 0) => -1.0 / (x * x * y),
            (1, 0, 1) => -1.0 / (x * y * y),
            _ => 0.0,
        }
    };
    let mut worst = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let cyc = dk(i, j, k) + dk(j, k, i) + dk(k, i, j);
                worst = worst.max(math::abs(cyc));
            }
        }
    }
    worst
}
