//! Numerical verification of the geometric claims.
//!
//! The central check: a one-step map `z₀ ↦ z₁` preserves the two-form
//! `dx ∧ dy / (xy)` iff its Jacobian `M` satisfies `Mᵀ K(z₁) M = K(z₀)`,
//! equivalently (in 2D) `det M = x₁y₁ / (x₀y₀)`. Both formulations are
//! evaluated on finite-difference Jacobians of the *shipped stepper code* —
//! not of a re-derived variational equation — and cross-checked, so a defect
//! measures the actual implementation.
//!
//! Also here: triangle phase areas in original and log coordinates, the
//! Lyapunov-generator constancy check, and Monte Carlo moment monitors.

use alloc::vec::Vec;

use crate::brownian;
use crate::error::{Error, Result};
use crate::integrate::{em_step, krk_step, kprk_step, Method, StepperConfig, Trajectory};
use crate::integrate::milstein_step;
use crate::math;
use crate::model::{Mat2, ModelParams, State, Vec2};

/// Default relative probe offset for finite-difference Jacobians.
pub const DEFAULT_FD_EPS: f64 = 1e-6;

/// A triangle of phase points, propagated vertexwise in the area studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub w1: State,
    pub w2: State,
    pub w3: State,
}

impl Triangle {
    pub fn new(w1: State, w2: State, w3: State) -> Self {
        Self { w1, w2, w3 }
    }

    pub fn vertices(&self) -> [State; 3] {
        [self.w1, self.w2, self.w3]
    }
}

/// Packages a stepper configuration as a uniform one-step closure
/// `(state, h, J) → raw output vector`, the shape consumed by
/// [`step_jacobian`] and [`k_symplectic_defect`].
pub fn one_step_map<'a>(
    cfg: &'a StepperConfig,
    p: &'a ModelParams,
) -> impl Fn(State, f64, f64) -> Result<Vec2> + 'a {
    move |s, h, j| match &cfg.kind {
        Method::Krk(t) => krk_step(s, t, p, h, j, cfg).map(|o| o.as_vec()),
        Method::Kprk(t) => kprk_step(s, t, p, h, j, cfg).map(|o| o.as_vec()),
        Method::Em => Ok(em_step(s, p, h, j)),
        Method::Milstein => Ok(milstein_step(s, p, h, j)),
    }
}

/// Central finite-difference Jacobian `M_ij = ∂(output_i)/∂(input_j)` of a
/// one-step map at `s`, with relative probe offset `fd_eps` per coordinate.
///
/// Step failures at probe points propagate. Note when differencing an
/// implicit stepper: its fixed-point tolerance should sit well below
/// `fd_eps · coordinate`, or solver noise dominates the quotient.
pub fn step_jacobian<F>(step: &F, s: State, h: f64, j: f64, fd_eps: f64) -> Result<Mat2>
where
    F: Fn(State, f64, f64) -> Result<Vec2>,
{
    if !(fd_eps > 0.0 && fd_eps < 0.5) {
        return Err(Error::Domain("finite-difference offset must lie in (0, 1/2)"));
    }
    let (x, y) = (s.x(), s.y());
    let (dx, dy) = (fd_eps * x, fd_eps * y);
    let xp = step(State::new(x + dx, y)?, h, j)?;
    let xm = step(State::new(x - dx, y)?, h, j)?;
    let yp = step(State::new(x, y + dy)?, h, j)?;
    let ym = step(State::new(x, y - dy)?, h, j)?;
    Ok([
        [(xp[0] - xm[0]) / (2.0 * dx), (yp[0] - ym[0]) / (2.0 * dy)],
        [(xp[1] - xm[1]) / (2.0 * dx), (yp[1] - ym[1]) / (2.0 * dy)],
    ])
}

/// Structure-preservation defect of a one-step map at `(s, h, J)`.
///
/// Route one evaluates `‖Mᵀ K(z₁) M − K(z₀)‖_max` with `K` the structure
/// matrix; route two evaluates the equivalent scalar form
/// `|det M − x₁y₁/(x₀y₀)| / |x₁y₁|`. The two routes are algebraically
/// identical, so they are cross-checked to 1e-9 and route one is returned;
/// disagreement reports an internal inconsistency rather than a defect.
pub fn k_symplectic_defect<F>(step: &F, s: State, h: f64, j: f64) -> Result<f64>
where
    F: Fn(State, f64, f64) -> Result<Vec2>,
{
    let m = step_jacobian(step, s, h, j, DEFAULT_FD_EPS)?;
    let z1 = step(s, h, j)?;
    let k0 = 1.0 / (s.x() * s.y());
    let k1 = 1.0 / (z1[0] * z1[1]);

    // Route one: full matrix sandwich.
    let k1m = [
        [-k1 * m[1][0], -k1 * m[1][1]],
        [k1 * m[0][0], k1 * m[0][1]],
    ];
    let t = [
        [
            m[0][0] * k1m[0][0] + m[1][0] * k1m[1][0],
            m[0][0] * k1m[0][1] + m[1][0] * k1m[1][1],
        ],
        [
            m[0][1] * k1m[0][0] + m[1][1] * k1m[1][0],
            m[0][1] * k1m[0][1] + m[1][1] * k1m[1][1],
        ],
    ];
    let k_s = crate::model::structure_matrix(s);
    let mut defect_matrix = 0.0_f64;
    for i in 0..2 {
        for jj in 0..2 {
            defect_matrix = defect_matrix.max(math::abs(t[i][jj] - k_s[i][jj]));
        }
    }

    // Route two: determinant form.
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let ratio = (z1[0] * z1[1]) / (s.x() * s.y());
    let defect_det = math::abs((det - ratio) * k1);

    if !(math::abs(defect_matrix - defect_det) <= 1e-9) {
        return Err(Error::Mismatch(
            "matrix and determinant defect routes disagree beyond 1e-9",
        ));
    }
    let _ = k0;
    Ok(defect_matrix)
}

/// Signed shoelace area of the triangle in the original `(x, y)` coordinates
/// (positive for counterclockwise vertex order).
pub fn euclid_area(tri: &Triangle) -> f64 {
    let [a, b, c] = tri.vertices();
    shoelace([a.x(), a.y()], [b.x(), b.y()], [c.x(), c.y()])
}

/// Signed shoelace area of the triangle's image under the log map — the
/// quantity a structure-preserving map conserves up to the small-triangle
/// curvature error, since the preserved two-form is exactly `du ∧ dv`.
pub fn log_area(tri: &Triangle) -> f64 {
    let [a, b, c] = tri.vertices();
    let (la, lb, lc) = (a.to_log(), b.to_log(), c.to_log());
    shoelace([la.u, la.v], [lb.u, lb.v], [lc.u, lc.v])
}

fn shoelace(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
}

/// The generator applied to the Lyapunov function
/// `V(x,y) = (x − 1 − ln x) + (y − 1 − ln y)`, evaluated analytically:
/// `𝓛V = a·∇V + ½ gᵀ(∇²V)g` with Itô drift `a` and diffusion `g`.
///
/// When the coefficient identity holds this is the constant
/// `(σ₁² + σ₂²)/2` at every state — the cancellation is evaluated, not
/// assumed, so perturbed coefficients show up as non-constancy.
pub fn generator_on_lyapunov(s: State, p: &ModelParams) -> f64 {
    let a = crate::model::drift_ito(s, p);
    let g = crate::model::diffusion(s, p);
    let (x, y) = (s.x(), s.y());
    let grad = [1.0 - 1.0 / x, 1.0 - 1.0 / y];
    let hess_term = 0.5 * ((g[0] / x) * (g[0] / x) + (g[1] / y) * (g[1] / y));
    a[0] * grad[0] + a[1] * grad[1] + hess_term
}

/// Per-time Monte Carlo means of `xᵖ + yᵖ` over a set of trajectories on one
/// shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    /// The shared time grid.
    pub times: Vec<f64>,
    /// Mean of `xᵖ + yᵖ` at each grid time.
    pub means: Vec<f64>,
    /// Max of `means` over the horizon (NaN if any mean is NaN).
    pub max_mean: f64,
}

/// Computes the empirical `p`-th moment series `E[Xⁿᵖ + Yⁿᵖ]` over
/// trajectories sharing one grid.
///
/// Raw comparator trajectories may carry non-positive states, for which
/// non-integer `p` produces NaN means — faithfully reported, never masked.
pub fn empirical_moments(trajs: &[Trajectory], p: f64) -> Result<MomentSeries> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Domain("moment order must be at least 1"));
    }
    let first = trajs.first().ok_or(Error::Domain("at least one trajectory required"))?;
    let times = first.times();
    for t in trajs {
        if t.times() != times {
            return Err(Error::Mismatch("trajectories do not share a time grid"));
        }
    }
    let n = times.len();
    let mut means = alloc::vec![0.0_f64; n];
    for t in trajs {
        for (k, s) in t.states().iter().enumerate() {
            means[k] += math::powf(s[0], p) + math::powf(s[1], p);
        }
    }
    let inv = 1.0 / trajs.len() as f64;
    for m in &mut means {
        *m *= inv;
    }
    let max_mean = means.iter().fold(f64::NEG_INFINITY, |acc, &m| {
        if acc.is_nan() || m.is_nan() {
            f64::NAN
        } else if m > acc {
            m
        } else {
            acc
        }
    });
    Ok(MomentSeries { times: times.to_vec(), means, max_mean })
}

/// `n` deterministic pseudo-random states, log-uniform over `[lo, hi]²`,
/// reproducible from `seed` — the probe sets of the defect scans.
pub fn sample_states(n: usize, seed: u64, lo: f64, hi: f64) -> Result<Vec<State>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain("state box must satisfy 0 < lo < hi < inf"));
    }
    let us = brownian::uniforms(seed, 0, 2 * n);
    let span = math::ln(hi / lo);
    (0..n)
        .map(|k| {
            State::new(
                lo * math::exp(us[2 * k] * span),
                lo * math::exp(us[2 * k + 1] * span),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::integrate;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn bench() -> ModelParams {
        ModelParams::lv_benchmark()
    }

    fn st(x: f64, y: f64) -> State {
        State::new(x, y).unwrap()
    }

    #[test]
    fn jacobian_of_identity_map_is_identity() {
        let p = bench();
        for cfg in [StepperConfig::builtin_scheme(1).unwrap(), StepperConfig::em()] {
            let step = one_step_map(&cfg, &p);
            let m = step_jacobian(&step, st(1.3, 0.8), 0.0, 0.0, DEFAULT_FD_EPS).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(m[i][j], want, epsilon = 1e-9);
                }
            }
        }
    }

    /// Frozen from the analytic Jacobian of the explicit comparator update:
    /// at (1,1), h=0.1, J=0 the map x₁ = x + h(−xy + x), y₁ = y + h(xy − y)
    /// has M = [[1 + h(1−y), −hx], [hy, 1 + h(x−1)]] = [[1, −0.1], [0.1, 1]].
    #[test]
    fn em_jacobian_matches_analytic_oracle() {
        let p = bench();
        let cfg = StepperConfig::em();
        let step = one_step_map(&cfg, &p);
        let m = step_jacobian(&step, st(1.0, 1.0), 0.1, 0.0, DEFAULT_FD_EPS).unwrap();
        let want = [[1.0, -0.1], [0.1, 1.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m[i][j], want[i][j], epsilon = 1e-6);
            }
        }
    }

    /// Frozen analytic Jacobian of the explicit two-stage scheme at (1,1),
    /// h=0.1, J=0, plus its determinant identity det M = X₁Y₁/(X₀Y₀).
    #[test]
    fn explicit_scheme_jacobian_and_determinant() {
        let p = bench();
        let cfg = StepperConfig::builtin_scheme(4).unwrap();
        let step = one_step_map(&cfg, &p);
        let m = step_jacobian(&step, st(1.0, 1.0), 0.1, 0.0, DEFAULT_FD_EPS).unwrap();
        let want = [
            [0.997_583_454_629_571_1, -0.097_772_093_597_596_2],
            [0.095_019_751_994_285_31, 0.946_696_247_116_636_4],
        ];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m[i][j], want[i][j], epsilon = 1e-6);
            }
        }
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert_abs_diff_eq!(det, 0.953_698_792_769_069_9, epsilon = 1e-6);
    }

    #[test]
    fn structure_preserving_defect_is_fd_small() {
        let p = bench();
        let cfg = StepperConfig::builtin_scheme(1)
            .unwrap()
            .with_fixed_point(1e-14, 400);
        let step = one_step_map(&cfg, &p);
        let h = 0.03125_f64; // 2^-5
        let sqrt_h = h.sqrt();
        for s in sample_states(5, 17, 0.1, 10.0).unwrap() {
            for &j in &[0.0, sqrt_h, -sqrt_h] {
                let d = k_symplectic_defect(&step, s, h, j).unwrap();
                assert!(d <= 1e-6, "defect {d} at ({}, {}) J={j}", s.x(), s.y());
            }
        }
    }

    /// Frozen closed form: for the Milstein map at J=0 the defect equals
    /// h²xy/(x₁y₁); at (1,7), h=2⁻⁵ that is 16/13104 ≈ 1.2210e-3. The map is
    /// quadratic, so central differences are exact and the FD value must hit
    /// the closed form to near rounding.
    #[test]
    fn milstein_defect_matches_closed_form() {
        let p = bench();
        let cfg = StepperConfig::milstein();
        let step = one_step_map(&cfg, &p);
        let d = k_symplectic_defect(&step, st(1.0, 7.0), 0.03125, 0.0).unwrap();
        assert!(d > 1e-4);
        assert_relative_eq!(d, 1.221_001_221_001_221e-3, max_relative = 1e-6);
    }

    #[test]
    fn defect_vanishes_at_zero_step() {
        let p = bench();
        for cfg in [
            StepperConfig::builtin_scheme(2).unwrap(),
            StepperConfig::em(),
            StepperConfig::milstein(),
        ] {
            let step = one_step_map(&cfg, &p);
            let d = k_symplectic_defect(&step, st(2.0, 3.0), 0.0, 0.0).unwrap();
            assert!(d <= 1e-9, "zero-step defect {d}");
        }
    }

    #[test]
    fn comparator_defect_shrinks_with_h() {
        let p = bench();
        for cfg in [StepperConfig::em(), StepperConfig::milstein()] {
            let step = one_step_map(&cfg, &p);
            let coarse = k_symplectic_defect(&step, st(2.0, 3.0), 0.0625, 0.0).unwrap();
            let fine = k_symplectic_defect(&step, st(2.0, 3.0), 0.015625, 0.0).unwrap();
            assert!(
                coarse >= 4.0 * fine || (coarse < 1e-8 && fine < 1e-8),
                "defect scaling violated: {coarse} vs {fine}"
            );
        }
    }

    #[test]
    fn triangle_areas() {
        let paper = Triangle::new(st(1.0, 7.0), st(7.0, 1.0), st(2.0, 8.0));
        assert_relative_eq!(euclid_area(&paper), 6.0, max_relative = 1e-14);
        // frozen shoelace of ((0, ln7), (ln7, 0), (ln2, ln8))
        assert_relative_eq!(
            log_area(&paper),
            0.804_321_112_783_110_9,
            max_relative = 1e-14
        );

        let unit = Triangle::new(st(1.0, 1.0), st(2.0, 1.0), st(1.0, 2.0));
        assert_eq!(euclid_area(&unit), 0.5);

        let e = core::f64::consts::E;
        let log_unit = Triangle::new(st(1.0, 1.0), st(e, 1.0), st(1.0, e));
        assert_relative_eq!(log_area(&log_unit), 0.5, max_relative = 1e-14);

        // orientation flips the sign
        let flipped = Triangle::new(st(7.0, 1.0), st(1.0, 7.0), st(2.0, 8.0));
        assert_relative_eq!(euclid_area(&flipped), -6.0, max_relative = 1e-14);

        // collinear in each chart
        let col = Triangle::new(st(1.0, 1.0), st(2.0, 2.0), st(3.0, 3.0));
        assert_abs_diff_eq!(euclid_area(&col), 0.0, epsilon = 1e-14);
        let col_log = Triangle::new(st(1.0, 1.0), st(e, e), st(e * e, e * e));
        assert_abs_diff_eq!(log_area(&col_log), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn lyapunov_generator_is_constant_under_coefficient_identity() {
        let p = bench();
        assert_relative_eq!(generator_on_lyapunov(st(2.0, 3.0), &p), 0.5, epsilon = 1e-14);
        assert_relative_eq!(generator_on_lyapunov(st(0.2, 9.0), &p), 0.5, epsilon = 1e-13);

        // 20×20 grid constancy to 1e-12
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..20 {
            for j in 0..20 {
                let x = 0.1 + 9.9 * (i as f64) / 19.0;
                let y = 0.1 + 9.9 * (j as f64) / 19.0;
                let v = generator_on_lyapunov(st(x, y), &p);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        assert!(hi - lo <= 1e-12, "generator range {} over grid", hi - lo);

        // zero-noise identity-satisfying set: the generator vanishes
        let p0 = ModelParams::new(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(generator_on_lyapunov(st(2.0, 3.0), &p0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn lyapunov_generator_detects_broken_identity() {
        // γ₂ perturbed by +0.5: frozen hand value at (2,3) is −1.0
        let p = ModelParams::new(1.0, 1.5, 1.5, 1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(generator_on_lyapunov(st(2.0, 3.0), &p), -1.0, max_relative = 1e-14);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..20 {
            for j in 0..20 {
                let x = 0.1 + 9.9 * (i as f64) / 19.0;
                let y = 0.1 + 9.9 * (j as f64) / 19.0;
                let v = generator_on_lyapunov(st(x, y), &p);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        assert!(hi - lo >= 0.1, "perturbed generator range {} too small", hi - lo);
    }

    #[test]
    fn moments_of_constant_trajectory() {
        // all-zero coefficients freeze the state, so the moment series is flat
        let p = ModelParams::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let g = brownian::sample(1.0, 8, 1, 0).unwrap();
        let cfg = StepperConfig::builtin_scheme(4).unwrap();
        let t = integrate(st(1.0, 1.0), &g, &cfg, &p).unwrap();
        let m = empirical_moments(core::slice::from_ref(&t), 2.0).unwrap();
        for v in &m.means {
            assert_relative_eq!(*v, 2.0, max_relative = 1e-12);
        }
        assert_relative_eq!(m.max_mean, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn first_moment_is_mean_of_sums() {
        let p = bench();
        let g0 = brownian::sample(1.0, 16, 5, 0).unwrap();
        let g1 = brownian::sample(1.0, 16, 5, 1).unwrap();
        let cfg = StepperConfig::builtin_scheme(4).unwrap();
        let t0 = integrate(st(1.0, 2.0), &g0, &cfg, &p).unwrap();
        let t1 = integrate(st(1.0, 2.0), &g1, &cfg, &p).unwrap();
        let m = empirical_moments(&[t0.clone(), t1.clone()], 1.0).unwrap();
        for k in 0..m.times.len() {
            let want = 0.5
                * (t0.states()[k][0] + t0.states()[k][1] + t1.states()[k][0]
                    + t1.states()[k][1]);
            assert_relative_eq!(m.means[k], want, max_relative = 1e-14);
        }
    }

    #[test]
    fn moments_domain_errors() {
        let p = bench();
        let cfg = StepperConfig::builtin_scheme(4).unwrap();
        let a = integrate(
            st(1.0, 2.0),
            &brownian::sample(1.0, 8, 5, 0).unwrap(),
            &cfg,
            &p,
        )
        .unwrap();
        let b = integrate(
            st(1.0, 2.0),
            &brownian::sample(1.0, 16, 5, 0).unwrap(),
            &cfg,
            &p,
        )
        .unwrap();
        assert!(empirical_moments(&[], 2.0).is_err());
        assert!(empirical_moments(&[a.clone()], 0.5).is_err());
        assert!(empirical_moments(&[a, b], 2.0).is_err());
    }

    #[test]
    fn sampled_probe_states_live_in_the_box() {
        let states = sample_states(20, 123, 0.1, 10.0).unwrap();
        assert_eq!(states.len(), 20);
        for s in &states {
            assert!(s.x() >= 0.1 && s.x() <= 10.0);
            assert!(s.y() >= 0.1 && s.y() <= 10.0);
        }
        // deterministic
        assert_eq!(states, sample_states(20, 123, 0.1, 10.0).unwrap());
        assert!(sample_states(5, 1, -1.0, 2.0).is_err());
    }
}
