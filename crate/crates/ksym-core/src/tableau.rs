//! Stochastic Runge–Kutta coefficient tableaus and their structure/order
//! conditions.
//!
//! A (non-partitioned) method is defined by stage matrices `A`, `B` and
//! weight vectors `α`, `β`; a partitioned method carries a second set
//! `Ã, B̃, α̃, β̃` used for the `y`-component stages. The geometric requirement
//! — that the one-step map preserve the two-form `dx ∧ dy / (xy)` — is
//! equivalent to bilinear algebraic conditions on the coefficients, evaluated
//! here as *residuals* (max absolute deviation) rather than booleans so that
//! perturbation tests and diagnostics can measure how badly a tableau fails.
//!
//! The four built-in schemes use only halves, quarters and eighths, all exact
//! in binary floating point, so their residuals are exactly `0.0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Coefficients `(A, B, α, β)` of an s-stage stochastic Runge–Kutta method.
///
/// `A` weights the drift stage sums, `B` the noise stage sums; `α`, `β` are
/// the corresponding update weights.
#[derive(Debug, Clone, PartialEq)]
pub struct KrkTableau {
    s: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

/// Coefficients of an s-stage *partitioned* method: `(A, B, α, β)` drive the
/// `x`-stages and `(Ã, B̃, α̃, β̃)` the `y`-stages.
#[derive(Debug, Clone, PartialEq)]
pub struct KprkTableau {
    s: usize,
    a: Vec<f64>,
    a_t: Vec<f64>,
    b: Vec<f64>,
    b_t: Vec<f64>,
    alpha: Vec<f64>,
    alpha_t: Vec<f64>,
    beta: Vec<f64>,
    beta_t: Vec<f64>,
}

/// Either tableau kind, as returned by [`builtin`].
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeTableau {
    Krk(KrkTableau),
    Kprk(KprkTableau),
}

/// One node of the stage dependency graph: the i-th `x` or `y` stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageVar {
    X(usize),
    Y(usize),
}

impl KrkTableau {
    /// Builds a tableau from row-major `s×s` matrices and length-`s` weights.
    pub fn new(s: usize, a: Vec<f64>, b: Vec<f64>, alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if s == 0 {
            return Err(Error::Domain("stage count must be at least 1"));
        }
        if a.len() != s * s || b.len() != s * s || alpha.len() != s || beta.len() != s {
            return Err(Error::Mismatch("tableau arrays disagree with stage count"));
        }
        Ok(Self { s, a, b, alpha, beta })
    }

    #[inline]
    pub fn stages(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.s + j]
    }

    #[inline]
    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.s + j]
    }

    #[inline]
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    #[inline]
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Max residual of the three bilinear structure-preservation families
    ///
    /// ```text
    /// α_i a_ij + α_j a_ji = α_i α_j,
    /// α_i b_ij + β_j a_ji = α_i β_j,
    /// β_i b_ij + β_j b_ji = β_i β_j.
    /// ```
    pub fn symplectic_residual(&self) -> f64 {
        let s = self.s;
        let (al, be) = (&self.alpha, &self.beta);
        let mut worst = 0.0_f64;
        for i in 0..s {
            for j in 0..s {
                let f1 = al[i] * self.a(i, j) + al[j] * self.a(j, i) - al[i] * al[j];
                let f2 = al[i] * self.b(i, j) + be[j] * self.a(j, i) - al[i] * be[j];
                let f3 = be[i] * self.b(i, j) + be[j] * self.b(j, i) - be[i] * be[j];
                worst = worst.max(math::abs(f1)).max(math::abs(f2)).max(math::abs(f3));
            }
        }
        worst
    }

    /// Max of `|Σα - 1|` and `|Σβ - 1|` — the strong order-one conditions.
    pub fn order_residual(&self) -> f64 {
        let sum = |w: &[f64]| w.iter().sum::<f64>();
        math::abs(sum(&self.alpha) - 1.0).max(math::abs(sum(&self.beta) - 1.0))
    }

    /// Number of independently perturbable coefficients (`2s² + 2s`).
    pub fn coefficient_count(&self) -> usize {
        2 * self.s * self.s + 2 * self.s
    }

    /// Returns a copy with coefficient `slot` (see [`Self::coefficient_count`];
    /// order: `A` row-major, `B` row-major, `α`, `β`) shifted by `eps`.
    pub fn perturbed(&self, slot: usize, eps: f64) -> Self {
        let mut t = self.clone();
        let n = self.s * self.s;
        match slot {
            i if i < n => t.a[i] += eps,
            i if i < 2 * n => t.b[i - n] += eps,
            i if i < 2 * n + self.s => t.alpha[i - 2 * n] += eps,
            i => t.beta[(i - 2 * n - self.s) % self.s] += eps,
        }
        t
    }

    /// The equivalent partitioned tableau with both coefficient sets equal:
    /// the non-partitioned family is exactly this diagonal embedding.
    pub fn to_partitioned(&self) -> KprkTableau {
        KprkTableau {
            s: self.s,
            a: self.a.clone(),
            a_t: self.a.clone(),
            b: self.b.clone(),
            b_t: self.b.clone(),
            alpha: self.alpha.clone(),
            alpha_t: self.alpha.clone(),
            beta: self.beta.clone(),
            beta_t: self.beta.clone(),
        }
    }
}

impl KprkTableau {
    /// Builds a partitioned tableau from row-major matrices and weights.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s: usize,
        a: Vec<f64>,
        a_t: Vec<f64>,
        b: Vec<f64>,
        b_t: Vec<f64>,
        alpha: Vec<f64>,
        alpha_t: Vec<f64>,
        beta: Vec<f64>,
        beta_t: Vec<f64>,
    ) -> Result<Self> {
        if s == 0 {
            return Err(Error::Domain("stage count must be at least 1"));
        }
        let mat_ok = [&a, &a_t, &b, &b_t].iter().all(|m| m.len() == s * s);
        let vec_ok = [&alpha, &alpha_t, &beta, &beta_t].iter().all(|v| v.len() == s);
        if !mat_ok || !vec_ok {
            return Err(Error::Mismatch("tableau arrays disagree with stage count"));
        }
        Ok(Self { s, a, a_t, b, b_t, alpha, alpha_t, beta, beta_t })
    }

    #[inline]
    pub fn stages(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.s + j]
    }

    #[inline]
    pub fn a_t(&self, i: usize, j: usize) -> f64 {
        self.a_t[i * self.s + j]
    }

    #[inline]
    pub fn b(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.s + j]
    }

    #[inline]
    pub fn b_t(&self, i: usize, j: usize) -> f64 {
        self.b_t[i * self.s + j]
    }

    #[inline]
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    #[inline]
    pub fn alpha_t(&self) -> &[f64] {
        &self.alpha_t
    }

    #[inline]
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    #[inline]
    pub fn beta_t(&self) -> &[f64] {
        &self.beta_t
    }

    /// Max residual over the five structure-preservation families
    ///
    /// ```text
    /// α_i = α̃_i,            β_i = β̃_i,
    /// α_i ã_ij + α̃_j a_ji = α_i α̃_j,
    /// β_i ã_ij + α̃_j b_ji = β_i α̃_j,
    /// α_i b̃_ij + β̃_j a_ji = α_i β̃_j,
    /// β_i b̃_ij + β̃_j b_ji = β_i β̃_j.
    /// ```
    pub fn symplectic_residual(&self) -> f64 {
        let s = self.s;
        let (al, alt) = (&self.alpha, &self.alpha_t);
        let (be, bet) = (&self.beta, &self.beta_t);
        let mut worst = 0.0_f64;
        for i in 0..s {
            worst = worst.max(math::abs(al[i] - alt[i]));
            worst = worst.max(math::abs(be[i] - bet[i]));
            for j in 0..s {
                let fa = al[i] * self.a_t(i, j) + alt[j] * self.a(j, i) - al[i] * alt[j];
                let fb = be[i] * self.a_t(i, j) + alt[j] * self.b(j, i) - be[i] * alt[j];
                let fc = al[i] * self.b_t(i, j) + bet[j] * self.a(j, i) - al[i] * bet[j];
                let fd = be[i] * self.b_t(i, j) + bet[j] * self.b(j, i) - be[i] * bet[j];
                worst = worst
                    .max(math::abs(fa))
                    .max(math::abs(fb))
                    .max(math::abs(fc))
                    .max(math::abs(fd));
            }
        }
        worst
    }

    /// Max of `|Σα-1|, |Σβ-1|, |Σα̃-1|, |Σβ̃-1|`.
    pub fn order_residual(&self) -> f64 {
        let res = |w: &[f64]| math::abs(w.iter().sum::<f64>() - 1.0);
        res(&self.alpha)
            .max(res(&self.beta))
            .max(res(&self.alpha_t))
            .max(res(&self.beta_t))
    }

    /// Number of independently perturbable coefficients (`4s² + 4s`).
    pub fn coefficient_count(&self) -> usize {
        4 * self.s * self.s + 4 * self.s
    }

    /// Returns a copy with coefficient `slot` (order: `A, Ã, B, B̃` row-major,
    /// then `α, α̃, β, β̃`) shifted by `eps`.
    pub fn perturbed(&self, slot: usize, eps: f64) -> Self {
        let mut t = self.clone();
        let n = self.s * self.s;
        let s = self.s;
        match slot {
            i if i < n => t.a[i] += eps,
            i if i < 2 * n => t.a_t[i - n] += eps,
            i if i < 3 * n => t.b[i - 2 * n] += eps,
            i if i < 4 * n => t.b_t[i - 3 * n] += eps,
            i if i < 4 * n + s => t.alpha[i - 4 * n] += eps,
            i if i < 4 * n + 2 * s => t.alpha_t[i - 4 * n - s] += eps,
            i if i < 4 * n + 3 * s => t.beta[i - 4 * n - 2 * s] += eps,
            i => t.beta_t[(i - 4 * n - 3 * s) % s] += eps,
        }
        t
    }

    /// Topological stage ordering if the method is explicit: each returned
    /// node depends only on nodes before it. `x`-stage `i` depends on
    /// `y`-stage `j` iff `a_ij ≠ 0`, and `y`-stage `i` on `x`-stage `j` iff
    /// `ã_ij ≠ 0` (the noise matrices multiply the step's constant increment,
    /// creating no dependencies). Returns `None` when the graph has a cycle,
    /// i.e. the method is genuinely implicit.
    pub fn explicit_stage_order(&self) -> Option<Vec<StageVar>> {
        let s = self.s;
        let mut done_x = vec![false; s];
        let mut done_y = vec![false; s];
        let mut order = Vec::with_capacity(2 * s);
        while order.len() < 2 * s {
            let next = (0..s)
                .find(|&i| !done_x[i] && (0..s).all(|j| self.a(i, j) == 0.0 || done_y[j]))
                .map(StageVar::X)
                .or_else(|| {
                    (0..s)
                        .find(|&i| {
                            !done_y[i] && (0..s).all(|j| self.a_t(i, j) == 0.0 || done_x[j])
                        })
                        .map(StageVar::Y)
                });
            match next {
                Some(StageVar::X(i)) => done_x[i] = true,
                Some(StageVar::Y(i)) => done_y[i] = true,
                None => return None,
            }
            order.push(next.unwrap());
        }
        Some(order)
    }

    /// Whether the stage equations can be solved by forward substitution.
    pub fn is_explicit(&self) -> bool {
        self.explicit_stage_order().is_some()
    }
}

impl SchemeTableau {
    pub fn symplectic_residual(&self) -> f64 {
        match self {
            SchemeTableau::Krk(t) => t.symplectic_residual(),
            SchemeTableau::Kprk(t) => t.symplectic_residual(),
        }
    }

    pub fn order_residual(&self) -> f64 {
        match self {
            SchemeTableau::Krk(t) => t.order_residual(),
            SchemeTableau::Kprk(t) => t.order_residual(),
        }
    }
}

/// Default free parameters `(a₁₁, b₁₁)` of the two-stage diagonally implicit
/// family, [`scheme_2`].
pub const SCHEME_2_DEFAULT: (f64, f64) = (0.125, 0.25);

/// Scheme 1: the unique one-stage structure-preserving method
/// (`a₁₁ = b₁₁ = 1/2`, unit weights) — a stochastic midpoint-type rule.
pub fn scheme_1() -> KrkTableau {
    KrkTableau::new(1, vec![0.5], vec![0.5], vec![1.0], vec![1.0])
        .expect("static tableau dimensions")
}

/// Scheme 2: the two-stage diagonally implicit family parameterized by
/// `(a₁₁, b₁₁) ∈ (0, 1/2)²`; the structure and order conditions hold
/// identically in the free parameters.
pub fn scheme_2(a11: f64, b11: f64) -> Result<KrkTableau> {
    if !(a11 > 0.0 && a11 < 0.5 && b11 > 0.0 && b11 < 0.5) {
        return Err(Error::Domain("scheme 2 free parameters must lie in (0, 1/2)"));
    }
    KrkTableau::new(
        2,
        vec![a11, 0.0, 2.0 * a11, 0.5 - a11],
        vec![b11, 0.0, 2.0 * b11, 0.5 - b11],
        vec![2.0 * a11, 1.0 - 2.0 * a11],
        vec![2.0 * b11, 1.0 - 2.0 * b11],
    )
}

/// Scheme 3: the partitioned embedding of [`scheme_1`] (both coefficient
/// sets equal); it generates the same one-step map.
pub fn scheme_3() -> KprkTableau {
    scheme_1().to_partitioned()
}

/// Scheme 4: the two-stage *explicit* partitioned method; every coefficient
/// is `0` or `1/2` and the stage graph is acyclic, so the stepper needs no
/// fixed-point iteration.
pub fn scheme_4() -> KprkTableau {
    KprkTableau::new(
        2,
        vec![0.0, 0.0, 0.5, 0.5],
        vec![0.5, 0.0, 0.5, 0.0],
        vec![0.0, 0.0, 0.5, 0.5],
        vec![0.5, 0.0, 0.5, 0.0],
        vec![0.5, 0.5],
        vec![0.5, 0.5],
        vec![0.5, 0.5],
        vec![0.5, 0.5],
    )
    .expect("static tableau dimensions")
}

/// Returns built-in scheme `id ∈ {1, 2, 3, 4}`; `free_params` (only
/// meaningful for scheme 2) overrides [`SCHEME_2_DEFAULT`].
pub fn builtin(id: u8, free_params: Option<(f64, f64)>) -> Result<SchemeTableau> {
    match id {
        1 => Ok(SchemeTableau::Krk(scheme_1())),
        2 => {
            let (a11, b11) = free_params.unwrap_or(SCHEME_2_DEFAULT);
            Ok(SchemeTableau::Krk(scheme_2(a11, b11)?))
        }
        3 => Ok(SchemeTableau::Kprk(scheme_3())),
        4 => Ok(SchemeTableau::Kprk(scheme_4())),
        _ => Err(Error::Domain("built-in scheme id must be 1, 2, 3, or 4")),
    }
}
