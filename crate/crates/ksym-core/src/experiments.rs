//! Monte Carlo experiment drivers: strong-convergence studies, error tables
//! over horizons, and the phase-area evolution study.
//!
//! Every study couples its step sizes through one underlying Brownian path
//! per `path_id`: increments are generated once at the finest grid and
//! block-summed to each coarser grid, so the error measured at step `h` is a
//! genuine discretization error, not noise from independent randomness.
//!
//! All drivers are pure functions of `(seed, configuration)`. Parallelism is
//! injected through [`PathExecutor`], whose contract — results in `path_id`
//! order, reduction performed sequentially afterwards — makes multi-threaded
//! runs byte-identical to serial ones.

use alloc::string::String;
use alloc::vec::Vec;

use crate::brownian;
use crate::error::{Error, Result};
use crate::integrate::{integrate, StepperConfig, Trajectory};
use crate::math;
use crate::model::{ModelParams, State, Vec2};
use crate::verify::Triangle;

/// Desk-scale study defaults: quick enough for a laptop run.
pub const DESK_N_PATHS: u64 = 200;
/// Desk-scale reference step `2⁻¹¹`.
pub const DESK_H_REF: f64 = 4.882_812_5e-4;
/// Full-scale path count.
pub const FULL_N_PATHS: u64 = 1000;
/// Full-scale reference step `2⁻¹²`.
pub const FULL_H_REF: f64 = 2.441_406_25e-4;
/// Default Monte Carlo seed.
pub const DEFAULT_SEED: u64 = 42;
/// Default study horizon.
pub const DEFAULT_T: f64 = 1.0;
/// Default initial condition `(x₀, y₀)` for the convergence studies
/// (arbitrary; the studies' claims are initial-condition-robust).
pub const DEFAULT_INITIAL: (f64, f64) = (1.0, 2.0);

/// Desk-scale step list `{2⁻⁴, …, 2⁻⁸}`, strictly decreasing.
pub fn desk_h_list() -> Vec<f64> {
    (4..=8).map(|i| math::powf(2.0, -(i as f64))).collect()
}

/// Full-scale step list `{2⁻⁴, …, 2⁻⁹}`, strictly decreasing.
pub fn full_h_list() -> Vec<f64> {
    (4..=9).map(|i| math::powf(2.0, -(i as f64))).collect()
}

/// Maps a closure over Monte Carlo path ids.
///
/// Contract: the returned vector holds `f(0), f(1), …, f(n_paths−1)` in that
/// order regardless of evaluation order or thread count; implementations may
/// evaluate in parallel but must never reorder results. All reductions in
/// this module run sequentially over that vector, which is what makes the
/// experiment outputs independent of the executor.
pub trait PathExecutor {
    fn map_paths<T: Send>(&self, n_paths: u64, f: &(dyn Fn(u64) -> T + Sync)) -> Vec<T>;
}

/// Evaluates paths one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct SerialExecutor;

impl PathExecutor for SerialExecutor {
    fn map_paths<T: Send>(&self, n_paths: u64, f: &(dyn Fn(u64) -> T + Sync)) -> Vec<T> {
        (0..n_paths).map(f).collect()
    }
}

/// A scheme under study: display label (used in CSV rows) plus its stepper
/// configuration.
pub type LabeledScheme = (String, StepperConfig);

/// Endpoint L¹ summary of one `(scheme, h)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Summary {
    /// Monte Carlo mean of `|X_N − X_ref| + |Y_N − Y_ref|`.
    pub error: f64,
    /// Sample standard deviation over paths divided by `√n_paths`.
    pub stderr: f64,
    /// Number of paths whose endpoint had a coordinate ≤ 0 (comparator
    /// methods only; always 0 for the structure-preserving schemes).
    pub violations: u64,
}

/// One `(h, error)` point of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    pub h: f64,
    pub l1_error: f64,
    pub stderr: f64,
    pub violations: u64,
}

/// Fitted convergence report for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub label: String,
    /// Points at strictly decreasing `h`.
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `log₂ error` against `log₂ h`.
    pub slope: f64,
    /// Coefficient of determination of that fit.
    pub r_squared: f64,
    /// Set when the fit is meaningless (fewer than two usable points, or an
    /// error that is zero or non-finite); `slope`/`r_squared` are NaN then.
    pub degenerate: bool,
}

/// L¹ errors on a grid of horizons (rows: schemes; columns: horizons).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub horizons: Vec<f64>,
    pub rows: Vec<ErrorTableRow>,
}

/// One scheme's row of an [`ErrorTable`].
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTableRow {
    pub label: String,
    /// `errors[k]` is the endpoint L¹ error at `horizons[k]`.
    pub errors: Vec<f64>,
}

/// Phase-area evolution of one scheme on the shared path.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAreaSeries {
    pub label: String,
    /// Signed triangle area in `(x, y)` coordinates per grid time.
    pub areas: Vec<f64>,
    /// `|area − reference area|` per grid time.
    pub abs_errors: Vec<f64>,
    /// Signed triangle area of the log-mapped vertices per grid time (NaN if
    /// a comparator scheme pushed a vertex out of the positive quadrant).
    pub log_areas: Vec<f64>,
}

/// Full phase-area study output: shared time grid, reference areas, and one
/// series per scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseAreaReport {
    pub times: Vec<f64>,
    /// Euclidean areas of the reference propagation at the same grid times.
    pub ref_areas: Vec<f64>,
    /// Log-coordinate triangle areas of the reference propagation. The flow
    /// preserves the two-form `dx∧dy/(xy)` only for evolved regions; the
    /// vertex triangle is a secant proxy whose log-area genuinely changes in
    /// time for large triangles, so per-scheme log-areas should be compared
    /// against this baseline rather than against their initial value.
    pub ref_log_areas: Vec<f64>,
    pub series: Vec<PhaseAreaSeries>,
}

/// The reference stepper configuration: the explicit two-stage
/// structure-preserving scheme.
pub fn reference_config() -> StepperConfig {
    StepperConfig::builtin_scheme(4).expect("builtin id 4 exists")
}

/// Reference trajectory on the fine grid (explicit two-stage scheme).
pub fn reference_solution(
    initial: State,
    g_fine: &brownian::BrownianGrid,
    p: &ModelParams,
) -> Result<Trajectory> {
    integrate(initial, g_fine, &reference_config(), p)
}

/// Grid layout shared by a coarse run and its fine reference run.
struct GridPlan {
    n_coarse: usize,
    factor: usize,
    n_fine: usize,
    /// Realized horizon `n_fine · h_ref` (equals the requested horizon
    /// whenever the step divides it).
    horizon: f64,
}

/// Validates and lays out the coupled coarse/fine grids.
///
/// `strict` demands that `h` divide the horizon to 1e-9 relative; the
/// lenient mode (phase-area study) instead rounds the horizon to the nearest
/// whole number of steps, keeping `h` exact.
fn plan_grids(t_final: f64, h: f64, h_ref: f64, strict: bool) -> Result<GridPlan> {
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::Domain("horizon must be positive and finite"));
    }
    if !(h > 0.0) || !(h_ref > 0.0) || h_ref > h {
        return Err(Error::Domain("need 0 < h_ref <= h"));
    }
    let factor = libm::round(h / h_ref) as usize;
    if factor < 1 || math::abs(factor as f64 * h_ref - h) > 1e-9 * h {
        return Err(Error::Domain(
            "coarse step must be an integer multiple of the reference step",
        ));
    }
    let n_coarse = libm::round(t_final / h).max(1.0) as usize;
    if strict && math::abs(n_coarse as f64 * h - t_final) > 1e-9 * t_final.max(1.0) {
        return Err(Error::Domain("step size must divide the horizon"));
    }
    let n_fine = n_coarse * factor;
    Ok(GridPlan { n_coarse, factor, n_fine, horizon: n_fine as f64 * h_ref })
}

/// Endpoint L¹ error of `scheme` at step `h` against the coupled reference
/// at step `h_ref`, averaged over `path_id ∈ 0..n_paths`.
#[allow(clippy::too_many_arguments)]
pub fn l1_error<E: PathExecutor>(
    scheme: &StepperConfig,
    h: f64,
    initial: State,
    p: &ModelParams,
    n_paths: u64,
    seed: u64,
    t_final: f64,
    h_ref: f64,
    reference: &StepperConfig,
    exec: &E,
) -> Result<L1Summary> {
    if n_paths < 2 {
        return Err(Error::Domain("at least two paths are required"));
    }
    let plan = plan_grids(t_final, h, h_ref, true)?;
    let outcomes = exec.map_paths(n_paths, &|pid| -> Result<(f64, bool)> {
        let fine = brownian::sample(plan.horizon, plan.n_fine, seed, pid)?;
        let coarse = brownian::coarsen(&fine, plan.factor)?;
        let run = integrate(initial, &coarse, scheme, p)?;
        let refr = integrate(initial, &fine, reference, p)?;
        let e = run.endpoint();
        let r = refr.endpoint();
        let d = math::abs(e[0] - r[0]) + math::abs(e[1] - r[1]);
        Ok((d, !(e[0] > 0.0 && e[1] > 0.0)))
    });
    let mut devs = Vec::with_capacity(outcomes.len());
    let mut violations = 0_u64;
    for o in outcomes {
        let (d, viol) = o?;
        devs.push(d);
        violations += viol as u64;
    }
    let n = devs.len() as f64;
    let mean = devs.iter().sum::<f64>() / n;
    let var = devs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0);
    Ok(L1Summary { error: mean, stderr: math::sqrt(var / n), violations })
}

/// Runs [`l1_error`] for every scheme at every step in `h_list` (strictly
/// decreasing) on shared Brownian paths, then fits `log₂ error` against
/// `log₂ h` per scheme.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study<E: PathExecutor>(
    schemes: &[LabeledScheme],
    h_list: &[f64],
    initial: State,
    p: &ModelParams,
    n_paths: u64,
    seed: u64,
    t_final: f64,
    h_ref: f64,
    reference: &StepperConfig,
    exec: &E,
) -> Result<Vec<ConvergenceReport>> {
    if h_list.is_empty() {
        return Err(Error::Domain("step list must not be empty"));
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("step list must be strictly decreasing"));
    }
    let mut reports = Vec::with_capacity(schemes.len());
    for (label, cfg) in schemes {
        let mut points = Vec::with_capacity(h_list.len());
        for &h in h_list {
            let s = l1_error(cfg, h, initial, p, n_paths, seed, t_final, h_ref, reference, exec)?;
            points.push(ConvergencePoint {
                h,
                l1_error: s.error,
                stderr: s.stderr,
                violations: s.violations,
            });
        }
        let (slope, r_squared, degenerate) =
            fit_log_slope(&points.iter().map(|pt| (pt.h, pt.l1_error)).collect::<Vec<_>>());
        reports.push(ConvergenceReport { label: label.clone(), points, slope, r_squared, degenerate });
    }
    Ok(reports)
}

/// Least-squares slope and R² of `log₂ e` against `log₂ h`; flags the fit
/// degenerate (NaN outputs) when a point is unusable or the abscissa does
/// not vary.
fn fit_log_slope(points: &[(f64, f64)]) -> (f64, f64, bool) {
    if points.len() < 2 || points.iter().any(|&(h, e)| !(h > 0.0) || !(e > 0.0) || !e.is_finite())
    {
        return (f64::NAN, f64::NAN, true);
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|&(h, _)| math::log2(h)).collect();
    let ly: Vec<f64> = points.iter().map(|&(_, e)| math::log2(e)).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx = lx.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    let syy = ly.iter().map(|y| (y - my) * (y - my)).sum::<f64>();
    let sxy = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>();
    if sxx == 0.0 {
        return (f64::NAN, f64::NAN, true);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { f64::NAN } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2, false)
}

/// Endpoint L¹ errors at several horizons with one step size, computed from
/// a single trajectory per `(scheme, path)` pair checkpointed at each
/// horizon — with counter-based increments this is bit-identical to running
/// each horizon separately, and costs one pass.
#[allow(clippy::too_many_arguments)]
pub fn error_table<E: PathExecutor>(
    schemes: &[LabeledScheme],
    t_list: &[f64],
    h: f64,
    initial: State,
    p: &ModelParams,
    n_paths: u64,
    seed: u64,
    h_ref: f64,
    reference: &StepperConfig,
    exec: &E,
) -> Result<ErrorTable> {
    if t_list.is_empty() {
        return Err(Error::Domain("horizon list must not be empty"));
    }
    if n_paths < 2 {
        return Err(Error::Domain("at least two paths are required"));
    }
    // Checkpoint index per horizon; every horizon must be a whole number of
    // coarse steps.
    let mut checkpoints = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain("horizons must be positive and finite"));
        }
        let k = libm::round(t / h).max(1.0) as usize;
        if math::abs(k as f64 * h - t) > 1e-9 * t.max(1.0) {
            return Err(Error::Domain("step size must divide every horizon"));
        }
        checkpoints.push(k);
    }
    let n_coarse = *checkpoints.iter().max().expect("nonempty");
    let plan = plan_grids(n_coarse as f64 * h, h, h_ref, true)?;
    debug_assert_eq!(plan.n_coarse, n_coarse);

    let n_schemes = schemes.len();
    let outcomes = exec.map_paths(n_paths, &|pid| -> Result<Vec<f64>> {
        let fine = brownian::sample(plan.horizon, plan.n_fine, seed, pid)?;
        let coarse = brownian::coarsen(&fine, plan.factor)?;
        let refr = integrate(initial, &fine, reference, p)?;
        let mut devs = Vec::with_capacity(n_schemes * checkpoints.len());
        for (_, cfg) in schemes {
            let run = integrate(initial, &coarse, cfg, p)?;
            for &k in &checkpoints {
                let e = run.states()[k];
                let r = refr.states()[k * plan.factor];
                devs.push(math::abs(e[0] - r[0]) + math::abs(e[1] - r[1]));
            }
        }
        Ok(devs)
    });

    let mut sums = alloc::vec![0.0_f64; n_schemes * checkpoints.len()];
    let mut n_ok = 0_u64;
    for o in outcomes {
        for (acc, d) in sums.iter_mut().zip(o?) {
            *acc += d;
        }
        n_ok += 1;
    }
    let rows = schemes
        .iter()
        .enumerate()
        .map(|(si, (label, _))| ErrorTableRow {
            label: label.clone(),
            errors: (0..checkpoints.len())
                .map(|ti| sums[si * checkpoints.len() + ti] / n_ok as f64)
                .collect(),
        })
        .collect();
    Ok(ErrorTable { horizons: t_list.to_vec(), rows })
}

/// Propagates the triangle's vertices with each scheme and with the
/// reference on one shared Brownian path (path id 0 of `seed`), recording
/// per-step Euclidean areas, reference areas, absolute area errors, and
/// log-areas.
///
/// The horizon is rounded to a whole number of steps of `h` (the realized
/// horizon is `times.last()`), so `h = t_final` yields exactly two rows.
#[allow(clippy::too_many_arguments)]
pub fn phase_area_study(
    tri: &Triangle,
    h: f64,
    t_final: f64,
    seed: u64,
    schemes: &[LabeledScheme],
    p: &ModelParams,
    h_ref: f64,
    reference: &StepperConfig,
) -> Result<PhaseAreaReport> {
    let plan = plan_grids(t_final, h, h_ref, false)?;
    let fine = brownian::sample(plan.horizon, plan.n_fine, seed, 0)?;
    let coarse = brownian::coarsen(&fine, plan.factor)?;

    let ref_trajs: [Trajectory; 3] = {
        let mut it = tri.vertices().into_iter().map(|w| integrate(w, &fine, reference, p));
        [it.next().unwrap()?, it.next().unwrap()?, it.next().unwrap()?]
    };
    let mut ref_areas = Vec::with_capacity(plan.n_coarse + 1);
    let mut ref_log_areas = Vec::with_capacity(plan.n_coarse + 1);
    for k in 0..=plan.n_coarse {
        let kf = k * plan.factor;
        let v = [
            ref_trajs[0].states()[kf],
            ref_trajs[1].states()[kf],
            ref_trajs[2].states()[kf],
        ];
        ref_areas.push(shoelace(v[0], v[1], v[2]));
        ref_log_areas.push(shoelace(log_vec(v[0]), log_vec(v[1]), log_vec(v[2])));
    }

    let mut series = Vec::with_capacity(schemes.len());
    let mut times = None;
    for (label, cfg) in schemes {
        let trajs: [Trajectory; 3] = {
            let mut it = tri.vertices().into_iter().map(|w| integrate(w, &coarse, cfg, p));
            [it.next().unwrap()?, it.next().unwrap()?, it.next().unwrap()?]
        };
        if times.is_none() {
            times = Some(trajs[0].times().to_vec());
        }
        let mut areas = Vec::with_capacity(plan.n_coarse + 1);
        let mut abs_errors = Vec::with_capacity(plan.n_coarse + 1);
        let mut log_areas = Vec::with_capacity(plan.n_coarse + 1);
        for k in 0..=plan.n_coarse {
            let v = [trajs[0].states()[k], trajs[1].states()[k], trajs[2].states()[k]];
            let a = shoelace(v[0], v[1], v[2]);
            areas.push(a);
            abs_errors.push(math::abs(a - ref_areas[k]));
            log_areas.push(shoelace(log_vec(v[0]), log_vec(v[1]), log_vec(v[2])));
        }
        series.push(PhaseAreaSeries { label: label.clone(), areas, abs_errors, log_areas });
    }
    let times = times
        .unwrap_or_else(|| (0..=plan.n_coarse).map(|k| k as f64 * coarse.h()).collect());
    Ok(PhaseAreaReport { times, ref_areas, ref_log_areas, series })
}

fn shoelace(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
}

/// Componentwise log; NaN components for non-positive inputs (comparator
/// schemes can leave the quadrant — reported as NaN, never masked).
fn log_vec(v: Vec2) -> Vec2 {
    [math::ln(v[0]), math::ln(v[1])]
}
