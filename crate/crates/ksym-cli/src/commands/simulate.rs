//! `ksym simulate`: one trajectory as `t,x,y` CSV.

use std::io::Write;

use ksym_core::integrate::integrate;
use ksym_core::{brownian, State};

use crate::outfmt::{f17, open_output, write_header};
use crate::{numeric, parse, schemes, usage, Failure, SimulateArgs};

pub fn run(args: SimulateArgs) -> Result<(), Failure> {
    let p = parse::parse_params(&args.model.params).map_err(usage)?;
    let cfg =
        schemes::build_scheme(&args.scheme, args.free_params, args.fp.to_opts()).map_err(usage)?;
    if !(args.h > 0.0) || !args.h.is_finite() {
        return Err(usage("--h must be positive and finite"));
    }
    if !(args.t_final > 0.0) || !args.t_final.is_finite() {
        return Err(usage("--T must be positive and finite"));
    }
    let initial = State::new(args.x0, args.y0).map_err(|e| usage(e.to_string()))?;

    // The horizon is rounded to a whole number of steps so the step size
    // stays exactly as requested; the realized horizon is echoed.
    let n = (args.t_final / args.h).round().max(1.0) as usize;
    let horizon = n as f64 * args.h;
    let grid = brownian::sample(horizon, n, args.out.seed, args.path_id).map_err(numeric)?;
    // a solver failure carries the failing step index in its message
    let traj = integrate(initial, &grid, &cfg, &p).map_err(numeric)?;

    let mut w = open_output(args.out.output.as_deref()).map_err(numeric)?;
    let config = [
        ("scheme", args.scheme.clone()),
        ("h", args.h.to_string()),
        ("T", args.t_final.to_string()),
        ("realized_T", horizon.to_string()),
        ("path_id", args.path_id.to_string()),
        ("x0", args.x0.to_string()),
        ("y0", args.y0.to_string()),
        ("free_params", format!("{},{}", args.free_params.0, args.free_params.1)),
        ("fp_tol", args.fp.fp_tol.to_string()),
        ("fp_max_iter", args.fp.fp_max_iter.to_string()),
        ("params", args.model.params.clone()),
    ];
    write_header(&mut *w, "simulate", &config, args.out.seed).map_err(numeric)?;
    writeln!(w, "t,x,y").map_err(numeric)?;
    for (t, s) in traj.times().iter().zip(traj.states()) {
        writeln!(w, "{},{},{}", f17(*t), f17(s[0]), f17(s[1])).map_err(numeric)?;
    }
    w.flush().map_err(numeric)?;

    if let Some(k) = traj.positivity_violation() {
        eprintln!(
            "warning: scheme {} left the positive quadrant at step {k}; \
             values are reported as computed",
            args.scheme
        );
    }
    Ok(())
}
