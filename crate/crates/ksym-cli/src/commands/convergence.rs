//! `ksym convergence`: L¹ error vs step size per scheme, with a
//! least-squares order fit appended as comment lines.

use std::io::Write;

use ksym_core::experiments::{convergence_study, desk_h_list, full_h_list};
use ksym_core::State;

use crate::exec::{with_thread_count, ThreadedExecutor};
use crate::outfmt::{f17, open_output, write_header};
use crate::{numeric, parse, schemes, usage, Failure, ConvergenceArgs};

pub fn run(args: ConvergenceArgs) -> Result<(), Failure> {
    let p = parse::parse_params(&args.model.params).map_err(usage)?;
    let fp = args.fp.to_opts();
    let labeled = schemes::parse_scheme_list(&args.schemes, args.free_params, fp).map_err(usage)?;
    let reference = schemes::build_reference(args.ref_scheme, fp).map_err(usage)?;
    let h_list = match &args.h_list {
        Some(s) => parse::parse_real_list(s).map_err(usage)?,
        None if args.scale.full_scale => full_h_list(),
        None => desk_h_list(),
    };
    let n_paths = args.scale.resolve_paths();
    let h_ref = args.scale.resolve_h_ref();
    let initial = State::new(args.x0, args.y0).map_err(|e| usage(e.to_string()))?;
    let seed = args.out.seed;

    let study = || {
        convergence_study(
            &labeled, &h_list, initial, &p, n_paths, seed, args.t_final, h_ref, &reference,
            &ThreadedExecutor,
        )
    };
    let reports = match args.scale.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => with_thread_count(n, study),
        None => study(),
    }
    .map_err(numeric)?;

    let mut w = open_output(args.out.output.as_deref()).map_err(numeric)?;
    let config = [
        ("schemes", labels(&reports)),
        ("h_list", join_floats(&h_list)),
        ("T", args.t_final.to_string()),
        ("h_ref", h_ref.to_string()),
        ("paths", n_paths.to_string()),
        ("x0", args.x0.to_string()),
        ("y0", args.y0.to_string()),
        ("ref_scheme", args.ref_scheme.to_string()),
        ("free_params", format!("{},{}", args.free_params.0, args.free_params.1)),
        ("fp_tol", args.fp.fp_tol.to_string()),
        ("fp_max_iter", args.fp.fp_max_iter.to_string()),
        ("params", args.model.params.clone()),
    ];
    write_header(&mut *w, "convergence", &config, seed).map_err(numeric)?;
    writeln!(w, "scheme,h,l1_error,stderr,violations").map_err(numeric)?;
    for r in &reports {
        for pt in &r.points {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.label,
                f17(pt.h),
                f17(pt.l1_error),
                f17(pt.stderr),
                pt.violations
            )
            .map_err(numeric)?;
        }
    }
    for r in &reports {
        writeln!(
            w,
            "# fit scheme={} slope={} r2={} degenerate={}",
            r.label,
            f17(r.slope),
            f17(r.r_squared),
            r.degenerate
        )
        .map_err(numeric)?;
    }
    w.flush().map_err(numeric)?;
    Ok(())
}

fn labels(reports: &[ksym_core::experiments::ConvergenceReport]) -> String {
    reports.iter().map(|r| r.label.as_str()).collect::<Vec<_>>().join(",")
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
