//! `ksym phase-area`: triangle phase-area evolution under each scheme vs
//! the reference propagation on one shared Wiener path.

use std::io::Write;

use ksym_core::experiments::{phase_area_study, DESK_H_REF, FULL_H_REF};

use crate::outfmt::{f17, open_output, write_header};
use crate::{numeric, parse, schemes, usage, Failure, PhaseAreaArgs};

pub fn run(args: PhaseAreaArgs) -> Result<(), Failure> {
    let p = parse::parse_params(&args.model.params).map_err(usage)?;
    let fp = args.fp.to_opts();
    let labeled = schemes::parse_scheme_list(&args.schemes, args.free_params, fp).map_err(usage)?;
    let reference = schemes::build_reference(args.ref_scheme, fp).map_err(usage)?;
    let tri = parse::parse_triangle(&args.triangle).map_err(usage)?;
    let h_ref = args.h_ref.unwrap_or(if args.full_scale { FULL_H_REF } else { DESK_H_REF });
    let seed = args.out.seed;

    let report =
        phase_area_study(&tri, args.h, args.t_final, seed, &labeled, &p, h_ref, &reference)
            .map_err(numeric)?;
    let realized_t = *report.times.last().expect("report has at least one row");

    let mut w = open_output(args.out.output.as_deref()).map_err(numeric)?;
    let config = [
        ("triangle", args.triangle.clone()),
        ("h", args.h.to_string()),
        ("T", args.t_final.to_string()),
        ("realized_T", realized_t.to_string()),
        ("schemes", labeled.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>().join(",")),
        ("h_ref", h_ref.to_string()),
        ("ref_scheme", args.ref_scheme.to_string()),
        ("free_params", format!("{},{}", args.free_params.0, args.free_params.1)),
        ("fp_tol", args.fp.fp_tol.to_string()),
        ("fp_max_iter", args.fp.fp_max_iter.to_string()),
        ("params", args.model.params.clone()),
    ];
    write_header(&mut *w, "phase-area", &config, seed).map_err(numeric)?;
    writeln!(w, "t,scheme,area,area_ref,abs_error,log_area").map_err(numeric)?;
    for s in &report.series {
        for (k, t) in report.times.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                f17(*t),
                s.label,
                f17(s.areas[k]),
                f17(report.ref_areas[k]),
                f17(s.abs_errors[k]),
                f17(s.log_areas[k])
            )
            .map_err(numeric)?;
        }
    }
    w.flush().map_err(numeric)?;
    Ok(())
}
