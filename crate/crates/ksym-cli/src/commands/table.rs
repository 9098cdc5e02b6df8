//! `ksym table`: endpoint L¹ errors over a list of horizons at one step
//! size, all schemes on the same coupled paths.

use std::io::Write;

use ksym_core::experiments::error_table;
use ksym_core::State;

use crate::exec::{with_thread_count, ThreadedExecutor};
use crate::outfmt::{f17, open_output, write_header};
use crate::{numeric, parse, schemes, usage, Failure, TableArgs};

pub fn run(args: TableArgs) -> Result<(), Failure> {
    let p = parse::parse_params(&args.model.params).map_err(usage)?;
    let fp = args.fp.to_opts();
    let labeled = schemes::parse_scheme_list(&args.schemes, args.free_params, fp).map_err(usage)?;
    let reference = schemes::build_reference(args.ref_scheme, fp).map_err(usage)?;
    let t_list = parse::parse_real_list(&args.t_list).map_err(usage)?;
    let n_paths = args.scale.resolve_paths();
    let h_ref = args.scale.resolve_h_ref();
    let initial = State::new(args.x0, args.y0).map_err(|e| usage(e.to_string()))?;
    let seed = args.out.seed;

    let study = || {
        error_table(
            &labeled, &t_list, args.h, initial, &p, n_paths, seed, h_ref, &reference,
            &ThreadedExecutor,
        )
    };
    let table = match args.scale.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => with_thread_count(n, study),
        None => study(),
    }
    .map_err(numeric)?;

    let mut w = open_output(args.out.output.as_deref()).map_err(numeric)?;
    let config = [
        ("schemes", labeled.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>().join(",")),
        ("T_list", t_list.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")),
        ("h", args.h.to_string()),
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
    write_header(&mut *w, "table", &config, seed).map_err(numeric)?;
    writeln!(w, "scheme,T,l1_error").map_err(numeric)?;
    for row in &table.rows {
        for (t, err) in table.horizons.iter().zip(&row.errors) {
            writeln!(w, "{},{},{}", row.label, f17(*t), f17(*err)).map_err(numeric)?;
        }
    }
    w.flush().map_err(numeric)?;
    Ok(())
}
