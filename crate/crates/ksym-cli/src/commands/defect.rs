//! `ksym defect`: finite-difference scan of the preserved-two-form defect
//! over probe states, step sizes, and noise values.

use std::io::Write;

use ksym_core::verify::{k_symplectic_defect, one_step_map, sample_states};

use crate::outfmt::{f17, open_output, write_header};
use crate::{numeric, parse, schemes, usage, Failure, DefectArgs};

pub fn run(args: DefectArgs) -> Result<(), Failure> {
    let p = parse::parse_params(&args.model.params).map_err(usage)?;
    let fp = args.fp.to_opts();
    let labeled = schemes::parse_scheme_list(&args.schemes, args.free_params, fp).map_err(usage)?;
    let h_list = parse::parse_real_list(&args.h_list).map_err(usage)?;
    if h_list.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(usage("--h-list entries must be positive and finite"));
    }
    let box_bounds = parse::parse_real_list(&args.state_box).map_err(usage)?;
    let [lo, hi] = box_bounds[..] else {
        return Err(usage("--state-box must be lo,hi"));
    };
    let seed = args.out.seed;
    let states = sample_states(args.states, seed, lo, hi).map_err(|e| usage(e.to_string()))?;

    let mut w = open_output(args.out.output.as_deref()).map_err(numeric)?;
    let config = [
        ("schemes", labeled.iter().map(|(l, _)| l.as_str()).collect::<Vec<_>>().join(",")),
        ("states", args.states.to_string()),
        ("state_box", format!("{lo},{hi}")),
        ("h_list", h_list.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",")),
        ("free_params", format!("{},{}", args.free_params.0, args.free_params.1)),
        ("fp_tol", args.fp.fp_tol.to_string()),
        ("fp_max_iter", args.fp.fp_max_iter.to_string()),
        ("params", args.model.params.clone()),
    ];
    write_header(&mut *w, "defect", &config, seed).map_err(numeric)?;
    writeln!(w, "scheme,x,y,h,J,defect").map_err(numeric)?;
    for (label, cfg) in &labeled {
        let step = one_step_map(cfg, &p);
        for s in &states {
            for &h in &h_list {
                let root = h.sqrt();
                for j in [0.0, root, -root] {
                    let d = k_symplectic_defect(&step, *s, h, j).map_err(numeric)?;
                    writeln!(
                        w,
                        "{},{},{},{},{},{}",
                        label,
                        f17(s.x()),
                        f17(s.y()),
                        f17(h),
                        f17(j),
                        f17(d)
                    )
                    .map_err(numeric)?;
                }
            }
        }
    }
    w.flush().map_err(numeric)?;
    Ok(())
}
