//! `ksym increments`: dump one path's Wiener increments for
//! cross-implementation debugging.

use std::io::Write;

use ksym_core::brownian;

use crate::outfmt::{f17, open_output, write_header};
use crate::{numeric, Failure, IncrementsArgs};

pub fn run(args: IncrementsArgs) -> Result<(), Failure> {
    let grid =
        brownian::sample(args.t_final, args.n, args.out.seed, args.path_id).map_err(numeric)?;

    let mut w = open_output(args.out.output.as_deref()).map_err(numeric)?;
    let config = [
        ("T", args.t_final.to_string()),
        ("n", args.n.to_string()),
        ("path_id", args.path_id.to_string()),
        ("h", grid.h().to_string()),
    ];
    write_header(&mut *w, "increments", &config, args.out.seed).map_err(numeric)?;
    writeln!(w, "step,increment").map_err(numeric)?;
    for (i, dw) in grid.increments().iter().enumerate() {
        // steps are 1-based: increment k advances t_{k-1} to t_k
        writeln!(w, "{},{}", i + 1, f17(*dw)).map_err(numeric)?;
    }
    w.flush().map_err(numeric)?;
    Ok(())
}
