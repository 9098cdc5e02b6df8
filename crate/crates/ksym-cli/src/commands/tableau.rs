//! `ksym tableau check`: residual report and PASS/FAIL verdict.

use ksym_core::tableau::{builtin, SchemeTableau};

use crate::outfmt::f17;
use crate::tableau_text::{parse_tableau_text, ParsedTableau};
use crate::{numeric, usage, Failure, TableauCheckArgs};

/// Residual tolerance for the verdict.
const TOL: f64 = 1e-12;

pub fn run(args: TableauCheckArgs) -> Result<(), Failure> {
    let parsed = match (args.builtin, &args.file) {
        (Some(id), None) => {
            match builtin(id, args.free_params).map_err(|e| usage(e.to_string()))? {
                SchemeTableau::Krk(t) => ParsedTableau::Krk(t),
                SchemeTableau::Kprk(t) => ParsedTableau::Kprk(t),
            }
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| numeric(format!("cannot read {}: {e}", path.display())))?;
            parse_tableau_text(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        _ => return Err(usage("exactly one of --builtin or --file is required")),
    };

    let (stages, partitioned, sym, ord) = match &parsed {
        ParsedTableau::Krk(t) => (t.stages(), false, t.symplectic_residual(), t.order_residual()),
        ParsedTableau::Kprk(t) => (t.stages(), true, t.symplectic_residual(), t.order_residual()),
    };

    println!("stages = {stages}");
    println!("partitioned = {partitioned}");
    println!("symplectic residual = {}", f17(sym));
    println!("order residual = {}", f17(ord));
    if sym <= TOL && ord <= TOL {
        println!("PASS (tolerance = {})", f17(TOL));
        Ok(())
    } else {
        println!("FAIL (tolerance = {})", f17(TOL));
        Err(numeric("tableau conditions violated beyond tolerance"))
    }
}
