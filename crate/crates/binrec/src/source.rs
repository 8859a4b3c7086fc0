//! Signal source specs: `intervals:d`, `barcode:<bits>`, `disk:R`,
//! `square:side`, `file:<path>`.

use std::path::Path;

use binrec_core::generate::{barcode_profile, gen_barcode, gen_disk, gen_random_intervals, gen_square};
use binrec_core::BinarySignal;

use crate::error::{input, Result};
use crate::io::load_binary;

/// Builds the signal for `spec` on an `n`-point line (`dim = 1`) or `n × n`
/// grid (`dim = 2`). Shapes are centred; `seed` only affects `intervals`.
pub fn make_signal(spec: &str, dim: usize, n: usize, seed: u64) -> Result<BinarySignal> {
    let bad = || input(format!("bad signal spec {spec:?} (expected intervals:d, barcode:<bits>, disk:R, square:side or file:<path>)"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    let need = |want: usize| {
        if dim == want {
            Ok(())
        } else {
            Err(input(format!("signal {kind} needs dim = {want}")))
        }
    };
    let u = match kind {
        "intervals" => {
            need(1)?;
            gen_random_intervals(n, rest.parse().map_err(|_| bad())?, seed)?
        }
        "barcode" if dim == 1 => barcode_profile(rest, n)?,
        "barcode" => gen_barcode(rest, n, n)?,
        "disk" => {
            need(2)?;
            gen_disk(n, [0.5, 0.5], rest.parse().map_err(|_| bad())?)?
        }
        "square" => {
            need(2)?;
            gen_square(n, [0.5, 0.5], rest.parse().map_err(|_| bad())?)?
        }
        "file" if !rest.is_empty() => {
            let u = load_binary(Path::new(rest))?;
            let g = u.geometry();
            if g.h() != dim || g.n() != n {
                return Err(input(format!("{rest}: signal is {}D with side {}, config says {dim}D with side {n}", g.h(), g.n())));
            }
            u
        }
        _ => return Err(bad()),
    };
    Ok(u)
}
