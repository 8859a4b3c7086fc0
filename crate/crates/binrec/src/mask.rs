//! Mask spec strings: `low:d`, `disk:d`, `list:<path>`, `rand:r:seed`, `full`.

use std::path::Path;

use binrec_core::fourier::FrequencyMask;
use binrec_core::GridGeometry;

use crate::error::{input, Error, Result};

/// Parses `spec` on geometry `g`. With `no_dc` the DC coefficient is left out:
/// random masks draw their rank from the other frequencies, the rest drop it.
pub fn parse_mask(spec: &str, g: GridGeometry, no_dc: bool) -> Result<FrequencyMask> {
    let bad = || input(format!("bad mask spec {spec:?} (expected low:d, disk:d, list:<path>, rand:r:seed or full)"));
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mask = match kind {
        "low" => FrequencyMask::lowpass(g, rest.parse().map_err(|_| bad())?),
        "disk" => {
            let d: f64 = rest.parse().map_err(|_| bad())?;
            FrequencyMask::disk(g, d)?
        }
        "full" if rest.is_empty() => FrequencyMask::full(g),
        "list" if !rest.is_empty() => FrequencyMask::explicit(g, &read_list(Path::new(rest), g)?)?,
        "rand" => {
            let (r, seed) = rest.split_once(':').ok_or_else(bad)?;
            let r = r.parse().map_err(|_| bad())?;
            let seed = seed.parse().map_err(|_| bad())?;
            return Ok(FrequencyMask::random(g, r, seed, !no_dc)?);
        }
        _ => return Err(bad()),
    };
    if no_dc && mask.contains(0) {
        let ks: Vec<[i64; 2]> = mask.frequencies().into_iter().filter(|k| *k != [0, 0]).collect();
        return Ok(FrequencyMask::explicit(g, &ks)?);
    }
    Ok(mask)
}

/// One frequency per line, `k1` in 1D and `k1,k2` in 2D.
fn read_list(path: &Path, g: GridGeometry) -> Result<Vec<[i64; 2]>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let parse = |s: &str| {
            s.trim().parse::<i64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("bad frequency {s:?}"),
            })
        };
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != g.h() {
            return Err(Error::Parse { path: path.to_path_buf(), line: i + 1, msg: format!("expected {} fields", g.h()) });
        }
        let k0 = parse(f[0])?;
        let k1 = if g.h() == 2 { parse(f[1])? } else { 0 };
        out.push([k0, k1]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use binrec_core::fourier::MaskKind;

    #[test]
    fn specs() {
        let g = GridGeometry::line(32).unwrap();
        assert_eq!(parse_mask("low:3", g, false).unwrap().len(), 7);
        assert_eq!(parse_mask("low:3", g, true).unwrap().len(), 6);
        let g2 = GridGeometry::square(16).unwrap();
        assert_eq!(parse_mask("disk:1", g2, false).unwrap().len(), 5);
        let r = parse_mask("rand:6:9", g, false).unwrap();
        assert_eq!(r.real_rank(), 6);
        assert!(r.contains(0));
        assert!(!parse_mask("rand:6:9", g, true).unwrap().contains(0));
        assert!(matches!(r.kind(), MaskKind::Random { seed: 9, .. }));
        assert_eq!(parse_mask("full", g, false).unwrap().len(), 32);
        for bad in ["low", "low:x", "disk:", "rand:3", "box:2", "list:", "full:1"] {
            assert!(parse_mask(bad, g, false).is_err(), "{bad}");
        }
    }

    #[test]
    fn list_file() {
        let dir = std::env::temp_dir().join(format!("binrec-mask-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ks.txt");
        std::fs::write(&path, "# two pairs\n1,0\n2,-1\n").unwrap();
        let g = GridGeometry::square(8).unwrap();
        let m = parse_mask(&format!("list:{}", path.display()), g, false).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.contains_freq(&[-2, 1]));
        assert!(parse_mask(&format!("list:{}", path.display()), GridGeometry::line(8).unwrap(), false).is_err());
        std::fs::remove_dir_all(dir).unwrap();
    }
}
