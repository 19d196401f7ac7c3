use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::scales::k_of_r;
use crate::symbolic::{check_lambda, Coefficients, CylinderRect};

pub const MAX_BOX_LEVEL: u32 = 30;
/// Guard on the number of (rectangle, cell) incidences before deduplication.
pub const MAX_PROJECTED_CELLS: u64 = 100_000_000;
/// Levels up to this use a dense bitset (`4^14` bits = 32 MiB).
const DENSE_LEVEL: u32 = 14;
pub const MAX_ATTRACTOR_DEPTH: usize = 26;

/// Cell index range `[i_lo, i_hi]` met by `[lo, hi]` on a grid of `s` cells.
///
/// Cells are half-open except the last, so an edge lying exactly on a grid
/// line only claims the cell it enters.
fn cell_range(lo: f64, hi: f64, s: u64) -> Option<(u64, u64)> {
    if hi < 0.0 || lo > 1.0 || hi < lo {
        return None;
    }
    let sf = s as f64;
    let a = (lo.max(0.0) * sf).floor().min(sf - 1.0) as u64;
    let b = ((hi.min(1.0) * sf).ceil() as u64).saturating_sub(1).max(a).min(s - 1);
    Some((a, b))
}

fn projected(rects: &[CylinderRect], s: u64) -> u64 {
    rects
        .iter()
        .filter_map(|r| {
            let (x0, x1) = cell_range(r.x_lo, r.x_hi, s)?;
            let (y0, y1) = cell_range(r.y_lo, r.y_hi, s)?;
            Some((x1 - x0 + 1).saturating_mul(y1 - y0 + 1))
        })
        .fold(0u64, |a, b| a.saturating_add(b))
}

/// Occupied cells of the level-`r` dyadic grid, as sorted `y·2^r + x` keys.
pub fn occupied_cells(rects: &[CylinderRect], r: u32) -> Result<Vec<u64>> {
    if r > MAX_BOX_LEVEL {
        return Err(Error::invalid("r", format!("{r} exceeds {MAX_BOX_LEVEL}")));
    }
    let s = 1u64 << r;
    let p = projected(rects, s);
    if p > MAX_PROJECTED_CELLS {
        return Err(Error::Budget(format!("{p} projected grid cells exceed {MAX_PROJECTED_CELLS}")));
    }
    let visit = |r: &CylinderRect, f: &mut dyn FnMut(u64)| {
        if let (Some((x0, x1)), Some((y0, y1))) = (cell_range(r.x_lo, r.x_hi, s), cell_range(r.y_lo, r.y_hi, s)) {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    f(y * s + x);
                }
            }
        }
    };
    if r <= DENSE_LEVEL {
        let mut bits = vec![0u64; ((s * s) as usize).div_ceil(64)];
        for rect in rects {
            visit(rect, &mut |k| bits[(k >> 6) as usize] |= 1 << (k & 63));
        }
        let mut keys = Vec::new();
        for (i, w) in bits.iter().enumerate() {
            let mut w = *w;
            while w != 0 {
                let b = w.trailing_zeros() as u64;
                keys.push(i as u64 * 64 + b);
                w &= w - 1;
            }
        }
        Ok(keys)
    } else {
        let mut keys = Vec::with_capacity(p as usize);
        for rect in rects {
            visit(rect, &mut |k| keys.push(k));
        }
        keys.par_sort_unstable();
        keys.dedup();
        Ok(keys)
    }
}

/// Number of level-`r` dyadic squares meeting the union of `rects`.
pub fn box_count(rects: &[CylinderRect], r: u32) -> Result<u64> {
    Ok(occupied_cells(rects, r)?.len() as u64)
}

/// All `2^depth` cylinder boxes of the attractor, in lexicographic order.
pub fn attractor_rects(lambda: f64, depth: usize) -> Result<Vec<CylinderRect>> {
    check_lambda(lambda)?;
    if depth > MAX_ATTRACTOR_DEPTH {
        return Err(Error::invalid("depth", format!("{depth} exceeds {MAX_ATTRACTOR_DEPTH}")));
    }
    let c = Coefficients::new(lambda, depth);
    let w = c.power[depth];
    let h = 0.5f64.powi(depth as i32);
    let mut out = vec![CylinderRect::UNIT];
    for t in 0..depth {
        let dy = 0.5f64.powi(t as i32 + 1);
        let mut next = Vec::with_capacity(out.len() * 2);
        for r in &out {
            next.push(*r);
            next.push(CylinderRect {
                x_lo: r.x_lo + c.digit[t],
                y_lo: r.y_lo + dy,
                ..*r
            });
        }
        out = next;
    }
    for r in &mut out {
        r.x_hi = (r.x_lo + w).min(1.0);
        r.y_hi = (r.y_lo + h).min(1.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxDimFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    /// `(r, N(2^{−r}))`.
    pub counts: Vec<(u32, u64)>,
}

/// Slope of `ln N(2^{−r})` against `r ln 2` over `r ∈ [r_lo, r_hi]`.
pub fn dim_box_estimate(rects: &[CylinderRect], r_lo: u32, r_hi: u32) -> Result<BoxDimFit> {
    if r_hi < r_lo || r_hi - r_lo + 1 < 3 {
        return Err(Error::Insufficient("box dimension needs at least three scales".into()));
    }
    let counts = (r_lo..=r_hi).map(|r| Ok((r, box_count(rects, r)?))).collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = counts.iter().map(|(r, _)| *r as f64 * LN_2).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let fit = least_squares(&xs, &ys).ok_or_else(|| Error::Insufficient("degenerate fit".into()))?;
    Ok(BoxDimFit {
        slope: fit.slope,
        intercept: fit.intercept,
        rms: fit.rms,
        counts,
    })
}

/// Cylinder depth whose widths fall below `2^{−r_hi}`.
pub fn attractor_depth(lambda: f64, r_hi: u32) -> usize {
    k_of_r(r_hi as u64, lambda) as usize + 1
}

/// Box dimension of the attractor at cylinder depth [`attractor_depth`].
pub fn dim_f_estimate(lambda: f64, r_lo: u32, r_hi: u32) -> Result<BoxDimFit> {
    if r_hi > 20 {
        return Err(Error::invalid("r_hi", "must be at most 20 for the attractor"));
    }
    let rects = attractor_rects(lambda, attractor_depth(lambda, r_hi))?;
    dim_box_estimate(&rects, r_lo, r_hi)
}

/// Binary PGM (P5, maxval 255) of the level-`r` occupancy grid; white cells
/// are occupied and the first row is the top of the unit square.
pub fn render_pgm(rects: &[CylinderRect], r: u32) -> Result<Vec<u8>> {
    if r > 16 {
        return Err(Error::invalid("px", "rasters are limited to 65536 pixels per side"));
    }
    let s = 1usize << r;
    let cells = occupied_cells(rects, r)?;
    let header = format!("P5\n{s} {s}\n255\n");
    let mut out = Vec::with_capacity(header.len() + s * s);
    out.extend_from_slice(header.as_bytes());
    let body = out.len();
    out.resize(body + s * s, 0);
    for k in cells {
        let (y, x) = ((k as usize) / s, (k as usize) % s);
        out[body + (s - 1 - y) * s + x] = 255;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{cylinder_box, SymbolWord};
    use proptest::prelude::*;

    fn cell(x: f64, y: f64, w: f64) -> CylinderRect {
        CylinderRect {
            x_lo: x,
            x_hi: x + w,
            y_lo: y,
            y_hi: y + w,
        }
    }

    #[test]
    fn trivial_counts() {
        for r in [0, 1, 5, 9] {
            assert_eq!(box_count(&[CylinderRect::UNIT], r).unwrap(), 1 << (2 * r));
        }
        assert_eq!(box_count(&[], 7).unwrap(), 0);
        assert_eq!(box_count(&[cell(0.0, 0.0, 0.5), cell(0.5, 0.5, 0.5)], 1).unwrap(), 2);
    }

    #[test]
    fn dense_and_sparse_paths_agree() {
        let rects = attractor_rects(0.6, 14).unwrap();
        let a = occupied_cells(&rects, DENSE_LEVEL).unwrap();
        let mut b = Vec::new();
        let s = 1u64 << DENSE_LEVEL;
        for r in &rects {
            let (x0, x1) = cell_range(r.x_lo, r.x_hi, s).unwrap();
            let (y0, y1) = cell_range(r.y_lo, r.y_hi, s).unwrap();
            for y in y0..=y1 {
                for x in x0..=x1 {
                    b.push(y * s + x);
                }
            }
        }
        b.sort_unstable();
        b.dedup();
        assert_eq!(a, b);
    }

    #[test]
    fn attractor_rects_match_cylinders() {
        let rects = attractor_rects(0.65, 8).unwrap();
        for (bits, r) in rects.iter().enumerate() {
            let d: Vec<u8> = (0..8).map(|i| (bits >> (7 - i) & 1) as u8).collect();
            let c = cylinder_box(&SymbolWord::from_digits(&d).unwrap(), 0.65);
            assert!((c.x_lo - r.x_lo).abs() < 1e-14 && (c.y_lo - r.y_lo).abs() < 1e-15);
            assert!((c.width() - r.width()).abs() < 1e-14);
        }
    }

    #[test]
    fn dimension_examples() {
        let f = dim_f_estimate(0.6, 8, 14).unwrap();
        let expected = 2.0 + 0.6f64.ln() / LN_2;
        assert!((f.slope - expected).abs() < 0.1, "{} vs {expected}", f.slope);
        let seg = [CylinderRect {
            x_lo: 0.0,
            x_hi: 1.0,
            y_lo: 0.0,
            y_hi: 0.0,
        }];
        assert!((dim_box_estimate(&seg, 4, 12).unwrap().slope - 1.0).abs() < 1e-9);
        assert!((dim_box_estimate(&[CylinderRect::UNIT], 2, 10).unwrap().slope - 2.0).abs() < 1e-9);
        assert!(dim_box_estimate(&seg, 4, 5).is_err());
    }

    #[test]
    fn raster_matches_count() {
        let rects = attractor_rects(0.6, 14).unwrap();
        let pgm = render_pgm(&rects, 10).unwrap();
        let header = b"P5\n1024 1024\n255\n";
        assert_eq!(&pgm[..header.len()], header);
        let on = pgm[header.len()..].iter().filter(|b| **b == 255).count() as u64;
        assert_eq!(on, box_count(&rects, 10).unwrap());
    }

    #[test]
    fn projected_guard() {
        assert!(matches!(box_count(&[CylinderRect::UNIT], 15), Err(Error::Budget(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn refinement_bounds(xs in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..0.3, 0.0f64..0.3), 1..20), r in 0u32..10) {
            let rects: Vec<CylinderRect> = xs.iter().map(|(x, y, w, h)| CylinderRect { x_lo: *x, x_hi: (x + w).min(1.0), y_lo: *y, y_hi: (y + h).min(1.0) }).collect();
            let a = box_count(&rects, r).unwrap();
            let b = box_count(&rects, r + 1).unwrap();
            prop_assert!(a <= b && b <= 4 * a);
        }
    }
}
