//! One-dimensional maximizers used by the capacity and monopolist solvers.

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal function on
/// `[lo, hi]`, narrowed until the bracket is shorter than `tol`.
///
/// Returns the best point evaluated, endpoints included. On exact ties the
/// smaller abscissa wins.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    let mut best = Maximum {
        x: lo,
        value: f(lo),
    };
    let consider = |x: f64, value: f64, best: &mut Maximum| {
        if value > best.value || (value == best.value && x < best.x) {
            *best = Maximum { x, value };
        }
    };
    if hi <= lo {
        return best;
    }
    let f_hi = f(hi);
    consider(hi, f_hi, &mut best);

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);
    best
}

/// Uniform grid scan of `points` abscissae spanning `[lo, hi]`, endpoints
/// included. Returns the grid index of the maximum and its value; the first
/// (smallest) maximizer wins ties.
pub fn grid_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
) -> (usize, Maximum) {
    assert!(points >= 2, "grid needs at least two points");
    let step = (hi - lo) / (points - 1) as f64;
    let mut best_index = 0;
    let mut best = Maximum {
        x: lo,
        value: f(lo),
    };
    for k in 1..points {
        let x = if k == points - 1 {
            hi
        } else {
            lo + k as f64 * step
        };
        let value = f(x);
        if value > best.value {
            best_index = k;
            best = Maximum { x, value };
        }
    }
    (best_index, best)
}

/// Grid pre-scan followed by golden-section refinement inside the two grid
/// cells around the best grid point. Guards the local search against
/// multimodal objectives.
pub fn scan_then_refine<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> Maximum {
    if hi <= lo {
        return Maximum {
            x: lo,
            value: f(lo),
        };
    }
    let (k, grid_best) = grid_max(&mut f, lo, hi, points);
    let step = (hi - lo) / (points - 1) as f64;
    let left = if k == 0 {
        lo
    } else {
        lo + (k - 1) as f64 * step
    };
    let right = if k + 1 >= points {
        hi
    } else {
        (lo + (k + 1) as f64 * step).min(hi)
    };
    let refined = golden_section_max(&mut f, left, right, tol);
    if refined.value > grid_best.value {
        refined
    } else {
        grid_best
    }
}
