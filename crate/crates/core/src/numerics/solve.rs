use crate::error::{Error, Result};

/// A finite, non-degenerate interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Bracket {
                lo,
                hi,
                reason: "endpoints must be finite".into(),
            });
        }
        if lo >= hi {
            return Err(Error::Bracket {
                lo,
                hi,
                reason: "requires lo < hi".into(),
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn checked<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Evaluation { at: x, value: v })
    }
}

/// Brent's method: inverse quadratic / secant steps guarded by bisection.
///
/// Terminates once the sign-change bracket is no wider than `tol` (or
/// an exact zero is hit). `tol` below a few ulps of the root is clamped.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = checked(&mut f, a)?;
    let mut fb = checked(&mut f, b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket {
            lo: a,
            hi: b,
            reason: format!("no sign change (f(lo) = {fa}, f(hi) = {fb})"),
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..500 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = (0.5 * tol).max(2.0 * f64::EPSILON * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (2.0 * m * s, 1.0 - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = checked(&mut f, b)?;
    }
    Ok(b)
}

/// Which end of the bracket a maximization converged onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryHit {
    Lo,
    Hi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub max: f64,
    /// Set when the supremum is approached at an endpoint of the bracket.
    pub boundary: Option<BoundaryHit>,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a concave (unimodal) function.
///
/// The endpoints themselves are never evaluated.
pub fn maximize_concave<F: FnMut(f64) -> f64>(
    mut f: F,
    bracket: Bracket,
    tol: f64,
) -> Result<Maximum> {
    let (lo, hi) = (bracket.lo, bracket.hi);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = checked(&mut f, c)?;
    let mut fd = checked(&mut f, d)?;

    let mut iters = 0;
    while b - a > tol && iters < 400 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = checked(&mut f, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = checked(&mut f, d)?;
        }
        iters += 1;
        if !(a < c && c <= d && d < b) {
            // interval collapsed to adjacent floats
            break;
        }
    }

    let (argmax, max) = if fc >= fd { (c, fc) } else { (d, fd) };
    let boundary = if a == lo {
        Some(BoundaryHit::Lo)
    } else if b == hi {
        Some(BoundaryHit::Hi)
    } else {
        None
    };
    Ok(Maximum {
        argmax,
        max,
        boundary,
    })
}
