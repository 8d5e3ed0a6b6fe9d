//! Derivative-free scalar minimization on an interval.

const GOLDEN: f64 = 0.381_966_011_250_105_1; // (3 - sqrt 5) / 2

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

/// Brent's method: golden-section steps with parabolic interpolation when the
/// fit is trustworthy. Stops when the bracket around the best point is below
/// `2 * (tol + sqrt(eps) |x|)` or after `max_iter` iterations.
pub fn brent<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    low: f64,
    high: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Minimum, E> {
    let (mut a, mut b) = if low < high { (low, high) } else { (high, low) };
    let rel = f64::EPSILON.sqrt();
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let mut evaluations = 1;
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        let tol1 = rel * x.abs() + tol;
        let tol2 = 2.0 * tol1;
        if (x - mid).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < mid { tol1 } else { -tol1 };
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x < mid { b - x } else { a - x };
            d = GOLDEN * e;
        }
        let u = if d.abs() >= tol1 { x + d } else if d > 0.0 { x + tol1 } else { x - tol1 };
        let fu = f(u)?;
        evaluations += 1;
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Ok(Minimum { x, fx, evaluations })
}

/// Plain golden-section search; used where parabolic steps are unreliable
/// (non-smooth objectives such as `-|r(x)|`).
pub fn golden_section<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    low: f64,
    high: f64,
    tol: f64,
) -> Result<Minimum, E> {
    let (mut a, mut b) = if low < high { (low, high) } else { (high, low) };
    let mut x1 = a + GOLDEN * (b - a);
    let mut x2 = b - GOLDEN * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evaluations = 2;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + GOLDEN * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - GOLDEN * (b - a);
            f2 = f(x2)?;
        }
        evaluations += 1;
    }
    Ok(if f1 <= f2 {
        Minimum { x: x1, fx: f1, evaluations }
    } else {
        Minimum { x: x2, fx: f2, evaluations }
    })
}
