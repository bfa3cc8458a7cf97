//! One-dimensional minimization on a bracket.

/// 1/φ, the golden-section contraction factor.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a bracketed scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol * (1 + |x|)` or after
/// `max_iter` contractions. The endpoints are always evaluated too, so a
/// minimum sitting on the boundary of the bracket is returned exactly.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    assert!(lo <= hi, "golden_section: empty bracket [{lo}, {hi}]");
    let mut best = Minimum {
        x: lo,
        value: f(lo),
        evaluations: 1,
    };
    let consider = |x: f64, v: f64, best: &mut Minimum| {
        best.evaluations += 1;
        if v < best.value {
            best.x = x;
            best.value = v;
        }
    };
    let f_hi = f(hi);
    consider(hi, f_hi, &mut best);
    if hi == lo {
        return best;
    }

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (1.0 + c.abs().max(d.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            consider(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            consider(d, fd, &mut best);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_interior_quadratic_minimum() {
        let m = golden_section(|x| (x - 0.3) * (x - 0.3) + 2.0, -1.0, 4.0, 1e-12, 200);
        assert_abs_diff_eq!(m.x, 0.3, epsilon = 1e-7);
        assert_abs_diff_eq!(m.value, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn boundary_minimum_is_exact() {
        let m = golden_section(|x| x, 1.5, 9.0, 1e-12, 200);
        assert_eq!(m.x, 1.5);
        let m = golden_section(|x| -x, 1.5, 9.0, 1e-12, 200);
        assert_eq!(m.x, 9.0);
    }

    #[test]
    fn degenerate_bracket() {
        let m = golden_section(|x| x * x, 2.0, 2.0, 1e-12, 200);
        assert_eq!((m.x, m.value), (2.0, 4.0));
    }
}
