//! Adaptive Simpson quadrature for bounded integrands on finite intervals.

use crate::error::{Error, Result};

/// Accuracy target for [`adaptive_simpson`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_depth: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local Richardson error estimates; at most `abs_tol`.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// The interval is first cut into this many panels so that a coarse first
/// look cannot accidentally agree with itself.
const INITIAL_PANELS: usize = 8;

struct State<'a, F> {
    f: &'a F,
    max_depth: u32,
    evaluations: usize,
    error: f64,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

impl<F: Fn(f64) -> f64> State<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }

    fn panel(&mut self, a: f64, b: f64, fa: f64, fb: f64) -> Panel {
        let fm = self.eval(0.5 * (a + b));
        Panel {
            a,
            b,
            fa,
            fm,
            fb,
            whole: (b - a) / 6.0 * (fa + 4.0 * fm + fb),
        }
    }

    fn refine(&mut self, p: Panel, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (p.a + p.b);
        let left = self.panel(p.a, m, p.fa, p.fm);
        let right = self.panel(m, p.b, p.fm, p.fb);
        let delta = left.whole + right.whole - p.whole;
        if delta.abs() <= 15.0 * tol {
            self.error += delta.abs() / 15.0;
            return Ok(left.whole + right.whole + delta / 15.0);
        }
        if depth >= self.max_depth {
            return Err(Error::numeric(format!(
                "adaptive Simpson did not converge on [{}, {}] within depth {}",
                p.a, p.b, self.max_depth
            )));
        }
        Ok(self.refine(left, tol / 2.0, depth + 1)? + self.refine(right, tol / 2.0, depth + 1)?)
    }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `spec.abs_tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite() && spec.abs_tol > 0.0) {
        return Err(Error::parameter("quadrature needs finite limits and a positive tolerance"));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut st = State {
        f: &f,
        max_depth: spec.max_depth,
        evaluations: 0,
        error: 0.0,
    };
    let width = (b - a) / INITIAL_PANELS as f64;
    let tol = spec.abs_tol / INITIAL_PANELS as f64;
    let mut lo = a;
    let mut f_lo = st.eval(a);
    let mut total = 0.0;
    for p in 0..INITIAL_PANELS {
        let hi = if p + 1 == INITIAL_PANELS { b } else { a + width * (p + 1) as f64 };
        let f_hi = st.eval(hi);
        let panel = st.panel(lo, hi, f_lo, f_hi);
        if !(panel.whole.is_finite()) {
            return Err(Error::numeric("integrand is not finite"));
        }
        total += st.refine(panel, tol, 0)?;
        lo = hi;
        f_lo = f_hi;
    }
    Ok(Integral {
        value: total,
        error_estimate: st.error,
        evaluations: st.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn polynomials_and_trig() {
        let spec = QuadratureSpec::default();
        let r = adaptive_simpson(|x| x * x * x, 0.0, 2.0, &spec).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
        let r = adaptive_simpson(f64::sin, 0.0, PI, &spec).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
        assert!(r.error_estimate <= spec.abs_tol);
        let r = adaptive_simpson(|t| t, 0.0, FRAC_PI_2, &spec).unwrap();
        assert!((r.value - PI * PI / 8.0).abs() < 1e-14);
    }

    #[test]
    fn steep_integrand() {
        // ∫₀^{π/2} atan(s tan t) dt for large s approaches π²/4 − π/(2s)·log(...)… just
        // check convergence and the bound (π/2)².
        let spec = QuadratureSpec::default();
        let s = 1e6;
        let r = adaptive_simpson(|t: f64| (s * t.sin()).atan2(t.cos()), 0.0, FRAC_PI_2, &spec).unwrap();
        assert!(r.value < PI * PI / 4.0 && r.value > PI * PI / 4.0 - 1e-4);
        assert!(r.error_estimate <= spec.abs_tol);
    }

    #[test]
    fn reports_nonconvergence() {
        let spec = QuadratureSpec {
            abs_tol: 1e-12,
            max_depth: 3,
        };
        assert!(adaptive_simpson(|x: f64| (50.0 * x).sin(), 0.0, 10.0, &spec).is_err());
        assert!(adaptive_simpson(|x| x, 0.0, f64::INFINITY, &QuadratureSpec::default()).is_err());
        let zero = adaptive_simpson(|x| x, 1.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert_eq!(zero.value, 0.0);
    }
}
