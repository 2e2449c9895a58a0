//! Adaptive Simpson quadrature, log-scale substitution and radial integrals
//! of the form `∫ b(t) t^{-α-1} dt` with analytic tail handling.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Absolute tolerance per initial panel.
    pub tol: f64,
    pub max_depth: u32,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { tol: 1e-8, max_depth: 50, max_evals: 20_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum of the local Richardson error estimates.
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl Integral {
    fn zero() -> Self {
        Integral { value: 0.0, error: 0.0, evals: 0, converged: true }
    }

    fn merge(self, other: Integral) -> Integral {
        Integral {
            value: self.value + other.value,
            error: self.error + other.error,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }
}

struct Simpson<'a, F> {
    f: &'a mut F,
    opts: QuadOptions,
    evals: usize,
    error: f64,
    converged: bool,
}

impl<F: FnMut(f64) -> f64> Simpson<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || !delta.is_finite() {
            self.error += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        if depth >= self.opts.max_depth || self.evals >= self.opts.max_evals {
            self.converged = false;
            self.error += delta.abs() / 15.0;
            return left + right + delta / 15.0;
        }
        self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
    }
}

/// `∫_a^b f` split into `panels` equal panels, each refined adaptively.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize, opts: QuadOptions) -> Integral {
    if !(b > a) {
        return Integral::zero();
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut s = Simpson { f: &mut f, opts, evals: 0, error: 0.0, converged: true };
    let mut value = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let hi = if k + 1 == panels { b } else { lo + width };
        let fa = s.eval(lo);
        let fm = s.eval(0.5 * (lo + hi));
        let fb = s.eval(hi);
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        value += s.refine(lo, hi, fa, fm, fb, whole, opts.tol, 0);
    }
    Integral { value, error: s.error, evals: s.evals, converged: s.converged }
}

/// `∫_{t_lo}^{t_hi} f(t) dt` under `t = e^s`, with `panels_per_unit`
/// panels per unit of `log t`.
pub fn integrate_log_scale<F: FnMut(f64) -> f64>(
    mut f: F,
    t_lo: f64,
    t_hi: f64,
    panels_per_unit: usize,
    opts: QuadOptions,
) -> Integral {
    if !(t_hi > t_lo && t_lo > 0.0) {
        return Integral::zero();
    }
    let (s_lo, s_hi) = (t_lo.ln(), t_hi.ln());
    let panels = ((s_hi - s_lo) * panels_per_unit as f64).ceil() as usize;
    adaptive_simpson(
        |s| {
            let t = s.exp();
            f(t) * t
        },
        s_lo,
        s_hi,
        panels,
        opts,
    )
}

/// Grid and tail settings for [`radial_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// Smallest radius integrated numerically when the lower limit is 0.
    pub t_lo: f64,
    /// Largest radius integrated numerically.
    pub t_hi: f64,
    pub log_panels_per_unit: usize,
    /// Panel width on `[1, t_hi]`, where `b` may oscillate.
    pub linear_panel: f64,
    pub quad: QuadOptions,
}

impl Default for RadialOptions {
    fn default() -> Self {
        RadialOptions {
            t_lo: 2f64.powi(-24),
            t_hi: 4096.0,
            log_panels_per_unit: 8,
            linear_panel: 0.25,
            quad: QuadOptions { tol: 1e-10, ..QuadOptions::default() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialIntegral {
    /// Core plus both tails; `+∞` when a divergence is detected.
    pub value: f64,
    pub core: Integral,
    pub lower_tail: f64,
    pub upper_tail: f64,
    /// Fitted exponent `q` with `b(t) t^{-α} ~ t^q` as `t ↓ 0`.
    pub lower_exponent: f64,
    /// Fitted log-log slope of `b(t) t^{-α}` over the last octaves.
    pub upper_exponent: f64,
    pub diverges_at_zero: bool,
    pub diverges_at_infinity: bool,
}

const MAX_LINEAR_PANELS: f64 = 65_536.0;

/// Divergence is declared at the origin when the fitted decay exponent is
/// below this margin.
const DECAY_MARGIN: f64 = 1e-3;

/// `∫_{lower}^∞ b(t) t^{-α-1} dt` for bounded `b ≥ 0`.
///
/// With `lower = None` the integral starts at 0: `[0, t_lo]` is covered by
/// a power law `b(t) ≈ c t^p` fitted on six octaves below `t_lo`. Beyond
/// `t_hi`, `b` is replaced by its `t^{-α-1}`-weighted mean over
/// `[t_hi/2, t_hi]`.
pub fn radial_integral<B: FnMut(f64) -> f64>(mut b: B, alpha: f64, lower: Option<f64>, opts: &RadialOptions) -> RadialIntegral {
    let weight = |t: f64| t.powf(-alpha - 1.0);
    let start = lower.unwrap_or(opts.t_lo);
    let t_hi = opts.t_hi.max(2.0 * start);

    let mut core = Integral::zero();
    let log_end = (0.5 * t_hi).min(1.0);
    if start < log_end {
        core = core.merge(integrate_log_scale(|t| b(t) * weight(t), start, log_end, opts.log_panels_per_unit, opts.quad));
    }
    let lin_start = start.max(1.0);
    let half = 0.5 * t_hi;
    let panels = |a: f64, c: f64| ((c - a) / opts.linear_panel).ceil().clamp(1.0, MAX_LINEAR_PANELS) as usize;
    let mut quarter_window = Integral::zero();
    let mut last_window = Integral::zero();
    if lin_start < half {
        let quarter = (0.25 * t_hi).max(lin_start);
        if lin_start < quarter {
            core = core.merge(adaptive_simpson(|t| b(t) * weight(t), lin_start, quarter, panels(lin_start, quarter), opts.quad));
        }
        quarter_window = adaptive_simpson(|t| b(t) * weight(t), quarter, half, panels(quarter, half), opts.quad);
        core = core.merge(quarter_window);
    }
    let last_lo = half.max(start);
    if last_lo < t_hi {
        last_window = if last_lo >= 1.0 {
            adaptive_simpson(|t| b(t) * weight(t), last_lo, t_hi, panels(last_lo, t_hi), opts.quad)
        } else {
            integrate_log_scale(|t| b(t) * weight(t), last_lo, t_hi, opts.log_panels_per_unit, opts.quad)
        };
        core = core.merge(last_window);
    }

    let weight_mass = |a: f64, c: f64| (a.powf(-alpha) - c.powf(-alpha)) / alpha;
    let last_mean = last_window.value / weight_mass(last_lo, t_hi);
    let upper_tail = last_mean * t_hi.powf(-alpha) / alpha;
    let upper_exponent = if quarter_window.value > 0.0 && last_window.value > 0.0 {
        // window averages of b(t) t^{-α} one octave apart
        let avg_last = last_window.value / (t_hi.ln() - half.ln());
        let quarter_lo = (0.25 * t_hi).max(lin_start);
        let avg_quarter = quarter_window.value / (half.ln() - quarter_lo.ln());
        (avg_last / avg_quarter).ln() / (t_hi / half).ln()
    } else {
        -alpha
    };
    let diverges_at_infinity = !(alpha > 0.0) || upper_exponent >= 0.0 || !upper_tail.is_finite();

    let (lower_tail, lower_exponent, diverges_at_zero) = match lower {
        Some(_) => (0.0, f64::INFINITY, false),
        None => power_law_tail(&mut b, alpha, start),
    };

    let value = if diverges_at_zero || diverges_at_infinity {
        f64::INFINITY
    } else {
        core.value + lower_tail + upper_tail
    };
    RadialIntegral {
        value,
        core,
        lower_tail,
        upper_tail,
        lower_exponent,
        upper_exponent,
        diverges_at_zero,
        diverges_at_infinity,
    }
}

/// Fits `b(t) ≈ c t^p` on `t_lo · 2^{-k}`, `k = 0..6`, and integrates the fit
/// against `t^{-α-1}` over `[0, t_lo]`.
fn power_law_tail<B: FnMut(f64) -> f64>(b: &mut B, alpha: f64, t_lo: f64) -> (f64, f64, bool) {
    let samples: Vec<(f64, f64)> = (0..7)
        .map(|k| {
            let t = t_lo * 0.5f64.powi(k);
            (t, b(t))
        })
        .collect();
    let smallest = samples.last().map(|s| s.1).unwrap_or(0.0);
    if smallest <= 0.0 {
        return (0.0, f64::INFINITY, false);
    }
    let pts: Vec<(f64, f64)> = samples.iter().filter(|s| s.1 > 0.0).map(|s| (s.0.ln(), s.1.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let p = sxy / sxx;
    let q = p - alpha;
    if q <= DECAY_MARGIN {
        return (f64::INFINITY, q, true);
    }
    (samples[0].1 * t_lo.powf(-alpha) / q, q, false)
}
