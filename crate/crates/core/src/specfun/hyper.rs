use super::gamma::{ln_gamma_real, ln_rgamma_envelope, rgamma_real, sin_pi};
use super::{is_nonpositive_integer, Plateau, PrecisionPolicy};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// A series value together with the sum of absolute terms, a cancellation measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub abs_sum: f64,
    pub terms: usize,
}

impl SeriesSum {
    /// Estimated relative rounding error, `eps * sum|t_j| / |sum t_j|`.
    pub fn condition_error(&self) -> f64 {
        if self.value == 0.0 {
            return if self.abs_sum == 0.0 { 0.0 } else { f64::INFINITY };
        }
        f64::EPSILON * self.abs_sum / self.value.abs()
    }
}

fn param_pole(name: &str, v: f64) -> Error {
    Error::Pole { factor: name.to_string(), location: Complex64::new(v, 0.0) }
}

fn kummer_direct(a: f64, b: f64, x: f64, pol: &PrecisionPolicy) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    if is_nonpositive_integer(a) {
        let deg = (-a) as usize;
        for j in 0..deg {
            let jf = j as f64;
            term *= (a + jf) / (b + jf) * x / (jf + 1.0);
            sum += term;
        }
        return Ok(sum);
    }
    let mut plateau = Plateau::new();
    for j in 0..pol.max_terms {
        let jf = j as f64;
        term *= (a + jf) / (b + jf) * x / (jf + 1.0);
        sum += term;
        if !sum.is_finite() {
            return Err(Error::InvalidParameter(format!("M({a},{b},{x}) overflows; use kummer_m_scaled")));
        }
        if plateau.done(term, sum, pol) && (a + jf) * x / ((b + jf) * (jf + 1.0)) < 1.0 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { terms: pol.max_terms, context: format!("M({a},{b},{x})") })
}

/// Kummer's confluent hypergeometric function `M(a, b, x)`.
///
/// Negative arguments are mapped through `M(a,b,x) = e^x M(b-a,b,-x)` so that the
/// summed series has no cancellation.
pub fn kummer_m(a: f64, b: f64, x: f64, pol: &PrecisionPolicy) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Err(param_pole("b", b));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) {
        return kummer_direct(a, b, x, pol);
    }
    if x < 0.0 {
        return kummer_m_scaled(b - a, b, -x, pol);
    }
    kummer_direct(a, b, x, pol)
}

/// `e^{-x} M(a, b, x)` for `x >= 0`, valid beyond the overflow range of `M`.
pub fn kummer_m_scaled(a: f64, b: f64, x: f64, pol: &PrecisionPolicy) -> Result<f64> {
    if x < 600.0 || is_nonpositive_integer(a) {
        if is_nonpositive_integer(a) {
            return Ok((-x).exp() * kummer_direct(a, b, x, pol)?);
        }
        if x < 0.0 {
            return kummer_direct(b - a, b, -x, pol);
        }
        return Ok(kummer_direct(a, b, x, pol)? * (-x).exp());
    }
    // Large x: M ~ Gamma(b)/Gamma(a) e^x x^{a-b} sum (b-a)_k (1-a)_k / (k! x^k)
    let (lgb, sgb) = ln_gamma_real(b)?;
    let ra = rgamma_real(a);
    let mut term: f64 = 1.0;
    let mut sum: f64 = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        let next = term * (b - a + kf) * (1.0 - a + kf) / ((kf + 1.0) * x);
        if next.abs() > term.abs() || next.abs() < 1e-17 * sum.abs() {
            break;
        }
        term = next;
        sum += term;
    }
    Ok(sgb * lgb.exp() * ra * x.powf(a - b) * sum)
}

/// Power series of `2F1(a, b; c; x)` for `|x| < 1`.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, x: f64, pol: &PrecisionPolicy) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(param_pole("c", c));
    }
    if x.abs() >= 1.0 {
        return Err(Error::Divergence(format!("2F1 series at |x| = {} >= 1", x.abs())));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let terminating = is_nonpositive_integer(a) || is_nonpositive_integer(b);
    let mut plateau = Plateau::new();
    for j in 0..pol.max_terms {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * x;
        sum += term;
        if terminating && term == 0.0 {
            return Ok(sum);
        }
        let ratio = ((a + jf + 1.0) * (b + jf + 1.0) / ((c + jf + 1.0) * (jf + 2.0)) * x).abs();
        if plateau.done(term, sum, pol) && ratio < 1.0 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { terms: pol.max_terms, context: format!("2F1({a},{b};{c};{x})") })
}

/// Gauss hypergeometric function `2F1(a, b; c; x)` for real `x <= 0`.
///
/// Direct series for `|x| < 1/2`, Pfaff transformation for `-2 <= x <= -1/2`, and the
/// `1/(1-x)` connection formula below `-2` when `a - b` is not an integer.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64, pol: &PrecisionPolicy) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(param_pole("c", c));
    }
    if x > 0.0 {
        return Err(Error::InvalidParameter(format!("gauss_2f1 requires x <= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x > -0.5 {
        return hyp2f1_series(a, b, c, x, pol);
    }
    let d = a - b;
    let integer_gap = (d - d.round()).abs() < 1e-9;
    if x >= -2.0 || integer_gap {
        let w = x / (x - 1.0);
        return Ok((1.0 - x).powf(-a) * hyp2f1_series(a, c - b, c, w, pol)?);
    }
    let w = 1.0 / (1.0 - x);
    let (lgc, sgc) = ln_gamma_real(c)?;
    let (lba, sba) = ln_gamma_real(b - a)?;
    let (lab, sab) = ln_gamma_real(a - b)?;
    let t1 = {
        let r = rgamma_real(b) * rgamma_real(c - a);
        if r == 0.0 {
            0.0
        } else {
            sgc * sba * (lgc + lba).exp() * r * (1.0 - x).powf(-a) * hyp2f1_series(a, c - b, a - b + 1.0, w, pol)?
        }
    };
    let t2 = {
        let r = rgamma_real(a) * rgamma_real(c - b);
        if r == 0.0 {
            0.0
        } else {
            sgc * sab * (lgc + lab).exp() * r * (1.0 - x).powf(-b) * hyp2f1_series(b, c - a, b - a + 1.0, w, pol)?
        }
    };
    Ok(t1 + t2)
}

fn ln_rgamma_signed(x: f64) -> (f64, f64) {
    if x >= 0.5 {
        (ln_rgamma_envelope(x), 1.0)
    } else {
        let s = sin_pi(x);
        if s == 0.0 {
            (f64::NEG_INFINITY, 0.0)
        } else {
            (ln_rgamma_envelope(x) + s.abs().ln(), s.signum())
        }
    }
}

/// Fox-Wright `1Psi1[(a, A); (b, B); x] = sum_j Gamma(a + A j) / Gamma(b + B j) x^j / j!`
/// with a cancellation diagnostic. `B` may be negative.
pub fn fox_wright_1psi1_detail(a: f64, big_a: f64, b: f64, big_b: f64, x: f64, pol: &PrecisionPolicy) -> Result<SeriesSum> {
    if !(big_a > 0.0) {
        return Err(Error::InvalidParameter(format!("Fox-Wright weight A = {big_a} must be positive")));
    }
    let delta = 1.0 + big_b - big_a;
    if delta < -1e-12 {
        return Err(Error::Divergence(format!("Fox-Wright series with A - B = {} > 1", big_a - big_b)));
    }
    if delta.abs() <= 1e-12 {
        let radius = big_a.powf(-big_a) * big_b.abs().powf(big_b);
        if x.abs() >= radius {
            return Err(Error::Divergence(format!("Fox-Wright series with A - B = 1 needs |x| < {radius}, got {x}")));
        }
    }
    let lx = if x == 0.0 { f64::NEG_INFINITY } else { x.abs().ln() };
    let sx = x.signum();
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut quiet = 0;
    let mut prev_env = f64::INFINITY;
    let mut ln_fact = 0.0;
    for j in 0..pol.max_terms {
        let jf = j as f64;
        if j > 0 {
            ln_fact += jf.ln();
        }
        let (lga, sga) = ln_gamma_real(a + big_a * jf)
            .map_err(|_| Error::Pole { factor: format!("Gamma(a + A*{j})"), location: Complex64::new(a + big_a * jf, 0.0) })?;
        let (lrb, srb) = ln_rgamma_signed(b + big_b * jf);
        let ln_env = lga + ln_rgamma_envelope(b + big_b * jf) + jf * lx - ln_fact;
        let sign = sga * srb * if j % 2 == 1 { sx } else { 1.0 };
        let term = if j == 0 {
            sga * srb * (lga + lrb).exp()
        } else if x == 0.0 {
            0.0
        } else {
            sign * (lga + lrb + jf * lx - ln_fact).exp()
        };
        sum += term;
        abs_sum += term.abs();
        if j == 0 && x == 0.0 {
            return Ok(SeriesSum { value: sum, abs_sum, terms: 1 });
        }
        let env = ln_env.exp();
        let scale = pol.rel_tol * sum.abs().max(abs_sum * 1e-300) + pol.abs_tol;
        if env <= scale && env <= prev_env {
            quiet += 1;
        } else {
            quiet = 0;
        }
        prev_env = env;
        if quiet >= 3 {
            return Ok(SeriesSum { value: sum, abs_sum, terms: j + 1 });
        }
        if !sum.is_finite() {
            return Err(Error::NonConvergence { terms: j, context: "Fox-Wright overflow".into() });
        }
    }
    Err(Error::NonConvergence { terms: pol.max_terms, context: format!("1Psi1[({a},{big_a});({b},{big_b});{x}]") })
}

/// Fox-Wright `1Psi1[(a, A); (b, B); x]`.
pub fn fox_wright_1psi1(a: f64, big_a: f64, b: f64, big_b: f64, x: f64, pol: &PrecisionPolicy) -> Result<f64> {
    Ok(fox_wright_1psi1_detail(a, big_a, b, big_b, x, pol)?.value)
}

/// `Gamma(c + step j)` for `j = 0, 1, 2, ...` in order. When `step = p/q` with a small
/// denominator and all arguments are positive, values follow from
/// `Gamma(x + p) = Gamma(x) x (x+1) ... (x+p-1)` applied to the value `q` steps back.
struct GammaSequence {
    c: rug::Float,
    step: rug::Float,
    period: Option<(usize, u32)>,
    history: std::collections::VecDeque<rug::Float>,
    prec: u32,
}

impl GammaSequence {
    fn new(c: f64, step: f64, prec: u32) -> Self {
        use rug::Float;
        let period = if c > 0.0 && step > 0.0 {
            (1..=12usize).find_map(|q| {
                let p = (step * q as f64).round();
                ((step * q as f64 - p).abs() < 1e-12 * q as f64 && p >= 1.0).then_some((q, p as u32))
            })
        } else {
            None
        };
        let step_mp = match period {
            Some((q, p)) => Float::with_val(prec, p) / Float::with_val(prec, q as u32),
            None => Float::with_val(prec, step),
        };
        Self { c: Float::with_val(prec, c), step: step_mp, period, history: Default::default(), prec }
    }

    fn arg(&self, j: usize) -> rug::Float {
        rug::Float::with_val(self.prec, &self.c + rug::Float::with_val(self.prec, &self.step * j as u32))
    }

    /// Value at the next index `j`; `None` at a pole.
    fn next(&mut self, j: usize) -> Option<rug::Float> {
        let v = match self.period {
            Some((q, p)) if j >= q => {
                let x = self.arg(j - q);
                let mut acc = self.history.pop_front().expect("history holds q values");
                for i in 0..p {
                    acc *= rug::Float::with_val(self.prec, &x + i);
                }
                acc
            }
            _ => {
                let x = self.arg(j);
                if x.is_zero() || (x.is_sign_negative() && x.is_integer()) {
                    if self.period.is_some() {
                        self.history.push_back(rug::Float::with_val(self.prec, 0));
                    }
                    return None;
                }
                x.gamma()
            }
        };
        if self.period.is_some() {
            self.history.push_back(v.clone());
        }
        Some(v)
    }
}

/// Fox-Wright series summed in `bits`-bit floating point.
pub fn fox_wright_1psi1_mp(a: f64, big_a: f64, b: f64, big_b: f64, x: f64, bits: u32, max_terms: usize) -> Result<f64> {
    use rug::Float;
    if !(big_a > 0.0) || 1.0 + big_b - big_a < -1e-12 {
        return Err(Error::Divergence(format!("Fox-Wright parameters A = {big_a}, B = {big_b}")));
    }
    let prec = bits.max(64);
    let mut num = GammaSequence::new(a, big_a, prec);
    let mut den = GammaSequence::new(b, big_b, prec);
    let x_mp = Float::with_val(prec, x);
    // x^j / j!
    let mut power = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let mut quiet = 0;
    let mut prev = f64::INFINITY;
    for j in 0..max_terms {
        if j > 0 {
            if x == 0.0 {
                break;
            }
            power *= &x_mp;
            power /= j as u32;
        }
        let g = num.next(j);
        let h = den.next(j);
        let (g, h) = match (g, h) {
            (_, None) => continue,
            (None, _) => {
                return Err(Error::Pole { factor: format!("Gamma(a + A*{j})"), location: Complex64::new(a + big_a * j as f64, 0.0) })
            }
            (Some(g), Some(h)) => (g, h),
        };
        let term = Float::with_val(prec, &g * &power) / &h;
        sum += &term;
        let mag = term.get_exp().map_or(f64::NEG_INFINITY, f64::from);
        let lsum = sum.get_exp().map_or(f64::NEG_INFINITY, f64::from);
        if j > 0 && mag < prev && mag < lsum - prec as f64 - 10.0 {
            quiet += 1;
            if quiet >= 3 {
                return Ok(sum.to_f64());
            }
        } else {
            quiet = 0;
        }
        prev = mag;
    }
    Err(Error::NonConvergence { terms: max_terms, context: format!("1Psi1[({a},{big_a});({b},{big_b});{x}] at {prec} bits") })
}

/// `log2` of the largest term of the Fox-Wright series, scanned in log space.
fn fw_log2_max_term(a: f64, big_a: f64, b: f64, big_b: f64, x: f64) -> Result<f64> {
    let ln_x = x.abs().ln();
    let mut best = f64::NEG_INFINITY;
    let mut ln_fact = 0.0;
    for j in 0..10_000_000usize {
        if j > 0 {
            ln_fact += (j as f64).ln();
        }
        let (ga, gb) = (a + big_a * j as f64, b + big_b * j as f64);
        if is_nonpositive_integer(ga) || is_nonpositive_integer(gb) {
            continue;
        }
        let e = ln_gamma_real(ga)?.0 - ln_gamma_real(gb)?.0 + j as f64 * ln_x - ln_fact;
        best = best.max(e);
        if j > 8 && e < best - 60.0 {
            return Ok(best / std::f64::consts::LN_2);
        }
    }
    Err(Error::NonConvergence { terms: 10_000_000, context: "Fox-Wright term scan".into() })
}

/// Fox-Wright series with extended precision where double precision cancels beyond
/// `target` relative error; the returned `abs_sum` reflects the precision used.
pub fn fox_wright_1psi1_accurate(a: f64, big_a: f64, b: f64, big_b: f64, x: f64, target: f64, pol: &PrecisionPolicy) -> Result<SeriesSum> {
    let d = match fox_wright_1psi1_detail(a, big_a, b, big_b, x, pol) {
        Ok(d) => d,
        Err(Error::NonConvergence { .. }) => SeriesSum { value: f64::NAN, abs_sum: f64::INFINITY, terms: 0 },
        Err(e) => return Err(e),
    };
    if d.condition_error() <= target {
        return Ok(d);
    }
    let finite = d.abs_sum.is_finite() && d.value.is_finite();
    let log2_abs = if finite { d.abs_sum.log2() } else { fw_log2_max_term(a, big_a, b, big_b, x)? };
    let need = |v: f64| (log2_abs - v.abs().log2() - target.log2()).max(0.0).ceil() as u32 + 24;
    let floor = log2_abs.max(0.0) as u32 + 64;
    let mut bits = if finite { need(d.value.abs().max(d.abs_sum * f64::EPSILON)).max(floor) } else { floor };
    let max_terms = pol.max_terms.max(200_000);
    for _ in 0..12 {
        if bits > 1 << 17 {
            break;
        }
        let v = fox_wright_1psi1_mp(a, big_a, b, big_b, x, bits, max_terms)?;
        let required = need(v);
        if required <= bits {
            let rel = 2f64.powi(-(bits as i32 - 24)).max(0.0);
            return Ok(SeriesSum { value: v, abs_sum: rel * v.abs() / f64::EPSILON, terms: d.terms });
        }
        bits = (required + 16).max(bits + 32);
    }
    Err(Error::NonConvergence { terms: max_terms, context: format!("precision for 1Psi1 at x = {x}") })
}
