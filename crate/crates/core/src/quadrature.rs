//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Semi-infinite integrals with exponential tails are mapped onto `(0, 1]`
//! with `x = a − ln(t)/r`; slowly decaying tails (`r·a < 1`) are first split
//! into geometrically growing panels up to `x ≈ 1/r`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_SEGMENTS: usize = 4000;

/// Absolute and relative error targets; an integral is accepted when the
/// estimated error is below `max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl std::ops::Add for Integral {
    type Output = Integral;

    fn add(self, o: Integral) -> Integral {
        Integral {
            value: self.value + o.value,
            error: self.error + o.error,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

impl Integral {
    const ZERO: Integral = Integral { value: 0.0, error: 0.0, evaluations: 0 };
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kron.abs();
    let mut fv = [(0.0, 0.0); 7];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[j] = (f1, f2);
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kron;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kron * half;
    let asc = asc * half.abs();
    let abs_sum = abs_sum * half.abs();
    // QUADPACK's error heuristic.
    let mut error = ((kron - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_sum);
    }
    Segment { a, b, value, error }
}

/// `∫_a^b f(x) dx` for finite `a ≤ b`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!("integration limits must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Integral::ZERO);
    }
    let first = kronrod(&f, a, b);
    if !first.value.is_finite() {
        return Err(Error::Numeric { message: format!("non-finite integrand on [{a}, {b}]"), achieved: f64::NAN });
    }
    let mut heap = BinaryHeap::new();
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut evaluations = 15;
    while error > tol.target(value) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Numeric {
                message: format!("quadrature on [{a}, {b}] did not reach tolerance in {MAX_SEGMENTS} segments"),
                achieved: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Segment cannot be split further in floating point.
            return Err(Error::Numeric {
                message: format!("quadrature on [{a}, {b}] hit roundoff near x = {mid}"),
                achieved: error,
            });
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift from incremental updates.
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    if !value.is_finite() {
        return Err(Error::Numeric { message: format!("non-finite integral on [{a}, {b}]"), achieved: error });
    }
    Ok(Integral { value, error, evaluations })
}

/// `∫_0^b f(x) dx` for integrands behaving like `x^{shape−1}` at the origin.
///
/// Substitutes `x = u^{1/shape}`, which makes such integrands bounded.
pub fn integrate_from_origin<F: Fn(f64) -> f64>(f: F, b: f64, shape: f64, tol: Tolerance) -> Result<Integral> {
    if shape.is_nan() || shape <= 0.0 {
        return Err(Error::invalid(format!("origin shape must be positive, got {shape}")));
    }
    if shape == 1.0 {
        return integrate(f, 0.0, b, tol);
    }
    let inv = 1.0 / shape;
    let upper = b.powf(shape);
    integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            f(u.powf(inv)) * inv * u.powf(inv - 1.0)
        },
        0.0,
        upper,
        tol,
    )
}

/// `∫_a^∞ f(x) dx` for integrands decaying like `e^{−rate·x}` times a power.
pub fn integrate_tail<F: Fn(f64) -> f64>(f: F, a: f64, rate: f64, tol: Tolerance) -> Result<Integral> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid(format!("tail decay rate must be positive, got {rate}")));
    }
    if !a.is_finite() {
        return Err(Error::invalid("tail start must be finite"));
    }
    let mut total = Integral::ZERO;
    let mut start = a;
    if start * rate < 1.0 {
        // Panels [s, 2s] up to the decay scale 1/rate.
        if start < 1.0 {
            let panels = 1.0 + (1.0 / rate).log2().max(0.0);
            let piece = integrate(&f, start, 1.0, split(tol, panels))?;
            total = total + piece;
            start = 1.0;
        }
        let panels = 1.0 + (1.0 / (rate * start)).log2().max(0.0);
        let panel_tol = split(tol, panels);
        while start * rate < 1.0 {
            let end = 2.0 * start;
            total = total + integrate(&f, start, end, panel_tol)?;
            start = end;
        }
    }
    let scale = 1.0 / rate;
    let mapped = integrate(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let x = start - t.ln() * scale;
            let v = f(x);
            if v == 0.0 {
                0.0
            } else {
                v * scale / t
            }
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok(total + mapped)
}

fn split(tol: Tolerance, pieces: f64) -> Tolerance {
    Tolerance { abs: tol.abs / pieces.max(1.0), rel: tol.rel }
}
